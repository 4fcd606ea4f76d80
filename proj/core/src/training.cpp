#include "physcast/training.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace physcast {

RolloutGraph::RolloutGraph(ScalarField anchor, GraphConfig cfg, GraphRefiner* refiner)
    : anchor_(std::move(anchor)), cfg_(std::move(cfg)), refiner_(refiner) {
  require_field_shape(anchor_.shape(), "rollout graph");
  cfg_.evolution.validate();
  cfg_.loss.validate();
}

const GraphStep& RolloutGraph::step(const VectorField& interval, const ScalarField& target) {
  require_same_shape(anchor_.shape(), interval.shape(), "rollout graph interval");
  require_same_shape(anchor_.shape(), target.shape(), "rollout graph target");
  GraphStep s;
  s.interval = interval;
  const EvolutionState prev = steps_.empty() ? EvolutionState{} : steps_.back().state;
  if (prev.step_index > 0 && cfg_.evolution.variant == EvolutionVariant::kConv) {
    // Same computation as compose_step, with the stack's activations kept.
    const VectorField warped = warp_flow(prev.cached, interval, cfg_.pad);
    const ScalarField* planes[4] = {&interval.u, &interval.v, &warped.u, &warped.v};
    nn::ConvStackCache<float> cache;
    const auto out = cfg_.evolution.conv->forward(nn::stack<float>(std::span<const ScalarField* const>(planes)), &cache);
    s.state.step_index = prev.step_index + 1;
    s.state.cached = nn::to_flow(out);
    s.state.total = s.state.cached + warp_flow(prev.total, interval, cfg_.pad);
    evolve_cache_.push_back(std::move(cache));
  } else {
    s.state = compose_step(prev, interval, cfg_.evolution, cfg_.pad);
    if (prev.step_index > 0) evolve_cache_.emplace_back();
  }
  s.kernel = cfg_.kernel.scaled(static_cast<double>(s.state.step_index));
  s.propagated = advect(anchor_, s.state.total, s.kernel, cfg_.pad);
  s.mask = cfg_.use_mask ? mask_from_flow(s.state.total, cfg_.thresholds) : full_mask(anchor_.shape());
  s.output = refiner_ ? refiner_->forward(s.propagated, s.mask) : s.propagated;
  s.loss = total_loss(target, s.output, s.mask, s.state.total, cfg_.loss);
  steps_.push_back(std::move(s));
  targets_.push_back(target);
  return steps_.back();
}

double RolloutGraph::loss() const {
  if (steps_.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : steps_) acc += s.loss.total;
  return acc / static_cast<double>(steps_.size());
}

std::vector<VectorField> RolloutGraph::backward(std::span<float> evolve_grad) const {
  const std::size_t n = steps_.size();
  std::vector<VectorField> g_interval;
  if (n == 0) return g_interval;
  const Shape shape = anchor_.shape();
  const double inv_k = 1.0 / static_cast<double>(n);
  const bool conv = cfg_.evolution.variant == EvolutionVariant::kConv;
  std::vector<float> scratch;
  if (conv && evolve_grad.empty()) {
    scratch.assign(cfg_.evolution.conv->params().size(), 0.0f);
    evolve_grad = scratch;
  }

  std::vector<VectorField> g_total(n, VectorField(shape));
  std::vector<VectorField> g_cached(n, VectorField(shape));
  g_interval.assign(n, VectorField(shape));

  for (std::size_t k = n; k-- > 0;) {
    const GraphStep& s = steps_[k];
    // Direct contributions of this step's loss.
    const ScalarField g_out =
        (cfg_.loss.lambda_lp * inv_k) * masked_mse_grad(targets_[k], s.output, s.mask, cfg_.loss.alpha);
    const ScalarField g_prop = refiner_ ? refiner_->backward(k, g_out) : g_out;
    g_total[k] += advect_backward(anchor_, s.state.total, s.kernel, cfg_.pad, g_prop).flow;
    g_total[k] += (cfg_.loss.lambda_div * inv_k) * divergence_penalty_grad(s.state.total);
    g_total[k] += (cfg_.loss.lambda_smooth * inv_k) * smoothness_penalty_grad(s.state.total);

    if (k == 0) {
      g_interval[0] += g_total[0];
      g_interval[0] += g_cached[0];
      break;
    }
    const GraphStep& p = steps_[k - 1];
    // total_k = cached_k + warp_flow(total_{k-1}, interval_k)
    g_cached[k] += g_total[k];
    const WarpFlowGradient wt = warp_flow_backward(p.state.total, s.interval, cfg_.pad, g_total[k]);
    g_total[k - 1] += wt.flow;
    g_interval[k] += wt.displacement;
    // cached_k = F(cached_{k-1}, interval_k)
    if (!conv) {
      const double beta = cfg_.evolution.beta;
      g_interval[k] += (1.0 - beta) * g_cached[k];
      g_cached[k - 1] += beta * g_cached[k];
    } else {
      const auto g_in = cfg_.evolution.conv->backward(evolve_cache_[k - 1], nn::from_flow<float>(g_cached[k]),
                                                      evolve_grad);
      g_interval[k] += VectorField(nn::channel(g_in, 0), nn::channel(g_in, 1));
      const VectorField g_warped(nn::channel(g_in, 2), nn::channel(g_in, 3));
      const WarpFlowGradient wc = warp_flow_backward(p.state.cached, s.interval, cfg_.pad, g_warped);
      g_cached[k - 1] += wc.flow;
      g_interval[k] += wc.displacement;
    }
  }
  return g_interval;
}

std::vector<Sequence> make_windows(const std::vector<Sequence>& data, int input_frames, int horizon, int stride) {
  const int len = input_frames + horizon;
  if (input_frames < 1 || horizon < 1) throw std::invalid_argument("make_windows: bad window length");
  if (stride <= 0) stride = len;
  std::vector<Sequence> out;
  for (const auto& seq : data) {
    for (int start = 0; start + len <= static_cast<int>(seq.size()); start += stride)
      out.push_back({{seq.frames.begin() + start, seq.frames.begin() + start + len}, seq.step_hours});
  }
  return out;
}

namespace {

// Residual generator recorded for backpropagation.
class GeneratorStage final : public GraphRefiner {
 public:
  GeneratorStage(const GeneratorNet& net, std::span<float> grad) : net_(net), grad_(grad) {}

  ScalarField forward(const ScalarField& propagated, const ConflictMask& mask) override {
    nn::EncoderDecoderCache<float> cache;
    const auto out = net_.forward(generator_input(propagated, mask), &cache);
    caches_.push_back(std::move(cache));
    return propagated + nn::channel(out, 0);
  }

  ScalarField backward(std::size_t step, const ScalarField& grad_output) override {
    const ScalarField* planes[1] = {&grad_output};
    const auto g = nn::stack<float>(std::span<const ScalarField* const>(planes));
    std::span<float> sink = grad_;
    std::vector<float> scratch;
    if (sink.empty()) {
      scratch.assign(net_.params().size(), 0.0f);
      sink = scratch;
    }
    const auto g_in = net_.backward(caches_.at(step), g, sink);
    return grad_output + nn::channel(g_in, 0);
  }

 private:
  const GeneratorNet& net_;
  std::span<float> grad_;
  std::vector<nn::EncoderDecoderCache<float>> caches_;
};

bool finite_values(std::span<const float> v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

}  // namespace

double window_loss(const Model& model, const Sequence& window, const LossConfig& loss, PaddingRule pad,
                   WindowGradients* grads) {
  const ModelConfig& mc = model.config;
  const int n_in = mc.input_frames;
  const int horizon = static_cast<int>(window.size()) - n_in;
  if (horizon < 1) throw std::invalid_argument("window_loss: window holds no target frames");

  if (grads) {
    if (model.motion) grads->motion.resize(model.motion->params().size(), 0.0f);
    if (model.generator) grads->generator.resize(model.generator->params().size(), 0.0f);
    if (model.evolve) grads->evolve.resize(model.evolve->params().size(), 0.0f);
  }

  std::unique_ptr<GeneratorStage> gen;
  if (mc.refiner == RefinerKind::kNet) {
    if (!model.generator) throw std::runtime_error("model has no generator network");
    gen = std::make_unique<GeneratorStage>(*model.generator,
                                           grads ? std::span<float>(grads->generator) : std::span<float>());
  }
  GraphConfig gcfg{model.evolution_config(), mc.kernel, mc.thresholds, pad, loss, true};
  RolloutGraph graph(window.frames[n_in - 1], gcfg, gen.get());

  std::vector<ScalarField> frames(window.frames.begin(), window.frames.begin() + n_in);
  std::vector<nn::EncoderDecoderCache<float>> motion_caches;
  for (int k = 0; k < horizon; ++k) {
    const Sequence current{frames, window.step_hours};
    VectorField interval;
    if (mc.estimator == EstimatorKind::kNet) {
      nn::EncoderDecoderCache<float> cache;
      interval = nn::to_flow(model.motion->forward(window_tensor(current, n_in), &cache));
      motion_caches.push_back(std::move(cache));
    } else {
      interval = estimate_variational(current, mc.variational, mc.kernel);
    }
    const GraphStep& s = graph.step(interval, window.frames[n_in + k]);
    // The window slides with detached predictions.
    ScalarField next = mc.refiner == RefinerKind::kInpaint ? refine_inpaint(s.propagated, s.mask) : s.output;
    frames.erase(frames.begin());
    frames.push_back(std::move(next));
  }

  const double value = graph.loss();
  if (grads && std::isfinite(value)) {
    const auto g_interval = graph.backward(grads->evolve);
    if (model.motion && mc.estimator == EstimatorKind::kNet)
      for (int k = 0; k < horizon; ++k)
        model.motion->backward(motion_caches[k], nn::from_flow<float>(g_interval[k]), grads->motion);
  }
  return value;
}

double dataset_loss(const Model& model, const std::vector<Sequence>& windows, const TrainConfig& cfg) {
  if (windows.empty()) throw std::invalid_argument("dataset_loss: no windows");
  double acc = 0.0;
  for (const auto& w : windows) acc += window_loss(model, w, cfg.loss, cfg.pad);
  return acc / static_cast<double>(windows.size());
}

namespace {

Model deep_copy(const Model& m) {
  Model out = m;
  if (m.motion) out.motion = std::make_shared<MotionNet>(*m.motion);
  if (m.generator) out.generator = std::make_shared<GeneratorNet>(*m.generator);
  if (m.evolve) out.evolve = std::make_shared<ConvEvolveParams>(*m.evolve);
  return out;
}

struct Snapshot {
  std::vector<float> motion, generator, evolve;
};

Snapshot snapshot(const Model& m) {
  Snapshot s;
  if (m.motion) s.motion = m.motion->params().values;
  if (m.generator) s.generator = m.generator->params().values;
  if (m.evolve) s.evolve = m.evolve->params().values;
  return s;
}

void restore(Model& m, const Snapshot& s) {
  if (m.motion) m.motion->params().values = s.motion;
  if (m.generator) m.generator->params().values = s.generator;
  if (m.evolve) m.evolve->params().values = s.evolve;
}

}  // namespace

TrainResult train(Model model, const std::vector<Sequence>& data, const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be non-negative");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch size must be positive");
  cfg.loss.validate();
  TrainResult result;
  result.model = deep_copy(model);
  Model& m = result.model;
  m.config.validate();

  const std::vector<Sequence> windows = make_windows(data, m.config.input_frames, m.config.horizon, cfg.window_stride);
  if (windows.empty())
    throw std::invalid_argument("train: no sequence holds " + std::to_string(m.config.input_frames) +
                                " inputs plus horizon " + std::to_string(m.config.horizon));
  for (const auto& w : windows) {
    validate_sequence(w, 2);
    const Shape s = w.shape();
    if (s.height % 8 != 0 || s.width % 8 != 0)
      throw ShapeError("train: frame shape " + to_string(s) + " is not divisible by 8");
  }

  std::optional<nn::Adam> adam_motion, adam_generator, adam_evolve;
  if (m.motion) adam_motion.emplace(m.motion->params().size(), cfg.adam);
  if (m.generator) adam_generator.emplace(m.generator->params().size(), cfg.adam);
  if (m.evolve) adam_evolve.emplace(m.evolve->params().size(), cfg.adam);

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  result.initial_loss = dataset_loss(m, windows, cfg);
  if (!std::isfinite(result.initial_loss)) {
    result.diverged = true;
    result.diagnostic = "initial loss is not finite";
    result.final_loss = result.initial_loss;
    return result;
  }
  Snapshot good = snapshot(m);

  for (int epoch = 0; epoch < cfg.epochs && !result.diverged; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      WindowGradients g;
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) batch_loss += window_loss(m, windows[order[i]], cfg.loss, cfg.pad, &g);
      const bool finite = std::isfinite(batch_loss) && finite_values(g.motion) && finite_values(g.generator) &&
                          finite_values(g.evolve);
      if (!finite) {
        restore(m, good);
        result.diverged = true;
        result.diagnostic = "non-finite loss or gradient in epoch " + std::to_string(epoch) +
                            "; parameters restored to the last finite-loss state";
        break;
      }
      good = snapshot(m);
      epoch_loss += batch_loss;
      const float scale = 1.0f / static_cast<float>(end - start);
      for (auto* v : {&g.motion, &g.generator, &g.evolve})
        for (auto& x : *v) x *= scale;
      if (adam_motion) adam_motion->step(m.motion->params().values, g.motion);
      if (adam_generator) adam_generator->step(m.generator->params().values, g.generator);
      if (adam_evolve) adam_evolve->step(m.evolve->params().values, g.evolve);
    }
    if (result.diverged) break;
    result.loss_history.push_back(epoch_loss / static_cast<double>(windows.size()));
    result.epochs_run = epoch + 1;
  }

  result.final_loss = dataset_loss(m, windows, cfg);
  if (!std::isfinite(result.final_loss) && !result.diverged) {
    restore(m, good);
    result.diverged = true;
    result.diagnostic = "non-finite loss after the last update; parameters restored to the last finite-loss state";
    result.final_loss = dataset_loss(m, windows, cfg);
  }
  return result;
}

}  // namespace physcast
