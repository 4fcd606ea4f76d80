#include "physcast/model.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace physcast {

std::string to_string(EstimatorKind k) { return k == EstimatorKind::kNet ? "net" : "variational"; }

std::string to_string(RefinerKind k) {
  switch (k) {
    case RefinerKind::kIdentity: return "identity";
    case RefinerKind::kInpaint: return "inpaint";
    case RefinerKind::kNet: return "net";
  }
  return "?";
}

EstimatorKind parse_estimator_kind(const std::string& s) {
  if (s == "net") return EstimatorKind::kNet;
  if (s == "variational") return EstimatorKind::kVariational;
  throw std::invalid_argument("unknown estimator '" + s + "' (expected variational or net)");
}

RefinerKind parse_refiner_kind(const std::string& s) {
  if (s == "net") return RefinerKind::kNet;
  if (s == "inpaint") return RefinerKind::kInpaint;
  if (s == "identity") return RefinerKind::kIdentity;
  throw std::invalid_argument("unknown refiner '" + s + "' (expected inpaint, net or identity)");
}

void ModelConfig::validate() const {
  if (input_frames < 2 && estimator == EstimatorKind::kVariational)
    throw std::invalid_argument("variational estimator needs at least 2 input frames");
  if (input_frames < 1) throw std::invalid_argument("input frame count must be positive");
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  if (!(kernel.kappa >= 0.0)) throw std::invalid_argument("kappa must be non-negative");
  thresholds.validate();
  EvolutionConfig e;
  e.beta = beta;
  e.validate();
}

EvolutionConfig Model::evolution_config() const {
  EvolutionConfig e;
  e.beta = config.beta;
  e.variant = config.evolution;
  e.conv = evolve;
  return e;
}

RolloutConfig Model::rollout_config(PaddingRule pad) const {
  return {evolution_config(), config.kernel, config.thresholds, pad};
}

std::unique_ptr<MotionEstimator> Model::make_estimator() const {
  if (config.estimator == EstimatorKind::kVariational)
    return std::make_unique<VariationalEstimator>(config.variational, config.kernel);
  if (!motion) throw std::runtime_error("model has no motion network");
  return std::make_unique<NetEstimator>(motion);
}

std::unique_ptr<Refiner> Model::make_refiner() const {
  switch (config.refiner) {
    case RefinerKind::kIdentity: return std::make_unique<IdentityRefiner>();
    case RefinerKind::kInpaint: return std::make_unique<InpaintRefiner>();
    case RefinerKind::kNet:
      if (!generator) throw std::runtime_error("model has no generator network");
      return std::make_unique<NetRefiner>(generator);
  }
  throw std::logic_error("unknown refiner kind");
}

Model make_model(const ModelConfig& cfg, std::uint64_t seed, double head_scale) {
  cfg.validate();
  Model m;
  m.config = cfg;
  // Separate streams so enabling one network does not change another's init.
  if (cfg.estimator == EstimatorKind::kNet)
    m.motion = std::make_shared<MotionNet>(make_motion_net(cfg.input_frames, cfg.motion_widths, seed, head_scale));
  if (cfg.refiner == RefinerKind::kNet)
    m.generator = std::make_shared<GeneratorNet>(make_generator(cfg.generator_widths, seed + 1, head_scale));
  if (cfg.evolution == EvolutionVariant::kConv) {
    m.evolve = std::make_shared<ConvEvolveParams>(nn::ConvStackConfig{4, cfg.evolve_hidden, 2}, "evolve");
    nn::init_he(m.evolve->params(), seed + 2, head_scale);
  }
  return m;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string widths_text(const std::array<int, 4>& w) {
  return std::to_string(w[0]) + "," + std::to_string(w[1]) + "," + std::to_string(w[2]) + "," + std::to_string(w[3]);
}

std::array<int, 4> parse_widths(const std::string& s) {
  std::array<int, 4> w{};
  std::istringstream is(s);
  std::string part;
  for (int i = 0; i < 4; ++i) {
    if (!std::getline(is, part, ',')) throw std::runtime_error("checkpoint: bad widths '" + s + "'");
    w[i] = std::stoi(part);
  }
  return w;
}

const std::string& need(const Checkpoint& c, const std::string& key) {
  auto it = c.meta.find(key);
  if (it == c.meta.end()) throw std::runtime_error("checkpoint lacks metadata '" + key + "'");
  return it->second;
}

}  // namespace

Checkpoint to_checkpoint(const Model& model) {
  const ModelConfig& c = model.config;
  Checkpoint ck;
  auto& m = ck.meta;
  m["input_frames"] = std::to_string(c.input_frames);
  m["horizon"] = std::to_string(c.horizon);
  m["estimator"] = to_string(c.estimator);
  m["refiner"] = to_string(c.refiner);
  m["evolution"] = c.evolution == EvolutionVariant::kConv ? "conv" : "momentum";
  m["beta"] = fmt(c.beta);
  m["kappa"] = fmt(c.kernel.kappa);
  if (c.kernel.truncation_radius) m["truncation_radius"] = std::to_string(*c.kernel.truncation_radius);
  m["tau_low"] = fmt(c.thresholds.tau_low);
  m["tau_high"] = fmt(c.thresholds.tau_high);
  m["splat"] = c.thresholds.splat_mode == SplatMode::kNearest ? "nearest" : "bilinear";
  m["motion_widths"] = widths_text(c.motion_widths);
  m["generator_widths"] = widths_text(c.generator_widths);
  m["evolve_hidden"] = std::to_string(c.evolve_hidden);
  m["variational_iterations"] = std::to_string(c.variational.iterations);
  m["variational_lr"] = fmt(c.variational.learning_rate);
  m["variational_alpha"] = fmt(c.variational.loss.alpha);
  m["variational_lambda_lp"] = fmt(c.variational.loss.lambda_lp);
  m["variational_lambda_div"] = fmt(c.variational.loss.lambda_div);
  m["variational_lambda_smooth"] = fmt(c.variational.loss.lambda_smooth);
  if (model.stats) {
    m["stats_mean"] = fmt(model.stats->mean);
    m["stats_std"] = fmt(model.stats->std);
    m["stats_min"] = fmt(model.stats->min);
    m["stats_max"] = fmt(model.stats->max);
  }
  if (model.motion) append_params(ck.params, model.motion->params());
  if (model.generator) append_params(ck.params, model.generator->params());
  if (model.evolve) append_params(ck.params, model.evolve->params());
  return ck;
}

Model from_checkpoint(const Checkpoint& ck) {
  ModelConfig c;
  c.input_frames = std::stoi(need(ck, "input_frames"));
  c.horizon = std::stoi(need(ck, "horizon"));
  c.estimator = parse_estimator_kind(need(ck, "estimator"));
  c.refiner = parse_refiner_kind(need(ck, "refiner"));
  const std::string& ev = need(ck, "evolution");
  if (ev != "momentum" && ev != "conv") throw std::runtime_error("checkpoint: unknown evolution '" + ev + "'");
  c.evolution = ev == "conv" ? EvolutionVariant::kConv : EvolutionVariant::kMomentum;
  c.beta = std::stod(need(ck, "beta"));
  c.kernel.kappa = std::stod(need(ck, "kappa"));
  if (ck.meta.count("truncation_radius")) c.kernel.truncation_radius = std::stoi(ck.meta.at("truncation_radius"));
  c.thresholds.tau_low = std::stod(need(ck, "tau_low"));
  c.thresholds.tau_high = std::stod(need(ck, "tau_high"));
  c.thresholds.splat_mode = need(ck, "splat") == "nearest" ? SplatMode::kNearest : SplatMode::kBilinear;
  c.motion_widths = parse_widths(need(ck, "motion_widths"));
  c.generator_widths = parse_widths(need(ck, "generator_widths"));
  c.evolve_hidden = std::stoi(need(ck, "evolve_hidden"));
  c.variational.iterations = std::stoi(need(ck, "variational_iterations"));
  c.variational.learning_rate = std::stod(need(ck, "variational_lr"));
  c.variational.loss.alpha = std::stod(need(ck, "variational_alpha"));
  c.variational.loss.lambda_lp = std::stod(need(ck, "variational_lambda_lp"));
  c.variational.loss.lambda_div = std::stod(need(ck, "variational_lambda_div"));
  c.variational.loss.lambda_smooth = std::stod(need(ck, "variational_lambda_smooth"));

  Model m = make_model(c, 0);
  if (m.motion) assign_params(m.motion->params(), ck.params);
  if (m.generator) assign_params(m.generator->params(), ck.params);
  if (m.evolve) assign_params(m.evolve->params(), ck.params);
  if (ck.meta.count("stats_mean"))
    m.stats = Stats{std::stod(need(ck, "stats_mean")), std::stod(need(ck, "stats_std")),
                    std::stod(need(ck, "stats_min")), std::stod(need(ck, "stats_max"))};
  return m;
}

Forecaster make_forecaster(const Model& model, PaddingRule pad) {
  auto estimator = std::shared_ptr<MotionEstimator>(model.make_estimator());
  auto refiner = std::shared_ptr<Refiner>(model.make_refiner());
  const RolloutConfig cfg = model.rollout_config(pad);
  const std::optional<Stats> stats = model.stats;
  return [estimator, refiner, cfg, stats](const Sequence& inputs, int horizon) {
    const Sequence x = stats ? normalize(inputs, *stats) : inputs;
    const Sequence y = rollout(x, *estimator, *refiner, horizon, cfg);
    return stats ? denormalize(y, *stats) : y;
  };
}

}  // namespace physcast
