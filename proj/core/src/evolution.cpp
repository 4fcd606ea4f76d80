#include "physcast/evolution.hpp"

#include <stdexcept>

#include "bytes.hpp"

namespace physcast {

void EvolutionConfig::validate() const {
  if (order != 1) throw std::invalid_argument("evolution: only order M = 1 is supported");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("evolution: beta must lie in [0, 1)");
  if (variant == EvolutionVariant::kConv && !conv)
    throw std::invalid_argument("evolution: conv variant needs parameters");
}

VectorField evolve_momentum(const VectorField& cached, const VectorField& interval, double beta) {
  require_same_shape(cached.shape(), interval.shape(), "evolve_momentum");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("evolve_momentum: beta must lie in [0, 1]");
  VectorField out(cached.shape());
  for (std::size_t i = 0; i < cached.u.size(); ++i) {
    out.u[i] = (1.0 - beta) * interval.u[i] + beta * cached.u[i];
    out.v[i] = (1.0 - beta) * interval.v[i] + beta * cached.v[i];
  }
  return out;
}

VectorField evolve_conv(const VectorField& cached, const VectorField& interval, const ConvEvolveParams& params,
                        PaddingRule pad) {
  require_same_shape(cached.shape(), interval.shape(), "evolve_conv");
  const VectorField warped = warp_flow(cached, interval, pad);
  const ScalarField* planes[4] = {&interval.u, &interval.v, &warped.u, &warped.v};
  const auto input = nn::stack<float>(std::span<const ScalarField* const>(planes));
  return nn::to_flow(params.forward(input));
}

EvolutionState compose_step(const EvolutionState& state, const VectorField& interval, const EvolutionConfig& cfg,
                            PaddingRule pad) {
  cfg.validate();
  EvolutionState next;
  next.step_index = state.step_index + 1;
  if (state.step_index == 0) {
    next.total = interval;
    next.cached = interval;
    return next;
  }
  require_same_shape(state.total.shape(), interval.shape(), "compose_step");
  next.cached = cfg.variant == EvolutionVariant::kMomentum ? evolve_momentum(state.cached, interval, cfg.beta)
                                                           : evolve_conv(state.cached, interval, *cfg.conv, pad);
  next.total = next.cached + warp_flow(state.total, interval, pad);
  return next;
}

namespace {

constexpr std::string_view kStateMagic = "PCES";
constexpr std::string_view kRolloutMagic = "PCRS";

void write_state(detail::ByteWriter& w, const EvolutionState& s) {
  w.u32(static_cast<std::uint32_t>(s.step_index));
  if (s.step_index == 0) return;
  w.grid(s.total.u);
  w.grid(s.total.v);
  w.grid(s.cached.u);
  w.grid(s.cached.v);
}

EvolutionState read_state(detail::ByteReader& r) {
  EvolutionState s;
  s.step_index = static_cast<int>(r.u32());
  if (s.step_index == 0) return s;
  ScalarField tu = r.grid();
  ScalarField tv = r.grid();
  ScalarField cu = r.grid();
  ScalarField cv = r.grid();
  s.total = VectorField(std::move(tu), std::move(tv));
  s.cached = VectorField(std::move(cu), std::move(cv));
  return s;
}

}  // namespace

std::string serialize(const EvolutionState& state) {
  detail::ByteWriter w;
  w.raw(kStateMagic);
  write_state(w, state);
  return w.take();
}

EvolutionState deserialize_evolution_state(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (r.raw(4) != kStateMagic) throw std::runtime_error("not a serialized evolution state");
  EvolutionState s = read_state(r);
  if (!r.done()) throw std::runtime_error("trailing bytes after evolution state");
  return s;
}

std::string serialize(const Rollout::State& state) {
  detail::ByteWriter w;
  w.raw(kRolloutMagic);
  write_state(w, state.evolution);
  w.grid(state.anchor);
  w.u32(static_cast<std::uint32_t>(state.window.size()));
  for (const auto& f : state.window) w.grid(f);
  return w.take();
}

Rollout::State deserialize_rollout_state(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (r.raw(4) != kRolloutMagic) throw std::runtime_error("not a serialized rollout state");
  Rollout::State s;
  s.evolution = read_state(r);
  s.anchor = r.grid();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) s.window.push_back(r.grid());
  if (!r.done()) throw std::runtime_error("trailing bytes after rollout state");
  return s;
}

Rollout::Rollout(const Sequence& inputs, const MotionEstimator& estimator, const Refiner& refiner, RolloutConfig cfg)
    : estimator_(&estimator), refiner_(&refiner), cfg_(std::move(cfg)), step_hours_(inputs.step_hours) {
  validate_sequence(inputs, 1);
  require_field_shape(inputs.shape(), "rollout");
  cfg_.evolution.validate();
  state_.window = inputs.frames;
  state_.anchor = inputs.frames.back();
}

Rollout::Rollout(State state, const MotionEstimator& estimator, const Refiner& refiner, RolloutConfig cfg)
    : state_(std::move(state)), estimator_(&estimator), refiner_(&refiner), cfg_(std::move(cfg)) {
  cfg_.evolution.validate();
  if (state_.window.empty()) throw std::invalid_argument("rollout: empty window");
}

const RolloutStep& Rollout::step() {
  Sequence window{state_.window, step_hours_};
  last_.interval = estimator_->estimate(window);
  require_same_shape(state_.anchor.shape(), last_.interval.shape(), "rollout estimator output");
  last_.state = compose_step(state_.evolution, last_.interval, cfg_.evolution, cfg_.pad);
  // Only the anchor frame is ever advected; the kernel spans the whole horizon.
  const KernelConfig kernel = cfg_.kernel.scaled(static_cast<double>(last_.state.step_index));
  last_.propagated = advect(state_.anchor, last_.state.total, kernel, cfg_.pad);
  last_.mask = mask_from_flow(last_.state.total, cfg_.thresholds);
  last_.refined = refiner_->refine(last_.propagated, last_.mask);

  state_.evolution = last_.state;
  state_.window.erase(state_.window.begin());
  state_.window.push_back(last_.refined);
  return last_;
}

Sequence rollout(const Sequence& inputs, const MotionEstimator& estimator, const Refiner& refiner, int horizon,
                 const RolloutConfig& cfg, std::vector<RolloutStep>* trace) {
  if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
  Rollout r(inputs, estimator, refiner, cfg);
  Sequence out{{}, inputs.step_hours};
  for (int k = 0; k < horizon; ++k) {
    const RolloutStep& s = r.step();
    out.frames.push_back(s.refined);
    if (trace) trace->push_back(s);
  }
  return out;
}

Sequence chained_rollout(const ScalarField& last, const VectorField& flow, int horizon, const KernelConfig& kernel,
                         PaddingRule pad) {
  if (horizon < 1) throw std::invalid_argument("chained_rollout: horizon must be >= 1");
  Sequence out;
  const ScalarField* prev = &last;
  for (int k = 0; k < horizon; ++k) {
    out.frames.push_back(advect(*prev, flow, kernel, pad));
    prev = &out.frames.back();
  }
  return out;
}

}  // namespace physcast
