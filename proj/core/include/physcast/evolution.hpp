#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "physcast/conflict_mask.hpp"
#include "physcast/field.hpp"
#include "physcast/interfaces.hpp"
#include "physcast/nn.hpp"
#include "physcast/warp.hpp"

namespace physcast {

enum class EvolutionVariant { kMomentum, kConv };

using ConvEvolveParams = nn::ConvStack<float>;

struct EvolutionConfig {
  int order = 1;  // only first-order evolution is supported
  double beta = 0.9999;
  EvolutionVariant variant = EvolutionVariant::kMomentum;
  std::shared_ptr<const ConvEvolveParams> conv;  // required for kConv

  void validate() const;
};

// Jump-pattern state. `total` maps the last observed frame to the current
// step; `cached` is the evolving interval flow (the hidden state).
struct EvolutionState {
  VectorField total;
  VectorField cached;
  int step_index = 0;

  bool operator==(const EvolutionState&) const = default;
};

// (1 - beta) * interval + beta * cached
VectorField evolve_momentum(const VectorField& cached, const VectorField& interval, double beta);

// Conv stack applied to [interval, warp_flow(cached, interval)].
VectorField evolve_conv(const VectorField& cached, const VectorField& interval, const ConvEvolveParams& params,
                        PaddingRule pad = {});

// First call: total = cached = interval. Later calls update `cached` with the
// evolution function, then total = cached + warp_flow(total, interval).
EvolutionState compose_step(const EvolutionState& state, const VectorField& interval, const EvolutionConfig& cfg,
                            PaddingRule pad = {});

std::string serialize(const EvolutionState& state);
EvolutionState deserialize_evolution_state(std::string_view bytes);

struct RolloutConfig {
  EvolutionConfig evolution;
  KernelConfig kernel;  // diffusion over one step
  MaskThresholds thresholds;
  PaddingRule pad;
};

struct RolloutStep {
  VectorField interval;
  EvolutionState state;
  ScalarField propagated;
  ConflictMask mask;
  ScalarField refined;
};

// Resumable jump-pattern rollout. Every prediction is the last observed
// frame advected once by the composed flow, with the kernel widened to the
// elapsed horizon; the estimator sees a sliding window in which refined
// predictions replace future observations.
class Rollout {
 public:
  struct State {
    EvolutionState evolution;
    std::vector<ScalarField> window;
    ScalarField anchor;  // last observed frame
  };

  Rollout(const Sequence& inputs, const MotionEstimator& estimator, const Refiner& refiner, RolloutConfig cfg);
  Rollout(State state, const MotionEstimator& estimator, const Refiner& refiner, RolloutConfig cfg);

  const RolloutStep& step();
  const State& state() const { return state_; }
  int steps_taken() const { return state_.evolution.step_index; }

 private:
  State state_;
  const MotionEstimator* estimator_;
  const Refiner* refiner_;
  RolloutConfig cfg_;
  RolloutStep last_;
  double step_hours_ = 6.0;
};

std::string serialize(const Rollout::State& state);
Rollout::State deserialize_rollout_state(std::string_view bytes);

// Runs `horizon` steps; optionally records each step.
Sequence rollout(const Sequence& inputs, const MotionEstimator& estimator, const Refiner& refiner, int horizon,
                 const RolloutConfig& cfg, std::vector<RolloutStep>* trace = nullptr);

// Baseline: advects each prediction from the previous one with a fixed flow.
Sequence chained_rollout(const ScalarField& last, const VectorField& flow, int horizon, const KernelConfig& kernel,
                         PaddingRule pad = {});

}  // namespace physcast
