#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "physcast/evolution.hpp"
#include "physcast/model.hpp"
#include "physcast/objective.hpp"

namespace physcast {

struct GraphConfig {
  EvolutionConfig evolution;
  KernelConfig kernel;  // diffusion per step
  MaskThresholds thresholds;
  PaddingRule pad;
  LossConfig loss;
  bool use_mask = true;  // false: every pixel trusted
};

// Differentiable stage two inside the graph. forward() is called once per
// step in order; backward(k, g) receives d(loss)/d(output of step k) and
// returns d(loss)/d(propagated of step k).
class GraphRefiner {
 public:
  virtual ~GraphRefiner() = default;
  virtual ScalarField forward(const ScalarField& propagated, const ConflictMask& mask) = 0;
  virtual ScalarField backward(std::size_t step, const ScalarField& grad_output) = 0;
};

struct GraphStep {
  VectorField interval;
  EvolutionState state;
  KernelConfig kernel;
  ScalarField propagated;
  ConflictMask mask;
  ScalarField output;  // refined frame, or propagated without a refiner
  LossBreakdown loss;
};

// Jump-pattern rollout recorded for reverse-mode differentiation. The loss
// is the mean over steps of total_loss(target_k, output_k, mask_k, W_total_k).
// Masks are constants; interval flows are the leaves.
class RolloutGraph {
 public:
  RolloutGraph(ScalarField anchor, GraphConfig cfg, GraphRefiner* refiner = nullptr);

  const GraphStep& step(const VectorField& interval, const ScalarField& target);
  double loss() const;
  std::size_t steps() const { return steps_.size(); }
  const GraphStep& at(std::size_t k) const { return steps_.at(k); }

  // d(loss)/d(interval_k) for every step. Gradients of the conv evolution
  // stack accumulate into evolve_grad when that variant is active.
  std::vector<VectorField> backward(std::span<float> evolve_grad = {}) const;

 private:
  ScalarField anchor_;
  GraphConfig cfg_;
  GraphRefiner* refiner_;
  std::vector<GraphStep> steps_;
  std::vector<ScalarField> targets_;
  std::vector<nn::ConvStackCache<float>> evolve_cache_;  // per step >= 1
};

struct TrainConfig {
  nn::AdamConfig adam;
  int epochs = 50;
  int batch_size = 1;
  std::uint64_t seed = 0;  // window order
  LossConfig loss;
  PaddingRule pad;
  int window_stride = 0;  // 0: non-overlapping windows of N + K frames
};

struct TrainResult {
  Model model;                        // last parameters with a finite loss
  std::vector<double> loss_history;   // mean window loss seen during each epoch
  double initial_loss = 0.0;          // before any update
  double final_loss = 0.0;            // after the last update
  int epochs_run = 0;
  bool diverged = false;
  std::string diagnostic;
};

// Splits each sequence into training windows of N + K frames.
std::vector<Sequence> make_windows(const std::vector<Sequence>& data, int input_frames, int horizon, int stride);

struct WindowGradients {
  std::vector<float> motion;
  std::vector<float> generator;
  std::vector<float> evolve;
};

// Loss of one window (N inputs then K targets). With `grads`, adds the
// gradient of that loss to each trainable component's buffer.
double window_loss(const Model& model, const Sequence& window, const LossConfig& loss, PaddingRule pad,
                   WindowGradients* grads = nullptr);

// Mean window loss over the data with no update.
double dataset_loss(const Model& model, const std::vector<Sequence>& windows, const TrainConfig& cfg);

// Joint training of every network in the model with Adam. Returns early with
// diverged = true (and the last finite-loss parameters) if the loss turns
// non-finite.
TrainResult train(Model model, const std::vector<Sequence>& data, const TrainConfig& cfg);

}  // namespace physcast
