#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "physcast/interfaces.hpp"
#include "physcast/nn.hpp"
#include "physcast/objective.hpp"
#include "physcast/warp.hpp"

namespace physcast {

// Direct gradient descent on the training objective over the flow:
// minimize total_loss(T_N, advect(T_{N-1}, w), all-ones mask, w).
// Steps act on the gradient of the pixel-summed objective, so the learning
// rate is independent of grid size. A step is accepted only if it lowers
// both the objective and its data term; otherwise it is rejected and the
// learning rate halved.
struct VariationalConfig {
  int iterations = 500;
  double learning_rate = 0.5;
  double min_learning_rate = 1e-6;
  bool accelerate = true;  // Nesterov momentum with restart; false gives plain descent
  LossConfig loss;
  PaddingRule pad;
};

struct VariationalTrace {
  std::vector<double> accepted_loss;       // total objective after each accepted step (index 0 = initial)
  std::vector<double> accepted_data_term;  // matching mask term
  int iterations_run = 0;
};

// Throws std::runtime_error if the objective turns non-finite.
VectorField estimate_variational(const Sequence& window, const VariationalConfig& cfg, const KernelConfig& kernel,
                                 VariationalTrace* trace = nullptr);

class VariationalEstimator final : public MotionEstimator {
 public:
  VariationalEstimator(VariationalConfig cfg, KernelConfig kernel) : cfg_(std::move(cfg)), kernel_(kernel) {}
  VectorField estimate(const Sequence& window) const override { return estimate_variational(window, cfg_, kernel_); }

 private:
  VariationalConfig cfg_;
  KernelConfig kernel_;
};

// Returns the same flow on every call; used with exactly known motion.
class ConstantFlowEstimator final : public MotionEstimator {
 public:
  explicit ConstantFlowEstimator(VectorField flow) : flow_(std::move(flow)) {}
  VectorField estimate(const Sequence&) const override { return flow_; }

 private:
  VectorField flow_;
};

using MotionNet = nn::EncoderDecoder<float>;

// Motion network: N stacked frames in, 2 flow channels out.
MotionNet make_motion_net(int input_frames, std::array<int, 4> widths, std::uint64_t seed, double head_scale = 0.1);

class NetEstimator final : public MotionEstimator {
 public:
  explicit NetEstimator(std::shared_ptr<const MotionNet> net) : net_(std::move(net)) {}
  VectorField estimate(const Sequence& window) const override;
  int input_frames() const { return net_->config().in_channels; }

 private:
  std::shared_ptr<const MotionNet> net_;
};

// Stacks the last `count` frames of the window as network input.
nn::Tensor<float> window_tensor(const Sequence& window, int count);

}  // namespace physcast
