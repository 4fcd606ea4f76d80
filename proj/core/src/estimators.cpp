#include "physcast/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace physcast {

VectorField estimate_variational(const Sequence& window, const VariationalConfig& cfg, const KernelConfig& kernel,
                                 VariationalTrace* trace) {
  validate_sequence(window, 2);
  const ScalarField& source = window.frames[window.size() - 2];
  const ScalarField& target = window.frames.back();
  require_field_shape(target.shape(), "estimate_variational");
  const ConflictMask mask = full_mask(target.shape());
  const double pixels = static_cast<double>(target.size());

  VectorField w(target.shape());
  LossWithGradient cur = grad_total_loss(target, source, w, mask, cfg.loss, kernel, cfg.pad);
  if (!std::isfinite(cur.loss.total)) throw std::runtime_error("estimate_variational: non-finite initial objective");
  if (trace) {
    trace->accepted_loss = {cur.loss.total};
    trace->accepted_data_term = {cur.loss.mask_term};
    trace->iterations_run = 0;
  }

  // With acceleration the gradient is taken at the extrapolated point
  // w + m (w - w_prev), m = (t - 1) / (t + 2). A rejected step first drops
  // the momentum and only halves the learning rate when already at t = 0.
  // Requiring the data term to fall as well keeps an early overshoot into
  // the regularizers from being accepted.
  VectorField prev = w;
  double lr = cfg.learning_rate;
  int t = 0;
  for (int it = 0; it < cfg.iterations && lr >= cfg.min_learning_rate; ++it) {
    if (trace) trace->iterations_run = it + 1;
    const double m = (cfg.accelerate && t > 0) ? static_cast<double>(t - 1) / (t + 2) : 0.0;
    VectorField trial;
    if (m > 0.0) {
      const VectorField y = w + m * (w - prev);
      const LossWithGradient at_y = grad_total_loss(target, source, y, mask, cfg.loss, kernel, cfg.pad);
      trial = y - (lr * pixels) * at_y.grad;
    } else {
      trial = w - (lr * pixels) * cur.grad;
    }
    LossWithGradient next = grad_total_loss(target, source, trial, mask, cfg.loss, kernel, cfg.pad);
    if (!std::isfinite(next.loss.total))
      throw std::runtime_error("estimate_variational: objective became non-finite at iteration " + std::to_string(it) +
                               " (learning rate " + std::to_string(lr) + ")");
    if (next.loss.total < cur.loss.total && next.loss.mask_term < cur.loss.mask_term) {
      prev = std::move(w);
      w = std::move(trial);
      cur = std::move(next);
      ++t;
      if (trace) {
        trace->accepted_loss.push_back(cur.loss.total);
        trace->accepted_data_term.push_back(cur.loss.mask_term);
      }
    } else if (t > 0) {
      t = 0;
      prev = w;
    } else {
      lr *= 0.5;
    }
  }
  return w;
}

MotionNet make_motion_net(int input_frames, std::array<int, 4> widths, std::uint64_t seed, double head_scale) {
  if (input_frames < 1) throw std::invalid_argument("motion net needs at least one input frame");
  MotionNet net({input_frames, 2, widths}, "motion");
  nn::init_he(net.params(), seed, head_scale);
  return net;
}

nn::Tensor<float> window_tensor(const Sequence& window, int count) {
  if (count < 1 || window.size() < static_cast<std::size_t>(count))
    throw std::invalid_argument("window holds " + std::to_string(window.size()) + " frames, network needs " +
                                std::to_string(count));
  std::vector<const ScalarField*> planes;
  for (std::size_t i = window.size() - count; i < window.size(); ++i) planes.push_back(&window.frames[i]);
  return nn::stack<float>(std::span<const ScalarField* const>(planes));
}

VectorField NetEstimator::estimate(const Sequence& window) const {
  return nn::to_flow(net_->forward(window_tensor(window, input_frames())));
}

}  // namespace physcast
