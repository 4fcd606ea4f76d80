#include "physcast/objective.hpp"

#include <stdexcept>

#include "physcast/diff_ops.hpp"

namespace physcast {

void LossConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("loss: alpha must lie in [0, 1]");
  if (!(lambda_lp >= 0.0 && lambda_div >= 0.0 && lambda_smooth >= 0.0))
    throw std::invalid_argument("loss: lambda coefficients must be non-negative");
}

namespace {

double pixel_weight(std::uint8_t m, double alpha) { return m ? alpha : 1.0 - alpha; }

void check_loss_shapes(const ScalarField& target, const ScalarField& predicted, const ConflictMask& mask) {
  require_same_shape(target.shape(), predicted.shape(), "masked_mse");
  require_same_shape(target.shape(), mask.shape(), "masked_mse mask");
}

}  // namespace

double masked_mse(const ScalarField& target, const ScalarField& predicted, const ConflictMask& mask, double alpha) {
  check_loss_shapes(target, predicted, mask);
  double acc = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double e = target[i] - predicted[i];
    acc += pixel_weight(mask[i], alpha) * e * e;
  }
  return acc / static_cast<double>(target.size());
}

ScalarField masked_mse_grad(const ScalarField& target, const ScalarField& predicted, const ConflictMask& mask,
                            double alpha) {
  check_loss_shapes(target, predicted, mask);
  ScalarField g(target.shape());
  const double scale = 2.0 / static_cast<double>(target.size());
  for (std::size_t i = 0; i < target.size(); ++i)
    g[i] = -scale * pixel_weight(mask[i], alpha) * (target[i] - predicted[i]);
  return g;
}

double divergence_penalty(const VectorField& w) {
  const ScalarField d = divergence(w);
  double acc = 0.0;
  for (double x : d.values()) acc += x * x;
  return acc / static_cast<double>(d.size());
}

VectorField divergence_penalty_grad(const VectorField& w) {
  const ScalarField d = divergence(w);
  const double scale = 2.0 / static_cast<double>(d.size());
  return {scale * ddx_adjoint(d), scale * ddy_adjoint(d)};
}

double smoothness_penalty(const VectorField& w) {
  double acc = 0.0;
  for (const ScalarField* c : {&w.u, &w.v}) {
    const ScalarField gx = ddx(*c);
    const ScalarField gy = ddy(*c);
    for (double x : gx.values()) acc += x * x;
    for (double x : gy.values()) acc += x * x;
  }
  return acc / static_cast<double>(w.u.size());
}

VectorField smoothness_penalty_grad(const VectorField& w) {
  const double scale = 2.0 / static_cast<double>(w.u.size());
  const auto component = [&](const ScalarField& c) { return scale * (ddx_adjoint(ddx(c)) + ddy_adjoint(ddy(c))); };
  return {component(w.u), component(w.v)};
}

LossBreakdown total_loss(const ScalarField& target, const ScalarField& predicted, const ConflictMask& mask,
                         const VectorField& w, const LossConfig& cfg) {
  cfg.validate();
  require_same_shape(target.shape(), w.shape(), "total_loss flow");
  LossBreakdown b;
  b.mask_term = masked_mse(target, predicted, mask, cfg.alpha);
  b.div_term = divergence_penalty(w);
  b.smooth_term = smoothness_penalty(w);
  b.total = cfg.lambda_lp * b.mask_term + cfg.lambda_div * b.div_term + cfg.lambda_smooth * b.smooth_term;
  return b;
}

LossWithGradient grad_total_loss(const ScalarField& target, const ScalarField& source, const VectorField& w,
                                 const ConflictMask& mask, const LossConfig& cfg, const KernelConfig& kcfg,
                                 PaddingRule pad) {
  LossWithGradient r;
  r.predicted = advect(source, w, kcfg, pad);
  r.loss = total_loss(target, r.predicted, mask, w, cfg);

  const ScalarField d_pred = cfg.lambda_lp * masked_mse_grad(target, r.predicted, mask, cfg.alpha);
  r.grad = advect_backward(source, w, kcfg, pad, d_pred).flow;
  if (cfg.lambda_div != 0.0) r.grad += cfg.lambda_div * divergence_penalty_grad(w);
  if (cfg.lambda_smooth != 0.0) r.grad += cfg.lambda_smooth * smoothness_penalty_grad(w);
  return r;
}

}  // namespace physcast
