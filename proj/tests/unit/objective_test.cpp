#include <gtest/gtest.h>

#include <cmath>

#include "physcast/gradcheck.hpp"
#include "physcast/objective.hpp"
#include "physcast/warp.hpp"
#include "support.hpp"

namespace physcast {
namespace {

using testing::Gen;

double div_oracle(const VectorField& w) {
  double acc = 0.0;
  for (int y = 0; y < w.height(); ++y)
    for (int x = 0; x < w.width(); ++x) {
      const double d = testing::stencil_d(w.u, y, x, true) + testing::stencil_d(w.v, y, x, false);
      acc += d * d;
    }
  return acc / static_cast<double>(w.u.size());
}

double smooth_oracle(const VectorField& w) {
  double acc = 0.0;
  for (const ScalarField* c : {&w.u, &w.v})
    for (int y = 0; y < w.height(); ++y)
      for (int x = 0; x < w.width(); ++x)
        acc += std::pow(testing::stencil_d(*c, y, x, true), 2) + std::pow(testing::stencil_d(*c, y, x, false), 2);
  return acc / static_cast<double>(w.u.size());
}

double masked_oracle(const ScalarField& t, const ScalarField& p, const ConflictMask& m, double alpha) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) acc += (m[i] ? alpha : 1.0 - alpha) * (t[i] - p[i]) * (t[i] - p[i]);
  return acc / static_cast<double>(t.size());
}

TEST(MaskedMse, Examples) {
  Gen g(1);
  const ScalarField t = g.field({4, 4});
  EXPECT_EQ(masked_mse(t, t, g.mask({4, 4}), 0.9), 0.0);

  const ScalarField p = g.field({4, 4});
  double mse = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) mse += (t[i] - p[i]) * (t[i] - p[i]);
  mse /= 16.0;
  EXPECT_NEAR(masked_mse(t, p, full_mask({4, 4}), 0.9), 0.9 * mse, 1e-15);

  ScalarField a(1, 2), b(1, 2);
  b(0, 0) = 1.0;
  b(0, 1) = 2.0;
  ConflictMask m(1, 2);
  m(0, 0) = 1;
  EXPECT_DOUBLE_EQ(masked_mse(a, b, m, 0.9), 0.65);
}

TEST(MaskedMse, SymmetricNonNegativeAndHalfAlphaMergesProperty) {
  Gen g(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Shape s = g.shape(2, 8);
    const ScalarField t = g.field(s), p = g.field(s);
    const ConflictMask m = g.mask(s);
    const double alpha = g.uniform(0.0, 1.0);
    const double l = masked_mse(t, p, m, alpha);
    EXPECT_GE(l, 0.0);
    EXPECT_EQ(l, masked_mse(p, t, m, alpha));
    EXPECT_NEAR(l, masked_oracle(t, p, m, alpha), 1e-14);
    EXPECT_NEAR(masked_mse(t, p, m, 0.5), 0.5 * masked_mse(t, p, full_mask(s), 1.0), 1e-14);
  }
}

TEST(MaskedMse, ShapeMismatchRejected) {
  EXPECT_THROW(masked_mse(ScalarField(2, 2), ScalarField(2, 3), full_mask({2, 2}), 0.5), ShapeError);
}

TEST(Penalties, Examples) {
  const Shape s{6, 7};
  EXPECT_EQ(divergence_penalty(VectorField(s, 1.5, -0.5)), 0.0);
  EXPECT_EQ(smoothness_penalty(VectorField(s, 1.5, -0.5)), 0.0);
  VectorField rot(s), radial(s), ramp(s);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      rot.u(y, x) = -y;
      rot.v(y, x) = x;
      radial.u(y, x) = x;
      radial.v(y, x) = y;
      ramp.u(y, x) = x;
    }
  EXPECT_EQ(divergence_penalty(rot), 0.0);
  EXPECT_DOUBLE_EQ(divergence_penalty(radial), 4.0);
  EXPECT_DOUBLE_EQ(smoothness_penalty(ramp), 1.0);
}

TEST(Penalties, MatchStencilOraclesProperty) {
  Gen g(3);
  for (int trial = 0; trial < 50; ++trial) {
    const VectorField w = g.flow(g.shape(2, 7), 2.0);
    EXPECT_NEAR(divergence_penalty(w), div_oracle(w), 1e-13);
    EXPECT_NEAR(smoothness_penalty(w), smooth_oracle(w), 1e-13);
  }
}

TEST(Penalties, InvariantUnderConstantOffsetProperty) {
  Gen g(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Shape s = g.shape(2, 7);
    const VectorField w = g.flow(s, 2.0);
    const VectorField shifted = w + VectorField(s, g.uniform(-3, 3), g.uniform(-3, 3));
    EXPECT_NEAR(divergence_penalty(shifted), divergence_penalty(w), 1e-12);
    EXPECT_NEAR(smoothness_penalty(shifted), smoothness_penalty(w), 1e-12);
  }
}

TEST(Penalties, GradientsMatchFiniteDifferencesProperty) {
  Gen g(5);
  for (int trial = 0; trial < 10; ++trial) {
    const VectorField w = g.flow(g.shape(2, 6), 1.0);
    EXPECT_LE(finite_diff_check(divergence_penalty, w, divergence_penalty_grad(w), 1e-4).max_rel_error, 1e-8);
    EXPECT_LE(finite_diff_check(smoothness_penalty, w, smoothness_penalty_grad(w), 1e-4).max_rel_error, 1e-8);
  }
}

TEST(TotalLoss, ZeroCoefficientsGiveZero) {
  Gen g(6);
  const Shape s{5, 5};
  const LossBreakdown b = total_loss(g.field(s), g.field(s), g.mask(s), g.flow(s, 1.0), {0.9, 0.0, 0.0, 0.0});
  EXPECT_EQ(b.total, 0.0);
}

TEST(TotalLoss, PerfectPredictionAndConstantFlowGiveZero) {
  Gen g(7);
  const Shape s{5, 5};
  const ScalarField t = g.field(s);
  EXPECT_EQ(total_loss(t, t, g.mask(s), VectorField(s, 0.3, 0.1), {}).total, 0.0);
}

TEST(TotalLoss, DefaultsWeightComponentOracles) {
  Gen g(8);
  const Shape s{6, 6};
  const ScalarField t = g.field(s), p = g.field(s);
  const ConflictMask m = g.mask(s);
  const VectorField w = g.flow(s, 1.0);
  const LossBreakdown b = total_loss(t, p, m, w, {});
  EXPECT_NEAR(b.mask_term, masked_oracle(t, p, m, 0.9), 1e-14);
  EXPECT_NEAR(b.div_term, div_oracle(w), 1e-13);
  EXPECT_NEAR(b.smooth_term, smooth_oracle(w), 1e-13);
  EXPECT_NEAR(b.total, 1.0 * masked_oracle(t, p, m, 0.9) + 1.0 * div_oracle(w) + 0.4 * smooth_oracle(w), 1e-12);
}

TEST(TotalLoss, BreakdownIdentityProperty) {
  Gen g(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Shape s = g.shape(2, 8);
    const LossConfig cfg{g.uniform(0, 1), g.uniform(0, 3), g.uniform(0, 3), g.uniform(0, 3)};
    const LossBreakdown b = total_loss(g.field(s), g.field(s), g.mask(s), g.flow(s, 2.0), cfg);
    EXPECT_NEAR(b.total, cfg.lambda_lp * b.mask_term + cfg.lambda_div * b.div_term + cfg.lambda_smooth * b.smooth_term,
                1e-9);
    EXPECT_GE(b.mask_term, 0.0);
    EXPECT_GE(b.div_term, 0.0);
    EXPECT_GE(b.smooth_term, 0.0);
  }
}

TEST(TotalLoss, InvalidCoefficientsRejected) {
  EXPECT_THROW((LossConfig{1.5, 1, 1, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((LossConfig{0.5, -1, 1, 1}.validate()), std::invalid_argument);
}

TEST(GradTotalLoss, MatchesFiniteDifferencesOnRandomInstances) {
  Gen g(10);
  for (int trial = 0; trial < 10; ++trial) {
    const Shape s{8, 8};
    const ScalarField src = g.field(s), tgt = g.field(s);
    const VectorField w = g.flow(s, 1.5);
    const ConflictMask m = g.mask(s);
    const KernelConfig k{g.uniform(0.0, 0.5), {}};
    const LossConfig cfg;
    const LossWithGradient lg = grad_total_loss(tgt, src, w, m, cfg, k);
    EXPECT_NEAR(lg.loss.total, total_loss(tgt, advect(src, w, k), m, w, cfg).total, 1e-14);
    const auto r = finite_diff_check(
        [&](const VectorField& x) { return total_loss(tgt, advect(src, x, k), m, x, cfg).total; }, w, lg.grad, 1e-4,
        1e-6);
    EXPECT_LE(r.max_rel_error, 1e-4) << "trial " << trial;
  }
}

TEST(GradTotalLoss, VanishesAtGlobalMinimum) {
  Gen g(11);
  const Shape s{10, 10};
  const ScalarField src = g.field(s);
  const VectorField w(s, 0.3, -0.6);
  const KernelConfig k{0.2, {}};
  const ScalarField tgt = advect(src, w, k);
  const LossWithGradient off = grad_total_loss(tgt, src, w, full_mask(s), {0.9, 1.0, 0.0, 0.0}, k);
  EXPECT_LT(max_abs(off.grad), 1e-8);
  // Uniform flow is also stationary for both regularizers.
  const LossWithGradient on = grad_total_loss(tgt, src, w, g.mask(s), {}, k);
  EXPECT_LT(max_abs(on.grad), 1e-8);
  EXPECT_EQ(max_abs(divergence_penalty_grad(w)), 0.0);
  EXPECT_EQ(max_abs(smoothness_penalty_grad(w)), 0.0);
}

TEST(GradCheck, QuadraticIsExact) {
  Gen g(12);
  std::vector<double> x(12), a(12), grad(12);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = g.uniform(-2, 2);
    a[i] = g.uniform(0.5, 3);
    grad[i] = 2 * a[i] * x[i] + 1.0;
  }
  auto f = [&](std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += a[i] * v[i] * v[i] + v[i];
    return s;
  };
  EXPECT_LT(finite_diff_check(f, x, grad, 1e-3).max_rel_error, 1e-8);
}

TEST(GradCheck, ReportsWrongGradient) {
  std::vector<double> x{1.0, 2.0}, wrong{2.0, 5.0};
  auto f = [](std::span<const double> v) { return v[0] * v[0] + v[1] * v[1]; };
  const GradCheckResult r = finite_diff_check(f, x, wrong, 1e-4);
  EXPECT_GT(r.max_rel_error, 0.1);
  EXPECT_EQ(r.worst_index, 1u);
}

TEST(GradCheck, BadStepAndNonFiniteLossRejected) {
  std::vector<double> x{1.0}, gr{2.0};
  auto f = [](std::span<const double> v) { return v[0] * v[0]; };
  EXPECT_THROW(finite_diff_check(f, x, gr, 0.0), std::invalid_argument);
  auto bad = [](std::span<const double>) { return std::nan(""); };
  EXPECT_THROW(finite_diff_check(bad, x, gr, 1e-3), std::runtime_error);
}

}  // namespace
}  // namespace physcast
