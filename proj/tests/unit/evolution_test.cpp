#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "physcast/estimators.hpp"
#include "physcast/evolution.hpp"
#include "physcast/refiners.hpp"
#include "physcast/synth.hpp"
#include "support.hpp"

namespace physcast {
namespace {

using testing::Gen;

// Direct 'same' convolution with zero padding, in double.
std::vector<ScalarField> conv_oracle(const std::vector<ScalarField>& in, const nn::ParamSet<float>& p,
                                     const nn::ConvSpec& s, bool relu) {
  const Shape sh = in[0].shape();
  std::vector<ScalarField> out;
  const int r = s.kernel / 2;
  for (int oc = 0; oc < s.out_channels; ++oc) {
    ScalarField o(sh, p.values[s.bias_offset + oc]);
    for (int y = 0; y < sh.height; ++y)
      for (int x = 0; x < sh.width; ++x) {
        double acc = o(y, x);
        for (int ic = 0; ic < s.in_channels; ++ic)
          for (int ky = 0; ky < s.kernel; ++ky)
            for (int kx = 0; kx < s.kernel; ++kx) {
              const int iy = y + ky - r, ix = x + kx - r;
              if (!in[ic].contains(iy, ix)) continue;
              acc += static_cast<double>(
                         p.values[s.weight_offset + ((oc * s.in_channels + ic) * s.kernel + ky) * s.kernel + kx]) *
                     in[ic](iy, ix);
            }
        o(y, x) = relu ? std::max(0.0, acc) : acc;
      }
    out.push_back(o);
  }
  return out;
}

ConvEvolveParams random_stack(Gen& g, int hidden) {
  ConvEvolveParams p({4, hidden, 2}, "evolve");
  for (float& v : p.params().values) v = static_cast<float>(g.uniform(-0.5, 0.5));
  return p;
}

TEST(Momentum, Examples) {
  Gen g(1);
  const Shape s{3, 4};
  const VectorField cached = g.flow(s, 1.0), interval = g.flow(s, 1.0);
  EXPECT_EQ(evolve_momentum(cached, interval, 0.0), interval);
  EXPECT_EQ(evolve_momentum(cached, interval, 1.0), cached);
  const VectorField m = evolve_momentum(VectorField(s, 1.0, 1.0), VectorField(s), 0.9);
  for (double x : m.u.values()) EXPECT_DOUBLE_EQ(x, 0.9);
}

TEST(Momentum, StaysWithinInputEnvelopeProperty) {
  Gen g(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Shape s = g.shape(2, 6);
    const VectorField a = g.flow(s, 3.0), b = g.flow(s, 3.0);
    const VectorField m = evolve_momentum(a, b, g.uniform(0.0, 1.0));
    for (std::size_t i = 0; i < a.u.size(); ++i) {
      EXPECT_GE(m.u[i], std::min(a.u[i], b.u[i]) - 1e-15);
      EXPECT_LE(m.u[i], std::max(a.u[i], b.u[i]) + 1e-15);
      EXPECT_GE(m.v[i], std::min(a.v[i], b.v[i]) - 1e-15);
      EXPECT_LE(m.v[i], std::max(a.v[i], b.v[i]) + 1e-15);
    }
  }
}

TEST(Momentum, BetaOutsideRangeRejected) {
  const VectorField z({2, 2});
  EXPECT_THROW(evolve_momentum(z, z, 1.5), std::invalid_argument);
  EvolutionConfig cfg;
  cfg.beta = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.beta = 0.5;
  cfg.order = 2;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(ConvEvolve, ZeroWeightsGiveZeroField) {
  Gen g(3);
  const ConvEvolveParams p({4, 8, 2}, "evolve");
  const VectorField out = evolve_conv(g.flow({4, 4}, 1.0), g.flow({4, 4}, 1.0), p);
  for (double x : out.u.values()) EXPECT_EQ(x, 0.0);
  for (double x : out.v.values()) EXPECT_EQ(x, 0.0);
}

// Hidden units carry relu(u), relu(-u), relu(v), relu(-v) through the
// centre taps and the head recombines them.
TEST(ConvEvolve, PassthroughWeightsReturnInterval) {
  ConvEvolveParams p({4, 4, 2}, "evolve");
  auto& w = p.params().values;
  const auto& L = p.layers();
  auto tap = [&](const nn::ConvSpec& s, int oc, int ic, float v) {
    const int c = s.kernel / 2;
    w[s.weight_offset + ((oc * s.in_channels + ic) * s.kernel + c) * s.kernel + c] = v;
  };
  tap(L[0], 0, 0, 1.0f);
  tap(L[0], 1, 0, -1.0f);
  tap(L[0], 2, 1, 1.0f);
  tap(L[0], 3, 1, -1.0f);
  for (int c = 0; c < 4; ++c) tap(L[1], c, c, 1.0f);
  tap(L[2], 0, 0, 1.0f);
  tap(L[2], 0, 1, -1.0f);
  tap(L[2], 1, 2, 1.0f);
  tap(L[2], 1, 3, -1.0f);

  Gen g(4);
  VectorField interval = g.flow({5, 6}, 2.0), cached = g.flow({5, 6}, 2.0);
  for (double& x : interval.u.values()) x = static_cast<float>(x);
  for (double& x : interval.v.values()) x = static_cast<float>(x);
  EXPECT_EQ(evolve_conv(cached, interval, p), interval);
}

TEST(ConvEvolve, RandomWeightsMatchDirectConvolutionOracle) {
  Gen g(5);
  for (int trial = 0; trial < 10; ++trial) {
    const ConvEvolveParams p = random_stack(g, 5);
    const Shape s{4, 4};
    const VectorField cached = g.flow(s, 1.0), interval = g.flow(s, 0.8);
    const VectorField warped = warp_flow(cached, interval);
    const auto h1 = conv_oracle({interval.u, interval.v, warped.u, warped.v}, p.params(), p.layers()[0], true);
    const auto h2 = conv_oracle(h1, p.params(), p.layers()[1], true);
    const auto out = conv_oracle(h2, p.params(), p.layers()[2], false);
    const VectorField got = evolve_conv(cached, interval, p);
    EXPECT_LT(testing::max_abs_diff(got.u, out[0]), 1e-5);
    EXPECT_LT(testing::max_abs_diff(got.v, out[1]), 1e-5);
  }
}

TEST(ComposeStep, FirstCallSeedsBothFields) {
  Gen g(6);
  const VectorField dw = g.flow({4, 4}, 1.0);
  const EvolutionState s = compose_step({}, dw, {});
  EXPECT_EQ(s.total, dw);
  EXPECT_EQ(s.cached, dw);
  EXPECT_EQ(s.step_index, 1);
}

TEST(ComposeStep, UniformFlowAccumulatesLinearlyForAnyBeta) {
  Gen g(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape s{24, 24};
    const double cu = g.uniform(-1, 1), cv = g.uniform(-1, 1);
    EvolutionConfig cfg;
    cfg.beta = g.uniform(0.0, 0.9999);
    EvolutionState st;
    for (int k = 1; k <= 6; ++k) {
      st = compose_step(st, VectorField(s, cu, cv), cfg);
      // Edge padding creeps inward by at most one pixel per step.
      for (int y = 10; y < 14; ++y)
        for (int x = 10; x < 14; ++x) {
          EXPECT_NEAR(st.total.u(y, x), k * cu, 1e-12);
          EXPECT_NEAR(st.total.v(y, x), k * cv, 1e-12);
        }
    }
  }
}

TEST(ComposeStep, ZeroIntervalDecaysCacheAndAddsItToTotal) {
  Gen g(8);
  const Shape s{5, 5};
  EvolutionConfig cfg;
  cfg.beta = 0.8;
  const EvolutionState first = compose_step({}, g.flow(s, 1.0), cfg);
  const EvolutionState next = compose_step(first, VectorField(s), cfg);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_DOUBLE_EQ(next.cached.u[i], 0.8 * first.cached.u[i]);
    EXPECT_DOUBLE_EQ(next.total.u[i], 0.8 * first.cached.u[i] + first.total.u[i]);
    EXPECT_DOUBLE_EQ(next.total.v[i], 0.8 * first.cached.v[i] + first.total.v[i]);
  }
}

TEST(ComposeStep, UpdatesCacheBeforeComposingWithBilinearOracle) {
  Gen g(9);
  const Shape s{6, 6};
  EvolutionConfig cfg;
  cfg.beta = 0.3;
  const EvolutionState first = compose_step({}, g.flow(s, 1.0), cfg);
  const VectorField dw = g.flow(s, 0.9);
  const EvolutionState next = compose_step(first, dw, cfg);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) {
      const double cu = 0.7 * dw.u(y, x) + 0.3 * first.cached.u(y, x);
      const double sx = x - dw.u(y, x), sy = y - dw.v(y, x);
      EXPECT_NEAR(next.total.u(y, x), cu + testing::bilinear_oracle(first.total.u, sx, sy), 1e-14);
    }
}

TEST(EvolutionState, SerializeRoundTrip) {
  Gen g(10);
  EvolutionState s = compose_step({}, g.flow({3, 4}, 1.0), {});
  s = compose_step(s, g.flow({3, 4}, 1.0), {});
  EXPECT_EQ(deserialize_evolution_state(serialize(s)), s);
  EXPECT_EQ(deserialize_evolution_state(serialize(EvolutionState{})), EvolutionState{});
  EXPECT_THROW(deserialize_evolution_state("junk"), std::runtime_error);
}

class ZeroEstimator final : public MotionEstimator {
 public:
  VectorField estimate(const Sequence& w) const override { return VectorField(w.shape()); }
};

// Returns a different random flow on each call and records each window.
class RecordingEstimator final : public MotionEstimator {
 public:
  explicit RecordingEstimator(std::uint64_t seed) : seed_(seed) {}
  VectorField estimate(const Sequence& w) const override {
    windows.push_back(w);
    Gen g(seed_ + windows.size());
    return g.flow(w.shape(), 0.8);
  }
  mutable std::vector<Sequence> windows;

 private:
  std::uint64_t seed_;
};

Sequence random_inputs(Gen& g, int n, Shape s) {
  Sequence seq;
  for (int i = 0; i < n; ++i) seq.frames.push_back(g.field(s, 0.0, 1.0));
  return seq;
}

TEST(Rollout, ZeroFlowRepeatsLastFrame) {
  Gen g(11);
  const Sequence in = random_inputs(g, 3, {6, 6});
  const Sequence out = rollout(in, ZeroEstimator{}, IdentityRefiner{}, 5, {});
  ASSERT_EQ(out.size(), 5u);
  for (const auto& f : out.frames) EXPECT_EQ(f, in.back());
}

TEST(Rollout, SingleStepReducesToRefinedAdvection) {
  Gen g(12);
  const Sequence in = random_inputs(g, 2, {8, 8});
  const RecordingEstimator est(5);
  const RecordingEstimator probe(5);
  RolloutConfig cfg;
  cfg.kernel = {0.2, {}};
  const VectorField dw = probe.estimate(in);
  const Sequence out = rollout(in, est, InpaintRefiner{}, 1, cfg);
  const ScalarField expected = refine_inpaint(advect(in.back(), dw, cfg.kernel), mask_from_flow(dw, cfg.thresholds));
  EXPECT_EQ(out.frames[0], expected);
}

TEST(Rollout, OnlyTheLastObservedFrameIsAdvected) {
  Gen g(13);
  const Sequence in = random_inputs(g, 3, {8, 8});
  const RecordingEstimator est(9);
  RolloutConfig cfg;
  cfg.kernel = {0.1, {}};
  cfg.evolution.beta = 0.5;
  std::vector<RolloutStep> trace;
  const Sequence out = rollout(in, est, InpaintRefiner{}, 4, cfg, &trace);
  ASSERT_EQ(trace.size(), 4u);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    EXPECT_EQ(trace[k].propagated, advect(in.back(), trace[k].state.total, cfg.kernel.scaled(k + 1.0)));
    EXPECT_EQ(trace[k].mask, mask_from_flow(trace[k].state.total, cfg.thresholds));
    EXPECT_EQ(out.frames[k], trace[k].refined);
  }
  // The estimator sees a sliding window where refined predictions fill future slots.
  ASSERT_EQ(est.windows.size(), 4u);
  EXPECT_EQ(est.windows[2].frames.back(), out.frames[1]);
  EXPECT_EQ(est.windows[2].frames.front(), in.frames[2]);
}

TEST(Rollout, ResumingFromSerializedStateReplaysIdentically) {
  Gen g(14);
  const Sequence in = random_inputs(g, 3, {8, 8});
  RolloutConfig cfg;
  cfg.kernel = {0.1, {}};
  cfg.evolution.beta = 0.7;
  const RecordingEstimator a(21), b(21);
  Rollout full(in, a, InpaintRefiner{}, cfg);
  std::vector<ScalarField> straight;
  std::string snapshot;
  for (int k = 0; k < 6; ++k) {
    straight.push_back(full.step().refined);
    if (k == 2) snapshot = serialize(full.state());
  }
  // Same estimator call count so its flow stream lines up.
  for (int k = 0; k < 3; ++k) b.estimate(in);
  Rollout resumed(deserialize_rollout_state(snapshot), b, InpaintRefiner{}, cfg);
  for (int k = 3; k < 6; ++k) EXPECT_EQ(resumed.step().refined, straight[k]);
}

TEST(Rollout, ExactFlowTracksClosedFormSolution) {
  SynthSpec spec;
  spec.blobs = {{24.0, 30.0, 1.0}, {36.0, 28.0, 0.6}};
  spec.sigma0 = 2.5;
  spec.kappa = 0.1;
  spec.flow = {FlowStep::uniform(0.5, -0.5)};
  spec.frames = 12;
  const Sequence seq = synth_sequence(spec);
  Sequence in;
  in.frames.assign(seq.frames.begin(), seq.frames.begin() + 4);
  RolloutConfig cfg;
  cfg.kernel = {spec.kappa, {}};
  cfg.evolution.beta = 0.9;
  const Sequence out =
      rollout(in, ConstantFlowEstimator(spec.flow[0].field({64, 64})), InpaintRefiner{}, 8, cfg);
  for (int k = 0; k < 8; ++k) {
    double mse = 0.0;
    for (std::size_t i = 0; i < out.frames[k].size(); ++i) {
      const double d = out.frames[k][i] - seq.frames[4 + k][i];
      mse += d * d;
    }
    EXPECT_LT(mse / static_cast<double>(out.frames[k].size()), 1e-4) << "step " << k + 1;
  }
}

TEST(Rollout, JumpBeatsChainedOnConstantTranslation) {
  SynthSpec spec;
  spec.height = spec.width = 48;
  spec.blobs = {{16.0, 24.0, 1.0}};
  spec.sigma0 = 2.0;
  spec.flow = {FlowStep::uniform(0.5, 0.0)};
  spec.frames = 9;
  const Sequence seq = synth_sequence(spec);
  const VectorField w = spec.flow[0].field({48, 48});
  Sequence in;
  in.frames = {seq.frames[0]};
  const Sequence jump = rollout(in, ConstantFlowEstimator(w), IdentityRefiner{}, 8, {});
  const Sequence chained = chained_rollout(seq.frames[0], w, 8, {});
  double ej = 0.0, ec = 0.0;
  for (std::size_t i = 0; i < seq.frames[8].size(); ++i) {
    ej += std::pow(jump.frames[7][i] - seq.frames[8][i], 2);
    ec += std::pow(chained.frames[7][i] - seq.frames[8][i], 2);
  }
  EXPECT_LT(ej, ec);
}

TEST(Rollout, BadHorizonRejected) {
  Gen g(15);
  EXPECT_THROW(rollout(random_inputs(g, 2, {4, 4}), ZeroEstimator{}, IdentityRefiner{}, 0, {}), std::invalid_argument);
}

}  // namespace
}  // namespace physcast
