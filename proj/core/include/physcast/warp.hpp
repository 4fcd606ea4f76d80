#pragma once

#include <optional>
#include <vector>

#include "physcast/field.hpp"

namespace physcast {

// Diffusion scale of the propagation kernel. kappa is D*t in pixels^2, so the
// Gaussian has per-axis variance 2*kappa.
struct KernelConfig {
  double kappa = 0.0;
  std::optional<int> truncation_radius;  // default ceil(4 * sqrt(2 * kappa))

  int radius() const;
  // Kernel for a horizon `factor` times longer (kappa grows linearly in t).
  KernelConfig scaled(double factor) const;
};

// Value returned for samples that fall outside the grid.
struct PaddingRule {
  double value = 0.0;
};

// (2r+1) x (2r+1) weights, row-major, centred on (r, r).
struct Stencil {
  int radius = 0;
  std::vector<double> weights;

  int side() const { return 2 * radius + 1; }
  double operator()(int dy, int dx) const {
    return weights[static_cast<std::size_t>(dy + radius) * side() + (dx + radius)];
  }
};

// Sampled Gaussian, renormalized to unit sum. kappa = 0 gives the 1x1 delta.
Stencil gaussian_kernel(const KernelConfig& cfg);

// Bilinear interpolation at continuous (x, y); neighbours outside the grid read `pad`.
double bilinear_sample(const ScalarField& f, double x, double y, PaddingRule pad = {});

// out(p) = sum_o k(o) * f(p - w(p) + o), with f evaluated by bilinear_sample.
// With kappa = 0 this is a plain backward warp.
ScalarField advect(const ScalarField& f, const VectorField& w, const KernelConfig& cfg, PaddingRule pad = {});

struct AdvectGradient {
  ScalarField source;  // d(loss)/d(f)
  VectorField flow;    // d(loss)/d(w)
};

// Reverse-mode derivative of advect given d(loss)/d(out).
AdvectGradient advect_backward(const ScalarField& f, const VectorField& w, const KernelConfig& cfg, PaddingRule pad,
                               const ScalarField& upstream);

// Backward-warps each component of `flow` by `displacement` (bilinear, no diffusion).
VectorField warp_flow(const VectorField& flow, const VectorField& displacement, PaddingRule pad = {});

struct WarpFlowGradient {
  VectorField flow;
  VectorField displacement;
};

WarpFlowGradient warp_flow_backward(const VectorField& flow, const VectorField& displacement, PaddingRule pad,
                                    const VectorField& upstream);

}  // namespace physcast
