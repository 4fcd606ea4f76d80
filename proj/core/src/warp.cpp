#include "physcast/warp.hpp"

#include <cmath>
#include <stdexcept>

namespace physcast {

int KernelConfig::radius() const {
  if (truncation_radius) return *truncation_radius;
  return static_cast<int>(std::ceil(4.0 * std::sqrt(2.0 * kappa)));
}

KernelConfig KernelConfig::scaled(double factor) const {
  KernelConfig out = *this;
  out.kappa = kappa * factor;
  return out;
}

Stencil gaussian_kernel(const KernelConfig& cfg) {
  if (!(cfg.kappa >= 0.0) || !std::isfinite(cfg.kappa)) throw std::invalid_argument("gaussian_kernel: kappa must be >= 0");
  Stencil k;
  k.radius = cfg.kappa == 0.0 ? 0 : cfg.radius();
  if (k.radius < 0) throw std::invalid_argument("gaussian_kernel: negative truncation radius");
  const int side = k.side();
  k.weights.assign(static_cast<std::size_t>(side) * side, 0.0);
  if (k.radius == 0) {
    k.weights[0] = 1.0;
    return k;
  }
  double total = 0.0;
  for (int dy = -k.radius; dy <= k.radius; ++dy)
    for (int dx = -k.radius; dx <= k.radius; ++dx) {
      const double wgt = std::exp(-static_cast<double>(dx * dx + dy * dy) / (4.0 * cfg.kappa));
      k.weights[static_cast<std::size_t>(dy + k.radius) * side + (dx + k.radius)] = wgt;
      total += wgt;
    }
  for (double& wgt : k.weights) wgt /= total;
  return k;
}

namespace {

// Integer base cell and fractional offsets of a continuous sample point.
struct Cell {
  int x0, y0;
  double fx, fy;
};

Cell locate(double x, double y) {
  const double xf = std::floor(x);
  const double yf = std::floor(y);
  return {static_cast<int>(xf), static_cast<int>(yf), x - xf, y - yf};
}

double read(const ScalarField& f, int y, int x, double pad) { return f.contains(y, x) ? f(y, x) : pad; }

struct Corners {
  double c00, c01, c10, c11;  // c<dy><dx>
};

Corners corners(const ScalarField& f, int y0, int x0, double pad) {
  return {read(f, y0, x0, pad), read(f, y0, x0 + 1, pad), read(f, y0 + 1, x0, pad), read(f, y0 + 1, x0 + 1, pad)};
}

double interpolate(const Corners& c, double fx, double fy) {
  return (1.0 - fy) * ((1.0 - fx) * c.c00 + fx * c.c01) + fy * ((1.0 - fx) * c.c10 + fx * c.c11);
}

// d/dx and d/dy of the bilinear patch.
double interpolate_dx(const Corners& c, double fy) { return (1.0 - fy) * (c.c01 - c.c00) + fy * (c.c11 - c.c10); }
double interpolate_dy(const Corners& c, double fx) { return (1.0 - fx) * (c.c10 - c.c00) + fx * (c.c11 - c.c01); }

void scatter(ScalarField& g, int y0, int x0, double fx, double fy, double value) {
  const auto add = [&](int y, int x, double wgt) {
    if (g.contains(y, x)) g(y, x) += wgt * value;
  };
  add(y0, x0, (1.0 - fx) * (1.0 - fy));
  add(y0, x0 + 1, fx * (1.0 - fy));
  add(y0 + 1, x0, (1.0 - fx) * fy);
  add(y0 + 1, x0 + 1, fx * fy);
}

}  // namespace

double bilinear_sample(const ScalarField& f, double x, double y, PaddingRule pad) {
  const Cell c = locate(x, y);
  return interpolate(corners(f, c.y0, c.x0, pad.value), c.fx, c.fy);
}

ScalarField advect(const ScalarField& f, const VectorField& w, const KernelConfig& cfg, PaddingRule pad) {
  require_same_shape(f.shape(), w.shape(), "advect");
  const Stencil k = gaussian_kernel(cfg);
  ScalarField out(f.shape());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      // Every stencil tap shares the fractional offset of the centre sample.
      const Cell c = locate(x - w.u(y, x), y - w.v(y, x));
      double acc = 0.0;
      for (int dy = -k.radius; dy <= k.radius; ++dy)
        for (int dx = -k.radius; dx <= k.radius; ++dx)
          acc += k(dy, dx) * interpolate(corners(f, c.y0 + dy, c.x0 + dx, pad.value), c.fx, c.fy);
      out(y, x) = acc;
    }
  }
  return out;
}

AdvectGradient advect_backward(const ScalarField& f, const VectorField& w, const KernelConfig& cfg, PaddingRule pad,
                               const ScalarField& upstream) {
  require_same_shape(f.shape(), w.shape(), "advect_backward");
  require_same_shape(f.shape(), upstream.shape(), "advect_backward upstream");
  const Stencil k = gaussian_kernel(cfg);
  AdvectGradient g{ScalarField(f.shape()), VectorField(f.shape())};
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const double up = upstream(y, x);
      if (up == 0.0) continue;
      const Cell c = locate(x - w.u(y, x), y - w.v(y, x));
      double d_sx = 0.0;
      double d_sy = 0.0;
      for (int dy = -k.radius; dy <= k.radius; ++dy) {
        for (int dx = -k.radius; dx <= k.radius; ++dx) {
          const double kw = k(dy, dx);
          const Corners cs = corners(f, c.y0 + dy, c.x0 + dx, pad.value);
          d_sx += kw * interpolate_dx(cs, c.fy);
          d_sy += kw * interpolate_dy(cs, c.fx);
          scatter(g.source, c.y0 + dy, c.x0 + dx, c.fx, c.fy, kw * up);
        }
      }
      // The sample point is p - w(p), hence the sign flip.
      g.flow.u(y, x) = -up * d_sx;
      g.flow.v(y, x) = -up * d_sy;
    }
  }
  return g;
}

VectorField warp_flow(const VectorField& flow, const VectorField& displacement, PaddingRule pad) {
  require_same_shape(flow.shape(), displacement.shape(), "warp_flow");
  const KernelConfig identity{};
  return {advect(flow.u, displacement, identity, pad), advect(flow.v, displacement, identity, pad)};
}

WarpFlowGradient warp_flow_backward(const VectorField& flow, const VectorField& displacement, PaddingRule pad,
                                    const VectorField& upstream) {
  require_same_shape(flow.shape(), displacement.shape(), "warp_flow_backward");
  const KernelConfig identity{};
  AdvectGradient gu = advect_backward(flow.u, displacement, identity, pad, upstream.u);
  AdvectGradient gv = advect_backward(flow.v, displacement, identity, pad, upstream.v);
  return {VectorField(std::move(gu.source), std::move(gv.source)), gu.flow + gv.flow};
}

}  // namespace physcast
