#include "physcast/diff_ops.hpp"

namespace physcast {

namespace {

// Difference along one axis. `n` is the axis length, `at(i)` reads index i.
template <class Read>
double axis_diff(int i, int n, Read at) {
  if (i == 0) return at(1) - at(0);
  if (i == n - 1) return at(n - 1) - at(n - 2);
  return 0.5 * (at(i + 1) - at(i - 1));
}

// Scatters the transpose of axis_diff's stencil for output index i.
template <class Add>
void axis_diff_adjoint(int i, int n, double g, Add add) {
  if (i == 0) {
    add(1, g);
    add(0, -g);
  } else if (i == n - 1) {
    add(n - 1, g);
    add(n - 2, -g);
  } else {
    add(i + 1, 0.5 * g);
    add(i - 1, -0.5 * g);
  }
}

}  // namespace

ScalarField ddx(const ScalarField& f) {
  require_field_shape(f.shape(), "ddx");
  ScalarField out(f.shape());
  const int w = f.width();
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < w; ++x) out(y, x) = axis_diff(x, w, [&](int i) { return f(y, i); });
  return out;
}

ScalarField ddy(const ScalarField& f) {
  require_field_shape(f.shape(), "ddy");
  ScalarField out(f.shape());
  const int h = f.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < f.width(); ++x) out(y, x) = axis_diff(y, h, [&](int i) { return f(i, x); });
  return out;
}

ScalarField ddx_adjoint(const ScalarField& g) {
  require_field_shape(g.shape(), "ddx_adjoint");
  ScalarField out(g.shape());
  const int w = g.width();
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < w; ++x) axis_diff_adjoint(x, w, g(y, x), [&](int i, double v) { out(y, i) += v; });
  return out;
}

ScalarField ddy_adjoint(const ScalarField& g) {
  require_field_shape(g.shape(), "ddy_adjoint");
  ScalarField out(g.shape());
  const int h = g.height();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < g.width(); ++x) axis_diff_adjoint(y, h, g(y, x), [&](int i, double v) { out(i, x) += v; });
  return out;
}

VectorField gradient(const ScalarField& f) { return {ddx(f), ddy(f)}; }

ScalarField divergence(const VectorField& w) { return ddx(w.u) + ddy(w.v); }

}  // namespace physcast
