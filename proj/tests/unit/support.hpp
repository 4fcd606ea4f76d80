#pragma once

// Random instance generators and brute-force oracles shared by the unit
// tests. The oracles are written from the textbook definitions and avoid
// the library code paths they check.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "physcast/conflict_mask.hpp"
#include "physcast/field.hpp"

namespace physcast::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  ScalarField field(Shape s, double lo = -1.0, double hi = 1.0) {
    ScalarField f(s);
    for (double& x : f.values()) x = uniform(lo, hi);
    return f;
  }
  VectorField flow(Shape s, double amp) { return {field(s, -amp, amp), field(s, -amp, amp)}; }
  VectorField integer_flow(Shape s, int amp) {
    VectorField w(s);
    for (double& x : w.u.values()) x = integer(-amp, amp);
    for (double& x : w.v.values()) x = integer(-amp, amp);
    return w;
  }
  ConflictMask mask(Shape s, double p_one = 0.7) {
    ConflictMask m(s);
    for (auto& x : m.values()) x = coin(p_one) ? 1 : 0;
    return m;
  }
  Shape shape(int lo, int hi) { return {integer(lo, hi), integer(lo, hi)}; }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Difference along one axis written out index by index.
inline double stencil_d(const ScalarField& f, int y, int x, bool along_x) {
  const int n = along_x ? f.width() : f.height();
  const int i = along_x ? x : y;
  auto at = [&](int j) { return along_x ? f(y, j) : f(j, x); };
  if (i == 0) return at(1) - at(0);
  if (i == n - 1) return at(n - 1) - at(n - 2);
  return 0.5 * (at(i + 1) - at(i - 1));
}

// Bilinear interpolation with out-of-grid corners reading `pad`.
inline double bilinear_oracle(const ScalarField& f, double x, double y, double pad = 0.0) {
  const double fx = std::floor(x), fy = std::floor(y);
  const double tx = x - fx, ty = y - fy;
  auto get = [&](double yy, double xx) {
    const int yi = static_cast<int>(yy), xi = static_cast<int>(xx);
    return f.contains(yi, xi) ? f(yi, xi) : pad;
  };
  return (1 - ty) * ((1 - tx) * get(fy, fx) + tx * get(fy, fx + 1)) +
         ty * ((1 - tx) * get(fy + 1, fx) + tx * get(fy + 1, fx + 1));
}

inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const VectorField& a, const VectorField& b) {
  return std::max(max_abs_diff(a.u, b.u), max_abs_diff(a.v, b.v));
}

// Unnormalized 2D Gaussian sampled on the grid.
inline ScalarField gaussian_blob(Shape s, double cx, double cy, double var, double amp = 1.0) {
  ScalarField f(s);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      f(y, x) = amp * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2.0 * var));
  return f;
}

}  // namespace physcast::testing
