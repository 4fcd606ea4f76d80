#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "physcast/field.hpp"

namespace physcast {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;
};

// Compares `analytic` against central differences (f(x+h) - f(x-h)) / 2h.
// Per-component error is |a - n| / max(|a|, |n|, guard); the guard keeps
// components whose true derivative is ~0 from dividing by rounding noise.
// Throws std::invalid_argument for step <= 0, std::runtime_error if the
// loss turns non-finite.
GradCheckResult finite_diff_check(const std::function<double(std::span<const double>)>& loss,
                                  std::span<const double> x, std::span<const double> analytic, double step,
                                  double guard = 1e-8);

GradCheckResult finite_diff_check(const std::function<double(const VectorField&)>& loss, const VectorField& w,
                                  const VectorField& analytic, double step, double guard = 1e-8);

}  // namespace physcast
