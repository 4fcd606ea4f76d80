#include "physcast/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace physcast {

GradCheckResult finite_diff_check(const std::function<double(std::span<const double>)>& loss,
                                  std::span<const double> x, std::span<const double> analytic, double step,
                                  double guard) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("finite_diff_check: step must be > 0");
  if (x.size() != analytic.size()) throw std::invalid_argument("finite_diff_check: gradient size mismatch");
  std::vector<double> probe(x.begin(), x.end());
  GradCheckResult r;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + step;
    const double plus = loss(probe);
    probe[i] = saved - step;
    const double minus = loss(probe);
    probe[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus))
      throw std::runtime_error("finite_diff_check: non-finite loss at component " + std::to_string(i));
    const double numeric = (plus - minus) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), guard});
    const double err = std::abs(analytic[i] - numeric) / denom;
    if (i == 0 || err > r.max_rel_error) r = {err, i, analytic[i], numeric};
  }
  return r;
}

GradCheckResult finite_diff_check(const std::function<double(const VectorField&)>& loss, const VectorField& w,
                                  const VectorField& analytic, double step, double guard) {
  require_same_shape(w.shape(), analytic.shape(), "finite_diff_check");
  const Shape s = w.shape();
  const std::vector<double> x = flatten(w);
  const std::vector<double> a = flatten(analytic);
  return finite_diff_check([&](std::span<const double> p) { return loss(unflatten(p, s)); }, x, a, step, guard);
}

}  // namespace physcast
