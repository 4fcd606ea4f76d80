#include "physcast/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace physcast {

double metric_mse(const ScalarField& a, const ScalarField& b) {
  require_same_shape(a.shape(), b.shape(), "metric_mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr_from_mse(double mse, double range) {
  if (!(range > 0.0)) throw std::invalid_argument("psnr: dynamic range must be positive");
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(range * range / mse);
}

double metric_psnr(const ScalarField& a, const ScalarField& b, double range) {
  if (!(range > 0.0)) throw std::invalid_argument("psnr: dynamic range must be positive");
  return psnr_from_mse(metric_mse(a, b), range);
}

double metric_ssim(const ScalarField& a, const ScalarField& b, const SsimConfig& cfg) {
  require_same_shape(a.shape(), b.shape(), "metric_ssim");
  if (cfg.window < 1 || a.height() < cfg.window || a.width() < cfg.window)
    throw ShapeError("metric_ssim: grid " + to_string(a.shape()) + " is smaller than the " +
                     std::to_string(cfg.window) + "x" + std::to_string(cfg.window) + " window");
  if (!(cfg.range > 0.0)) throw std::invalid_argument("metric_ssim: dynamic range must be positive");

  const int n = cfg.window;
  const int half = n / 2;
  std::vector<double> g(static_cast<std::size_t>(n) * n);
  double total = 0.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double dy = y - half;
      const double dx = x - half;
      total += g[static_cast<std::size_t>(y) * n + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * cfg.sigma * cfg.sigma));
    }
  for (auto& w : g) w /= total;

  const double c1 = std::pow(cfg.k1 * cfg.range, 2);
  const double c2 = std::pow(cfg.k2 * cfg.range, 2);
  double acc = 0.0;
  std::size_t count = 0;
  for (int y0 = 0; y0 + n <= a.height(); ++y0)
    for (int x0 = 0; x0 + n <= a.width(); ++x0) {
      double ma = 0.0, mb = 0.0;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const double w = g[static_cast<std::size_t>(y) * n + x];
          ma += w * a(y0 + y, x0 + x);
          mb += w * b(y0 + y, x0 + x);
        }
      double va = 0.0, vb = 0.0, cov = 0.0;
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          const double w = g[static_cast<std::size_t>(y) * n + x];
          const double da = a(y0 + y, x0 + x) - ma;
          const double db = b(y0 + y, x0 + x) - mb;
          va += w * da * da;
          vb += w * db * db;
          cov += w * da * db;
        }
      acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return acc / static_cast<double>(count);
}

double metric_corr(const ScalarField& a, const ScalarField& b) {
  require_same_shape(a.shape(), b.shape(), "metric_corr");
  const double n = static_cast<double>(a.size());
  const double ma = sum(a) / n;
  const double mb = sum(b) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw std::invalid_argument("metric_corr: correlation of a constant field");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace physcast
