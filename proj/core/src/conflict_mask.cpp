#include "physcast/conflict_mask.hpp"

#include <cmath>
#include <stdexcept>

namespace physcast {

void MaskThresholds::validate() const {
  if (!(tau_low >= 0.0 && tau_low < 1.0 && tau_high > 1.0))
    throw std::invalid_argument("mask thresholds must satisfy 0 <= tau_low < 1 < tau_high");
}

SplatResult splat_energy(const VectorField& w, SplatMode mode) {
  SplatResult r{EnergyField(w.shape(), 0.0), 0.0};
  const auto deposit = [&](int y, int x, double e) {
    if (e == 0.0) return;
    if (r.energy.contains(y, x))
      r.energy(y, x) += e;
    else
      r.discarded += e;
  };
  for (int y = 0; y < w.height(); ++y) {
    for (int x = 0; x < w.width(); ++x) {
      const double tx = x + w.u(y, x);
      const double ty = y + w.v(y, x);
      if (mode == SplatMode::kNearest) {
        deposit(static_cast<int>(std::floor(ty + 0.5)), static_cast<int>(std::floor(tx + 0.5)), 1.0);
        continue;
      }
      const double xf = std::floor(tx);
      const double yf = std::floor(ty);
      const int x0 = static_cast<int>(xf);
      const int y0 = static_cast<int>(yf);
      const double fx = tx - xf;
      const double fy = ty - yf;
      deposit(y0, x0, (1.0 - fx) * (1.0 - fy));
      deposit(y0, x0 + 1, fx * (1.0 - fy));
      deposit(y0 + 1, x0, (1.0 - fx) * fy);
      deposit(y0 + 1, x0 + 1, fx * fy);
    }
  }
  return r;
}

ConflictMask conflict_mask(const EnergyField& energy, const MaskThresholds& th) {
  th.validate();
  ConflictMask m(energy.shape(), 0);
  for (std::size_t i = 0; i < energy.size(); ++i) {
    const double e = energy[i];
    m[i] = (e <= th.tau_low || e >= th.tau_high) ? 0 : 1;
  }
  return m;
}

ConflictMask mask_from_flow(const VectorField& w, const MaskThresholds& th) {
  return conflict_mask(splat_energy(w, th.splat_mode).energy, th);
}

ConflictMask full_mask(Shape s) { return ConflictMask(s, 1); }

ScalarField to_scalar(const ConflictMask& m) {
  ScalarField out(m.shape());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i];
  return out;
}

std::size_t count_conflicts(const ConflictMask& m) {
  std::size_t n = 0;
  for (auto v : m.values()) n += (v == 0);
  return n;
}

}  // namespace physcast
