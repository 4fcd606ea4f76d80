#pragma once

#include <cstdint>

#include "physcast/field.hpp"

namespace physcast {

using EnergyField = Grid<double>;
using ConflictMask = Grid<std::uint8_t>;

enum class SplatMode { kBilinear, kNearest };

// Pixels whose received energy is <= tau_low (nothing arrived) or >= tau_high
// (two or more sources collide) are conflicts. tau_low = 0, tau_high = 2 are
// the literal integer thresholds; the defaults tolerate fractional splats.
struct MaskThresholds {
  double tau_low = 0.05;
  double tau_high = 1.75;
  SplatMode splat_mode = SplatMode::kBilinear;

  static MaskThresholds literal() { return {0.0, 2.0, SplatMode::kNearest}; }
  void validate() const;
};

struct SplatResult {
  EnergyField energy;
  double discarded = 0.0;  // energy pushed outside the grid
};

// Each pixel starts with one unit of energy and pushes it to p + w(p).
// Accumulation runs in a fixed raster order, so results are deterministic.
SplatResult splat_energy(const VectorField& w, SplatMode mode = SplatMode::kBilinear);

ConflictMask conflict_mask(const EnergyField& energy, const MaskThresholds& th);

// Convenience: splat then threshold.
ConflictMask mask_from_flow(const VectorField& w, const MaskThresholds& th);

ConflictMask full_mask(Shape s);
ScalarField to_scalar(const ConflictMask& m);
std::size_t count_conflicts(const ConflictMask& m);

}  // namespace physcast
