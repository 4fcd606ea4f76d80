#pragma once

#include "physcast/conflict_mask.hpp"
#include "physcast/field.hpp"

namespace physcast {

// Produces the interval flow for the next step from the most recent frames.
class MotionEstimator {
 public:
  virtual ~MotionEstimator() = default;
  virtual VectorField estimate(const Sequence& window) const = 0;
};

// Second stage: repairs the propagated frame where the mask marks conflicts.
class Refiner {
 public:
  virtual ~Refiner() = default;
  virtual ScalarField refine(const ScalarField& propagated, const ConflictMask& mask) const = 0;
};

}  // namespace physcast
