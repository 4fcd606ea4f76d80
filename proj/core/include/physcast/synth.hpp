#pragma once

#include <cstdint>
#include <vector>

#include "physcast/field.hpp"

namespace physcast {

struct Blob {
  double x = 0.0;  // column of the centre at frame 0
  double y = 0.0;  // row of the centre at frame 0
  double amplitude = 1.0;
};

// Displacement applied between consecutive frames. A uniform step moves
// every point by (u, v); a rotational step turns the plane by `omega`
// radians about (cx, cy).
struct FlowStep {
  enum class Kind { kUniform, kRotational };
  Kind kind = Kind::kUniform;
  double u = 0.0;
  double v = 0.0;
  double omega = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  static FlowStep uniform(double u, double v) { return {Kind::kUniform, u, v, 0.0, 0.0, 0.0}; }
  static FlowStep rotation(double omega, double cx, double cy) { return {Kind::kRotational, 0.0, 0.0, omega, cx, cy}; }

  // Maps a point at frame t to its position at frame t + 1.
  void move(double& x, double& y) const;
  // Per-pixel displacement field of this step (target minus source).
  VectorField field(Shape s) const;
};

// Gaussian blobs evolved by the exact advection-diffusion solution: each
// blob keeps its mass, its centre follows the flow program and its per-axis
// variance grows as sigma0^2 + 2 * kappa * t.
struct SynthSpec {
  int height = 64;
  int width = 64;
  std::vector<Blob> blobs;
  double sigma0 = 2.0;
  std::vector<FlowStep> flow;  // step t uses flow[min(t, size - 1)]; empty means no motion
  double kappa = 0.0;
  int frames = 12;
  double noise = 0.0;  // standard deviation of additive Gaussian noise
  double background = 0.0;
  double step_hours = 6.0;
  double escape_tolerance = 1e-6;  // largest mass fraction allowed outside the grid

  const FlowStep& step(int t) const;
  // Throws std::invalid_argument on bad sizes or a blob leaving the grid.
  void validate() const;
};

// Largest fraction of any blob's mass lying outside the grid over all frames.
double escaped_mass(const SynthSpec& spec);

// Blob centres at frame t, following the flow program.
std::vector<Blob> blob_positions(const SynthSpec& spec, int t);

// Noise-free closed-form frame t.
ScalarField synth_frame(const SynthSpec& spec, int t);

Sequence synth_sequence(const SynthSpec& spec, std::uint64_t seed = 0);

}  // namespace physcast
