#include "physcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace physcast {

void FlowStep::move(double& x, double& y) const {
  if (kind == Kind::kUniform) {
    x += u;
    y += v;
    return;
  }
  const double c = std::cos(omega);
  const double s = std::sin(omega);
  const double dx = x - cx;
  const double dy = y - cy;
  x = cx + c * dx - s * dy;
  y = cy + s * dx + c * dy;
}

VectorField FlowStep::field(Shape s) const {
  // Backward warp pulls from p - w(p), so w(p) is p minus its pre-image.
  FlowStep inverse = *this;
  inverse.u = -u;
  inverse.v = -v;
  inverse.omega = -omega;
  VectorField w(s);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      double px = x;
      double py = y;
      inverse.move(px, py);
      w.u(y, x) = x - px;
      w.v(y, x) = y - py;
    }
  return w;
}

const FlowStep& SynthSpec::step(int t) const {
  return flow[static_cast<std::size_t>(std::min<int>(t, static_cast<int>(flow.size()) - 1))];
}

std::vector<Blob> blob_positions(const SynthSpec& spec, int t) {
  std::vector<Blob> out = spec.blobs;
  if (spec.flow.empty()) return out;
  for (int k = 0; k < t; ++k)
    for (auto& b : out) spec.step(k).move(b.x, b.y);
  return out;
}

namespace {

double variance_at(const SynthSpec& spec, int t) { return spec.sigma0 * spec.sigma0 + 2.0 * spec.kappa * t; }

// Mass fraction of a unit Gaussian (mean m, std s) outside [lo, hi].
double tail_mass(double m, double s, double lo, double hi) {
  const double r = std::sqrt(2.0) * s;
  return 0.5 * std::erfc((m - lo) / r) + 0.5 * std::erfc((hi - m) / r);
}

}  // namespace

double escaped_mass(const SynthSpec& spec) {
  double worst = 0.0;
  for (int t = 0; t < spec.frames; ++t) {
    const double s = std::sqrt(variance_at(spec, t));
    for (const auto& b : blob_positions(spec, t)) {
      const double inside_x = 1.0 - tail_mass(b.x, s, 0.0, spec.width - 1.0);
      const double inside_y = 1.0 - tail_mass(b.y, s, 0.0, spec.height - 1.0);
      worst = std::max(worst, 1.0 - inside_x * inside_y);
    }
  }
  return worst;
}

void SynthSpec::validate() const {
  require_field_shape({height, width}, "synth");
  if (frames < 1) throw std::invalid_argument("synth: frame count must be positive");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("synth: sigma0 must be positive");
  if (!(kappa >= 0.0)) throw std::invalid_argument("synth: kappa must be non-negative");
  if (!(noise >= 0.0)) throw std::invalid_argument("synth: noise must be non-negative");
  const double escaped = escaped_mass(*this);
  if (escaped > escape_tolerance)
    throw std::invalid_argument("synth: a blob leaves the grid (escaped mass fraction " + std::to_string(escaped) +
                                ")");
}

ScalarField synth_frame(const SynthSpec& spec, int t) {
  ScalarField f({spec.height, spec.width}, spec.background);
  const double var = variance_at(spec, t);
  const double scale = spec.sigma0 * spec.sigma0 / var;  // mass conservation
  for (const auto& b : blob_positions(spec, t)) {
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        const double dx = x - b.x;
        const double dy = y - b.y;
        f(y, x) += b.amplitude * scale * std::exp(-(dx * dx + dy * dy) / (2.0 * var));
      }
  }
  return f;
}

Sequence synth_sequence(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Sequence seq{{}, spec.step_hours};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < spec.frames; ++t) {
    ScalarField f = synth_frame(spec, t);
    if (spec.noise > 0.0)
      for (auto& v : f.values()) v += spec.noise * gauss(rng);
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

}  // namespace physcast
