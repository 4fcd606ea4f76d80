#include "physcast/field.hpp"

#include <algorithm>
#include <cmath>

namespace physcast {

std::string to_string(Shape s) { return std::to_string(s.height) + "x" + std::to_string(s.width); }

VectorField::VectorField(ScalarField u_, ScalarField v_) : u(std::move(u_)), v(std::move(v_)) {
  require_same_shape(u.shape(), v.shape(), "VectorField components");
}

Shape Sequence::shape() const {
  if (frames.empty()) throw ShapeError("empty sequence has no shape");
  return frames.front().shape();
}

void require_field_shape(Shape s, const char* what) {
  if (s.height < 2 || s.width < 2)
    throw ShapeError(std::string(what) + ": field must be at least 2x2, got " + to_string(s));
}

void require_same_shape(Shape a, Shape b, const char* what) {
  if (!(a == b)) throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
}

bool all_finite(const ScalarField& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](double x) { return std::isfinite(x); });
}

void require_finite(const ScalarField& f, const char* what) {
  if (!all_finite(f)) throw std::invalid_argument(std::string(what) + ": non-finite value");
}

void validate_sequence(const Sequence& seq, std::size_t min_frames) {
  if (seq.frames.size() < min_frames)
    throw std::invalid_argument("sequence needs at least " + std::to_string(min_frames) + " frames, has " +
                                std::to_string(seq.frames.size()));
  if (seq.frames.empty()) return;
  const Shape s = seq.frames.front().shape();
  for (const auto& f : seq.frames) require_same_shape(s, f.shape(), "sequence frames");
}

namespace {

template <class Op>
ScalarField zip(const ScalarField& a, const ScalarField& b, Op op) {
  require_same_shape(a.shape(), b.shape(), "elementwise");
  ScalarField out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
  return out;
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
ScalarField operator*(double s, const ScalarField& a) {
  ScalarField out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}
VectorField operator+(const VectorField& a, const VectorField& b) { return {a.u + b.u, a.v + b.v}; }
VectorField operator-(const VectorField& a, const VectorField& b) { return {a.u - b.u, a.v - b.v}; }
VectorField operator*(double s, const VectorField& a) { return {s * a.u, s * a.v}; }

ScalarField& operator+=(ScalarField& a, const ScalarField& b) {
  require_same_shape(a.shape(), b.shape(), "elementwise");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

VectorField& operator+=(VectorField& a, const VectorField& b) {
  a.u += b.u;
  a.v += b.v;
  return a;
}

double sum(const ScalarField& f) {
  double s = 0.0;
  for (double x : f.values()) s += x;
  return s;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const VectorField& w) { return std::max(max_abs(w.u), max_abs(w.v)); }

std::vector<double> flatten(const VectorField& w) {
  std::vector<double> out;
  out.reserve(2 * w.u.size());
  out.insert(out.end(), w.u.values().begin(), w.u.values().end());
  out.insert(out.end(), w.v.values().begin(), w.v.values().end());
  return out;
}

VectorField unflatten(std::span<const double> values, Shape s) {
  if (values.size() != 2 * s.size()) throw ShapeError("unflatten: value count does not match " + to_string(s));
  VectorField w(s);
  std::copy(values.begin(), values.begin() + s.size(), w.u.values().begin());
  std::copy(values.begin() + s.size(), values.end(), w.v.values().begin());
  return w;
}

}  // namespace physcast
