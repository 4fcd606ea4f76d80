#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace physcast {

struct Shape {
  int height = 0;
  int width = 0;

  std::size_t size() const { return static_cast<std::size_t>(height) * static_cast<std::size_t>(width); }
  bool operator==(const Shape&) const = default;
};

std::string to_string(Shape s);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major 2D grid. Row index is y, column index is x.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, T fill = T{}) : shape_{height, width} {
    if (height < 1 || width < 1) throw ShapeError("grid dimensions must be positive, got " + to_string(shape_));
    data_.assign(shape_.size(), fill);
  }
  explicit Grid(Shape s, T fill = T{}) : Grid(s.height, s.width, fill) {}
  Grid(Shape s, std::vector<T> values) : shape_(s), data_(std::move(values)) {
    if (s.height < 1 || s.width < 1 || data_.size() != s.size())
      throw ShapeError("grid value count does not match shape " + to_string(s));
  }

  Shape shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int y, int x) { return data_[static_cast<std::size_t>(y) * shape_.width + x]; }
  const T& operator()(int y, int x) const { return data_[static_cast<std::size_t>(y) * shape_.width + x]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool contains(int y, int x) const { return y >= 0 && y < shape_.height && x >= 0 && x < shape_.width; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  Shape shape_{};
  std::vector<T> data_;
};

using ScalarField = Grid<double>;

// Per-pixel displacement in pixels per step: u along x (columns), v along y (rows).
struct VectorField {
  ScalarField u;
  ScalarField v;

  VectorField() = default;
  explicit VectorField(Shape s, double u0 = 0.0, double v0 = 0.0) : u(s, u0), v(s, v0) {}
  VectorField(ScalarField u_, ScalarField v_);

  Shape shape() const { return u.shape(); }
  int height() const { return u.height(); }
  int width() const { return u.width(); }
  bool operator==(const VectorField&) const = default;
};

struct Sequence {
  std::vector<ScalarField> frames;
  double step_hours = 6.0;

  std::size_t size() const { return frames.size(); }
  Shape shape() const;
  const ScalarField& operator[](std::size_t i) const { return frames[i]; }
  const ScalarField& back() const { return frames.back(); }
};

// Throws ShapeError unless the field is at least 2x2.
void require_field_shape(Shape s, const char* what);
void require_same_shape(Shape a, Shape b, const char* what);
// Throws std::invalid_argument if any value is NaN or infinite.
void require_finite(const ScalarField& f, const char* what);
// Frames non-empty and sharing one shape.
void validate_sequence(const Sequence& seq, std::size_t min_frames = 1);

bool all_finite(const ScalarField& f);

// Elementwise helpers used throughout the pipeline.
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);
ScalarField& operator+=(ScalarField& a, const ScalarField& b);
VectorField& operator+=(VectorField& a, const VectorField& b);

double sum(const ScalarField& f);
double max_abs(const ScalarField& f);
double max_abs(const VectorField& w);

// Flat views used by the finite-difference harness: [u..., v...].
std::vector<double> flatten(const VectorField& w);
VectorField unflatten(std::span<const double> values, Shape s);

}  // namespace physcast
