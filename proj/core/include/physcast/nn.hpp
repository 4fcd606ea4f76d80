#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "physcast/field.hpp"

namespace physcast::nn {

// Channel-major activation block: data[(c * height + y) * width + x].
template <class T>
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int c, int h, int w) : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, T{}) {}

  T& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  const T& at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  bool same_shape(const Tensor& o) const { return channels == o.channels && height == o.height && width == o.width; }
};

template <class T>
Tensor<T> stack(std::span<const ScalarField> planes);
template <class T>
Tensor<T> stack(std::span<const ScalarField* const> planes);
template <class T>
ScalarField channel(const Tensor<T>& t, int c);
template <class T>
VectorField to_flow(const Tensor<T>& t);  // channels 0, 1
template <class T>
Tensor<T> from_flow(const VectorField& w);

struct ParamEntry {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t count = 0;
};

// Flat parameter buffer plus a name/shape manifest of its slices.
template <class T>
struct ParamSet {
  std::vector<T> values;
  std::vector<ParamEntry> entries;

  std::size_t add(const std::string& name, std::vector<int> shape);
  std::size_t size() const { return values.size(); }
  const ParamEntry* find(const std::string& name) const;
};

template <class To, class From>
ParamSet<To> convert(const ParamSet<From>& p);

struct ConvSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  std::size_t weight_offset = 0;  // [out][in][k][k]
  std::size_t bias_offset = 0;    // [out]

  int padding() const { return kernel / 2; }
};

ConvSpec add_conv(ParamSet<float>& params, const std::string& name, int in, int out, int kernel, int stride);
ConvSpec add_conv(ParamSet<double>& params, const std::string& name, int in, int out, int kernel, int stride);

template <class T>
Tensor<T> conv_forward(const ConvSpec& spec, std::span<const T> params, const Tensor<T>& input);
// Accumulates into grad_params; returns d(loss)/d(input).
template <class T>
Tensor<T> conv_backward(const ConvSpec& spec, std::span<const T> params, const Tensor<T>& input,
                        const Tensor<T>& grad_output, std::span<T> grad_params);

template <class T>
void relu_inplace(Tensor<T>& t);
// Zeroes gradient where the activation was clipped.
template <class T>
void relu_backward_inplace(const Tensor<T>& activated, Tensor<T>& grad);
template <class T>
Tensor<T> upsample2x(const Tensor<T>& t);
template <class T>
Tensor<T> upsample2x_backward(const Tensor<T>& grad, int height, int width);
template <class T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b);

// He-style fan-in initialization: weights ~ N(0, 2 / fan_in), biases zero.
// Output ("head") layers are further scaled by head_scale.
void init_he(ParamSet<float>& params, std::uint64_t seed, double head_scale = 1.0);

// Encoder-decoder with additive skip connections:
//   enc0 (3x3, s1) -> enc1, enc2, enc3 (3x3, s2) -> dec2, dec1, dec0
//   (nearest 2x upsample, 3x3) each plus the matching encoder activation
//   -> head (1x1, linear).
struct EncoderDecoderConfig {
  int in_channels = 2;
  int out_channels = 2;
  std::array<int, 4> widths{8, 16, 16, 16};
};

template <class T>
struct EncoderDecoderCache {
  Tensor<T> input;
  std::array<Tensor<T>, 4> enc;  // post-ReLU encoder activations a0..a3
  std::array<Tensor<T>, 3> dec;  // post-ReLU decoder activations before the skip add (levels 2, 1, 0)
  std::array<Tensor<T>, 3> sum;  // decoder level outputs after the skip add
  std::array<Tensor<T>, 3> up;   // upsampled inputs to dec convs
  Tensor<T> output;
};

template <class T>
class EncoderDecoder {
 public:
  EncoderDecoder() = default;
  EncoderDecoder(const EncoderDecoderConfig& cfg, const std::string& prefix);

  const EncoderDecoderConfig& config() const { return cfg_; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }

  // Throws ShapeError unless height and width are divisible by 8.
  Tensor<T> forward(const Tensor<T>& input, EncoderDecoderCache<T>* cache = nullptr) const;
  // Accumulates parameter gradients; returns d(loss)/d(input).
  Tensor<T> backward(const EncoderDecoderCache<T>& cache, const Tensor<T>& grad_output, std::span<T> grad_params) const;

  template <class U>
  EncoderDecoder<U> cast() const;

 private:
  template <class>
  friend class EncoderDecoder;

  EncoderDecoderConfig cfg_;
  ParamSet<T> params_;
  std::array<ConvSpec, 4> enc_;
  std::array<ConvSpec, 3> dec_;  // index 0 = deepest (dec2)
  ConvSpec head_;
};

// Motion-evolution stack: 3x3 conv + ReLU, 3x3 conv + ReLU, 1x1 conv.
// Input 4 channels (interval flow, warped cached flow), output 2.
struct ConvStackConfig {
  int in_channels = 4;
  int hidden = 8;
  int out_channels = 2;
};

template <class T>
struct ConvStackCache {
  Tensor<T> input;
  Tensor<T> h1;
  Tensor<T> h2;
};

template <class T>
class ConvStack {
 public:
  ConvStack() = default;
  ConvStack(const ConvStackConfig& cfg, const std::string& prefix);

  const ConvStackConfig& config() const { return cfg_; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }
  const std::array<ConvSpec, 3>& layers() const { return layers_; }

  Tensor<T> forward(const Tensor<T>& input, ConvStackCache<T>* cache = nullptr) const;
  Tensor<T> backward(const ConvStackCache<T>& cache, const Tensor<T>& grad_output, std::span<T> grad_params) const;

 private:
  ConvStackConfig cfg_;
  ParamSet<T> params_;
  std::array<ConvSpec, 3> layers_;
};

// Adaptive-moment optimizer over a flat float buffer.
struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}
  void step(std::span<float> params, std::span<const float> grads);
  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

}  // namespace physcast::nn
