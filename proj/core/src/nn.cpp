#include "physcast/nn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>

namespace physcast::nn {

template <class T>
Tensor<T> stack(std::span<const ScalarField* const> planes) {
  if (planes.empty()) throw ShapeError("stack: no planes");
  const Shape s = planes.front()->shape();
  Tensor<T> t(static_cast<int>(planes.size()), s.height, s.width);
  for (std::size_t c = 0; c < planes.size(); ++c) {
    require_same_shape(s, planes[c]->shape(), "stack");
    const auto src = planes[c]->values();
    std::transform(src.begin(), src.end(), t.data.begin() + static_cast<std::ptrdiff_t>(c * t.plane()),
                   [](double x) { return static_cast<T>(x); });
  }
  return t;
}

template <class T>
Tensor<T> stack(std::span<const ScalarField> planes) {
  std::vector<const ScalarField*> ptrs;
  for (const auto& p : planes) ptrs.push_back(&p);
  return stack<T>(std::span<const ScalarField* const>(ptrs));
}

template <class T>
ScalarField channel(const Tensor<T>& t, int c) {
  ScalarField f(t.height, t.width);
  const auto begin = t.data.begin() + static_cast<std::ptrdiff_t>(c * t.plane());
  std::transform(begin, begin + static_cast<std::ptrdiff_t>(t.plane()), f.values().begin(),
                 [](T x) { return static_cast<double>(x); });
  return f;
}

template <class T>
VectorField to_flow(const Tensor<T>& t) {
  if (t.channels < 2) throw ShapeError("to_flow: need two channels");
  return {channel(t, 0), channel(t, 1)};
}

template <class T>
Tensor<T> from_flow(const VectorField& w) {
  const ScalarField* planes[2] = {&w.u, &w.v};
  return stack<T>(std::span<const ScalarField* const>(planes));
}

template <class T>
std::size_t ParamSet<T>::add(const std::string& name, std::vector<int> shape) {
  const std::size_t count =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, [](std::size_t a, int b) { return a * b; });
  const std::size_t offset = values.size();
  entries.push_back({name, std::move(shape), offset, count});
  values.resize(offset + count, T{});
  return offset;
}

template <class T>
const ParamEntry* ParamSet<T>::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

template <class To, class From>
ParamSet<To> convert(const ParamSet<From>& p) {
  ParamSet<To> out;
  out.entries = p.entries;
  out.values.assign(p.values.begin(), p.values.end());
  return out;
}

namespace {

template <class T>
ConvSpec add_conv_impl(ParamSet<T>& params, const std::string& name, int in, int out, int kernel, int stride) {
  ConvSpec s;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel = kernel;
  s.stride = stride;
  s.weight_offset = params.add(name + ".weight", {out, in, kernel, kernel});
  s.bias_offset = params.add(name + ".bias", {out});
  return s;
}

int conv_out_size(int n, const ConvSpec& s) { return (n + 2 * s.padding() - s.kernel) / s.stride + 1; }

}  // namespace

ConvSpec add_conv(ParamSet<float>& params, const std::string& name, int in, int out, int kernel, int stride) {
  return add_conv_impl(params, name, in, out, kernel, stride);
}
ConvSpec add_conv(ParamSet<double>& params, const std::string& name, int in, int out, int kernel, int stride) {
  return add_conv_impl(params, name, in, out, kernel, stride);
}

template <class T>
Tensor<T> conv_forward(const ConvSpec& s, std::span<const T> params, const Tensor<T>& in) {
  if (in.channels != s.in_channels) throw ShapeError("conv_forward: channel mismatch");
  const int oh = conv_out_size(in.height, s);
  const int ow = conv_out_size(in.width, s);
  const int pad = s.padding();
  Tensor<T> out(s.out_channels, oh, ow);
  const T* wts = params.data() + s.weight_offset;
  const T* bias = params.data() + s.bias_offset;
  for (int oc = 0; oc < s.out_channels; ++oc) {
    T* dst = out.data.data() + oc * out.plane();
    std::fill(dst, dst + out.plane(), bias[oc]);
    for (int ic = 0; ic < s.in_channels; ++ic) {
      const T* src = in.data.data() + ic * in.plane();
      for (int ky = 0; ky < s.kernel; ++ky) {
        for (int kx = 0; kx < s.kernel; ++kx) {
          const T k = wts[((static_cast<std::size_t>(oc) * s.in_channels + ic) * s.kernel + ky) * s.kernel + kx];
          if (k == T{}) continue;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * s.stride + ky - pad;
            if (iy < 0 || iy >= in.height) continue;
            const T* row = src + static_cast<std::size_t>(iy) * in.width;
            T* orow = dst + static_cast<std::size_t>(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * s.stride + kx - pad;
              if (ix < 0 || ix >= in.width) continue;
              orow[ox] += k * row[ix];
            }
          }
        }
      }
    }
  }
  return out;
}

template <class T>
Tensor<T> conv_backward(const ConvSpec& s, std::span<const T> params, const Tensor<T>& in, const Tensor<T>& gout,
                        std::span<T> gparams) {
  const int oh = gout.height;
  const int ow = gout.width;
  const int pad = s.padding();
  Tensor<T> gin(in.channels, in.height, in.width);
  const T* wts = params.data() + s.weight_offset;
  T* gw = gparams.data() + s.weight_offset;
  T* gb = gparams.data() + s.bias_offset;
  for (int oc = 0; oc < s.out_channels; ++oc) {
    const T* g = gout.data.data() + oc * gout.plane();
    T bsum{};
    for (std::size_t i = 0; i < gout.plane(); ++i) bsum += g[i];
    gb[oc] += bsum;
    for (int ic = 0; ic < s.in_channels; ++ic) {
      const T* src = in.data.data() + ic * in.plane();
      T* gsrc = gin.data.data() + ic * gin.plane();
      for (int ky = 0; ky < s.kernel; ++ky) {
        for (int kx = 0; kx < s.kernel; ++kx) {
          const std::size_t widx = ((static_cast<std::size_t>(oc) * s.in_channels + ic) * s.kernel + ky) * s.kernel + kx;
          const T k = wts[widx];
          T acc{};
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * s.stride + ky - pad;
            if (iy < 0 || iy >= in.height) continue;
            const T* row = src + static_cast<std::size_t>(iy) * in.width;
            T* grow = gsrc + static_cast<std::size_t>(iy) * in.width;
            const T* orow = g + static_cast<std::size_t>(oy) * ow;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * s.stride + kx - pad;
              if (ix < 0 || ix >= in.width) continue;
              acc += orow[ox] * row[ix];
              grow[ix] += k * orow[ox];
            }
          }
          gw[widx] += acc;
        }
      }
    }
  }
  return gin;
}

template <class T>
void relu_inplace(Tensor<T>& t) {
  for (T& x : t.data) x = x > T{} ? x : T{};
}

template <class T>
void relu_backward_inplace(const Tensor<T>& activated, Tensor<T>& grad) {
  for (std::size_t i = 0; i < grad.data.size(); ++i)
    if (!(activated.data[i] > T{})) grad.data[i] = T{};
}

template <class T>
Tensor<T> upsample2x(const Tensor<T>& t) {
  Tensor<T> out(t.channels, 2 * t.height, 2 * t.width);
  for (int c = 0; c < t.channels; ++c)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x) out.at(c, y, x) = t.at(c, y / 2, x / 2);
  return out;
}

template <class T>
Tensor<T> upsample2x_backward(const Tensor<T>& grad, int height, int width) {
  Tensor<T> out(grad.channels, height, width);
  for (int c = 0; c < grad.channels; ++c)
    for (int y = 0; y < grad.height; ++y)
      for (int x = 0; x < grad.width; ++x) out.at(c, y / 2, x / 2) += grad.at(c, y, x);
  return out;
}

template <class T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b) {
  if (!a.same_shape(b)) throw ShapeError("tensor add: shape mismatch");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

void init_he(ParamSet<float>& params, std::uint64_t seed, double head_scale) {
  std::mt19937_64 rng(seed);
  for (const auto& e : params.entries) {
    const bool is_weight = e.name.size() >= 7 && e.name.compare(e.name.size() - 7, 7, ".weight") == 0;
    if (!is_weight) {
      std::fill_n(params.values.begin() + static_cast<std::ptrdiff_t>(e.offset), e.count, 0.0f);
      continue;
    }
    const int fan_in = e.shape.at(1) * e.shape.at(2) * e.shape.at(3);
    const bool is_head = e.name.find("head.") != std::string::npos;
    const double stddev = std::sqrt(2.0 / fan_in) * (is_head ? head_scale : 1.0);
    std::normal_distribution<double> dist(0.0, stddev);
    for (std::size_t i = 0; i < e.count; ++i) params.values[e.offset + i] = static_cast<float>(dist(rng));
  }
}

template <class T>
EncoderDecoder<T>::EncoderDecoder(const EncoderDecoderConfig& cfg, const std::string& prefix) : cfg_(cfg) {
  const auto& c = cfg.widths;
  enc_[0] = add_conv(params_, prefix + ".enc0", cfg.in_channels, c[0], 3, 1);
  enc_[1] = add_conv(params_, prefix + ".enc1", c[0], c[1], 3, 2);
  enc_[2] = add_conv(params_, prefix + ".enc2", c[1], c[2], 3, 2);
  enc_[3] = add_conv(params_, prefix + ".enc3", c[2], c[3], 3, 2);
  dec_[0] = add_conv(params_, prefix + ".dec2", c[3], c[2], 3, 1);
  dec_[1] = add_conv(params_, prefix + ".dec1", c[2], c[1], 3, 1);
  dec_[2] = add_conv(params_, prefix + ".dec0", c[1], c[0], 3, 1);
  head_ = add_conv(params_, prefix + ".head", c[0], cfg.out_channels, 1, 1);
}

template <class T>
Tensor<T> EncoderDecoder<T>::forward(const Tensor<T>& input, EncoderDecoderCache<T>* cache) const {
  if (input.channels != cfg_.in_channels) throw ShapeError("encoder-decoder: input channel mismatch");
  if (input.height % 8 != 0 || input.width % 8 != 0 || input.height == 0 || input.width == 0)
    throw ShapeError("encoder-decoder: spatial shape must be divisible by 8, got " +
                     std::to_string(input.height) + "x" + std::to_string(input.width));
  const std::span<const T> p = params_.values;
  EncoderDecoderCache<T> local;
  EncoderDecoderCache<T>& c = cache ? *cache : local;
  c.input = input;

  const Tensor<T>* prev = &c.input;
  for (int l = 0; l < 4; ++l) {
    c.enc[l] = conv_forward(enc_[l], p, *prev);
    relu_inplace(c.enc[l]);
    prev = &c.enc[l];
  }
  // dec index 0 consumes enc3 and skips to enc2, and so on up to full resolution.
  for (int d = 0; d < 3; ++d) {
    c.up[d] = upsample2x(*prev);
    c.dec[d] = conv_forward(dec_[d], p, c.up[d]);
    relu_inplace(c.dec[d]);
    c.sum[d] = c.dec[d];
    add_inplace(c.sum[d], c.enc[2 - d]);
    prev = &c.sum[d];
  }
  c.output = conv_forward(head_, p, *prev);
  return c.output;
}

template <class T>
Tensor<T> EncoderDecoder<T>::backward(const EncoderDecoderCache<T>& c, const Tensor<T>& grad_output,
                                      std::span<T> gp) const {
  const std::span<const T> p = params_.values;
  std::array<Tensor<T>, 4> g_enc;
  for (int l = 0; l < 4; ++l) g_enc[l] = Tensor<T>(c.enc[l].channels, c.enc[l].height, c.enc[l].width);

  Tensor<T> g = conv_backward(head_, p, c.sum[2], grad_output, gp);
  for (int d = 2; d >= 0; --d) {
    // sum[d] = relu(dec conv) + enc[2 - d]
    add_inplace(g_enc[2 - d], g);
    relu_backward_inplace(c.dec[d], g);
    Tensor<T> g_up = conv_backward(dec_[d], p, c.up[d], g, gp);
    const Tensor<T>& below = d == 0 ? c.enc[3] : c.sum[d - 1];
    g = upsample2x_backward(g_up, below.height, below.width);
  }
  // g now holds d/d(enc3).
  add_inplace(g_enc[3], g);
  Tensor<T> g_in;
  for (int l = 3; l >= 0; --l) {
    relu_backward_inplace(c.enc[l], g_enc[l]);
    const Tensor<T>& in = l == 0 ? c.input : c.enc[l - 1];
    Tensor<T> g_prev = conv_backward(enc_[l], p, in, g_enc[l], gp);
    if (l == 0)
      g_in = std::move(g_prev);
    else
      add_inplace(g_enc[l - 1], g_prev);
  }
  return g_in;
}

template <class T>
template <class U>
EncoderDecoder<U> EncoderDecoder<T>::cast() const {
  EncoderDecoder<U> out;
  out.cfg_ = cfg_;
  out.params_ = convert<U>(params_);
  out.enc_ = enc_;
  out.dec_ = dec_;
  out.head_ = head_;
  return out;
}

template <class T>
ConvStack<T>::ConvStack(const ConvStackConfig& cfg, const std::string& prefix) : cfg_(cfg) {
  layers_[0] = add_conv(params_, prefix + ".conv0", cfg.in_channels, cfg.hidden, 3, 1);
  layers_[1] = add_conv(params_, prefix + ".conv1", cfg.hidden, cfg.hidden, 3, 1);
  layers_[2] = add_conv(params_, prefix + ".head", cfg.hidden, cfg.out_channels, 1, 1);
}

template <class T>
Tensor<T> ConvStack<T>::forward(const Tensor<T>& input, ConvStackCache<T>* cache) const {
  const std::span<const T> p = params_.values;
  ConvStackCache<T> local;
  ConvStackCache<T>& c = cache ? *cache : local;
  c.input = input;
  c.h1 = conv_forward(layers_[0], p, input);
  relu_inplace(c.h1);
  c.h2 = conv_forward(layers_[1], p, c.h1);
  relu_inplace(c.h2);
  return conv_forward(layers_[2], p, c.h2);
}

template <class T>
Tensor<T> ConvStack<T>::backward(const ConvStackCache<T>& c, const Tensor<T>& grad_output, std::span<T> gp) const {
  const std::span<const T> p = params_.values;
  Tensor<T> g = conv_backward(layers_[2], p, c.h2, grad_output, gp);
  relu_backward_inplace(c.h2, g);
  g = conv_backward(layers_[1], p, c.h1, g, gp);
  relu_backward_inplace(c.h1, g);
  return conv_backward(layers_[0], p, c.input, g, gp);
}

void Adam::step(std::span<float> params, std::span<const float> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw std::invalid_argument("Adam: size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] = static_cast<float>(params[i] - cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon));
  }
}

#define PHYSCAST_NN_INSTANTIATE(T)                                                                              \
  template struct ParamSet<T>;                                                                                  \
  template Tensor<T> stack<T>(std::span<const ScalarField>);                                                    \
  template Tensor<T> stack<T>(std::span<const ScalarField* const>);                                             \
  template ScalarField channel<T>(const Tensor<T>&, int);                                                       \
  template VectorField to_flow<T>(const Tensor<T>&);                                                            \
  template Tensor<T> from_flow<T>(const VectorField&);                                                          \
  template Tensor<T> conv_forward<T>(const ConvSpec&, std::span<const T>, const Tensor<T>&);                    \
  template Tensor<T> conv_backward<T>(const ConvSpec&, std::span<const T>, const Tensor<T>&, const Tensor<T>&, \
                                      std::span<T>);                                                            \
  template void relu_inplace<T>(Tensor<T>&);                                                                    \
  template void relu_backward_inplace<T>(const Tensor<T>&, Tensor<T>&);                                         \
  template Tensor<T> upsample2x<T>(const Tensor<T>&);                                                           \
  template Tensor<T> upsample2x_backward<T>(const Tensor<T>&, int, int);                                        \
  template void add_inplace<T>(Tensor<T>&, const Tensor<T>&);                                                   \
  template class EncoderDecoder<T>;                                                                             \
  template class ConvStack<T>;

PHYSCAST_NN_INSTANTIATE(float)
PHYSCAST_NN_INSTANTIATE(double)

#undef PHYSCAST_NN_INSTANTIATE

template ParamSet<double> convert<double, float>(const ParamSet<float>&);
template ParamSet<float> convert<float, double>(const ParamSet<double>&);
template ParamSet<float> convert<float, float>(const ParamSet<float>&);
template EncoderDecoder<double> EncoderDecoder<float>::cast<double>() const;
template EncoderDecoder<float> EncoderDecoder<double>::cast<float>() const;
template EncoderDecoder<float> EncoderDecoder<float>::cast<float>() const;

}  // namespace physcast::nn
