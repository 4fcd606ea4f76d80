#pragma once

// Little-endian byte packing shared by the binary containers.

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "physcast/field.hpp"

namespace physcast::detail {

class ByteWriter {
 public:
  void raw(std::string_view s) { out_.append(s); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void grid(const ScalarField& f) {
    u32(static_cast<std::uint32_t>(f.height()));
    u32(static_cast<std::uint32_t>(f.width()));
    for (double x : f.values()) f64(x);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}

  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(at_, n);
    at_ += n;
    return s;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[at_ + i])) << (8 * i);
    at_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[at_ + i])) << (8 * i);
    at_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  ScalarField grid() {
    const int h = static_cast<int>(u32());
    const int w = static_cast<int>(u32());
    ScalarField f(h, w);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = f64();
    return f;
  }
  std::size_t offset() const { return at_; }
  bool done() const { return at_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - at_ < n) throw std::runtime_error("truncated binary data at byte " + std::to_string(at_));
  }

  std::string_view in_;
  std::size_t at_ = 0;
};

}  // namespace physcast::detail
