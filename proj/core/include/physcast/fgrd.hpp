#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "physcast/field.hpp"

namespace physcast {

// FGRD layout (all integers little-endian):
//   offset 0   "FGRD"
//   offset 4   version byte 0x01
//   offset 5   u32 frame count, u32 height, u32 width
//   offset 17  frame-major, row-major IEEE-754 binary32 values
inline constexpr std::string_view kFgrdMagic = "FGRD";
inline constexpr std::uint8_t kFgrdVersion = 0x01;
inline constexpr std::size_t kFgrdHeaderBytes = 17;

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Values are narrowed to binary32; fields must be finite.
std::string encode_fgrd(const Sequence& seq);
Sequence decode_fgrd(std::string_view bytes);

Sequence load_field(const std::filesystem::path& path);
void save_field(const Sequence& seq, const std::filesystem::path& path);

// Convenience for single vector fields: written as a two-frame file (u, v).
void save_flow(const VectorField& w, const std::filesystem::path& path);
VectorField load_flow(const std::filesystem::path& path);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace physcast
