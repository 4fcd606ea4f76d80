#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "physcast/nn.hpp"

namespace physcast {

// Layout: "PCKP", version byte 0x01, u32 little-endian header length, a
// UTF-8 header, then little-endian float32 parameter values. Header lines:
//   meta <key> <value>
//   param <name> <d0>x<d1>x... <offset>
// where offset counts floats from the start of the payload.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  nn::ParamSet<float> params;
};

inline constexpr std::string_view kCheckpointMagic = "PCKP";
inline constexpr unsigned char kCheckpointVersion = 0x01;

std::string encode_checkpoint(const Checkpoint& ckpt);
// Throws FormatError on malformed input.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Appends every entry of `src` to `dst`, with names unchanged.
void append_params(nn::ParamSet<float>& dst, const nn::ParamSet<float>& src);
// Copies values by name into an existing layout. Throws std::runtime_error
// if an entry is missing or its shape differs.
void assign_params(nn::ParamSet<float>& dst, const nn::ParamSet<float>& src);

}  // namespace physcast
