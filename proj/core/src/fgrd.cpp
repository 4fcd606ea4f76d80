#include "physcast/fgrd.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace physcast {

static_assert(std::numeric_limits<float>::is_iec559, "FGRD requires IEEE-754 binary32");

FormatError::FormatError(const std::string& what, std::size_t offset)
    : std::runtime_error("FGRD format error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

}  // namespace

std::string encode_fgrd(const Sequence& seq) {
  validate_sequence(seq, 1);
  const Shape s = seq.shape();
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    for (double x : seq.frames[k].values()) {
      if (!std::isfinite(x) || std::abs(x) > std::numeric_limits<float>::max())
        throw std::invalid_argument("save_field: frame " + std::to_string(k) + " holds a value not representable as finite binary32");
    }
  }

  std::string out;
  out.reserve(kFgrdHeaderBytes + 4 * s.size() * seq.frames.size());
  out.append(kFgrdMagic);
  out.push_back(static_cast<char>(kFgrdVersion));
  put_u32(out, static_cast<std::uint32_t>(seq.frames.size()));
  put_u32(out, static_cast<std::uint32_t>(s.height));
  put_u32(out, static_cast<std::uint32_t>(s.width));
  for (const auto& f : seq.frames)
    for (double x : f.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  return out;
}

Sequence decode_fgrd(std::string_view bytes) {
  if (bytes.size() < 4) throw FormatError("truncated magic", bytes.size());
  if (bytes.substr(0, 4) != kFgrdMagic) throw FormatError("bad magic \"" + std::string(bytes.substr(0, 4)) + "\"", 0);
  if (bytes.size() < 5) throw FormatError("truncated version", bytes.size());
  if (static_cast<std::uint8_t>(bytes[4]) != kFgrdVersion)
    throw FormatError("unsupported version " + std::to_string(static_cast<unsigned char>(bytes[4])), 4);
  if (bytes.size() < kFgrdHeaderBytes) throw FormatError("truncated header", bytes.size());

  const std::uint32_t count = get_u32(bytes, 5);
  const std::uint32_t height = get_u32(bytes, 9);
  const std::uint32_t width = get_u32(bytes, 13);
  if (count == 0) throw FormatError("frame count is zero", 5);
  if (height == 0 || height > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
    throw FormatError("invalid height", 9);
  if (width == 0 || width > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
    throw FormatError("invalid width", 13);

  const std::uint64_t per_frame = static_cast<std::uint64_t>(height) * width;
  const std::uint64_t payload = per_frame * count * 4;
  const std::uint64_t available = bytes.size() - kFgrdHeaderBytes;
  if (available < payload) throw FormatError("truncated payload: expected " + std::to_string(payload) + " bytes", bytes.size());
  if (available > payload) throw FormatError("trailing bytes after payload", kFgrdHeaderBytes + payload);

  Sequence seq;
  seq.frames.reserve(count);
  const Shape s{static_cast<int>(height), static_cast<int>(width)};
  std::size_t at = kFgrdHeaderBytes;
  for (std::uint32_t k = 0; k < count; ++k) {
    ScalarField f(s);
    for (std::size_t i = 0; i < f.size(); ++i, at += 4) {
      const float x = std::bit_cast<float>(get_u32(bytes, at));
      if (!std::isfinite(x)) throw FormatError("non-finite value", at);
      f[i] = x;
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Sequence load_field(const std::filesystem::path& path) { return decode_fgrd(read_file_bytes(path)); }

void save_field(const Sequence& seq, const std::filesystem::path& path) {
  // Encode first so invalid data never truncates an existing file.
  const std::string bytes = encode_fgrd(seq);
  write_file_bytes(path, bytes);
}

void save_flow(const VectorField& w, const std::filesystem::path& path) {
  Sequence seq;
  seq.frames = {w.u, w.v};
  save_field(seq, path);
}

VectorField load_flow(const std::filesystem::path& path) {
  Sequence seq = load_field(path);
  if (seq.frames.size() != 2) throw FormatError("flow file must hold exactly two frames", 5);
  return {std::move(seq.frames[0]), std::move(seq.frames[1])};
}

}  // namespace physcast
