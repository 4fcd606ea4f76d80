#include "physcast/checkpoint.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bytes.hpp"
#include "physcast/fgrd.hpp"

namespace physcast {

namespace {

std::string shape_text(const std::vector<int>& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
  return s;
}

std::vector<int> parse_shape(const std::string& text, std::size_t offset) {
  std::vector<int> shape;
  std::istringstream is(text);
  std::string part;
  while (std::getline(is, part, 'x')) {
    try {
      std::size_t used = 0;
      const int d = std::stoi(part, &used);
      if (used != part.size() || d < 1) throw std::invalid_argument(part);
      shape.push_back(d);
    } catch (const std::exception&) {
      throw FormatError("checkpoint: bad parameter shape '" + text + "'", offset);
    }
  }
  if (shape.empty()) throw FormatError("checkpoint: empty parameter shape", offset);
  return shape;
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::ostringstream header;
  for (const auto& [k, v] : ckpt.meta) {
    if (k.empty() || k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
      throw std::invalid_argument("checkpoint: metadata key or value contains a separator: " + k);
    header << "meta " << k << " " << v << "\n";
  }
  for (const auto& e : ckpt.params.entries) header << "param " << e.name << " " << shape_text(e.shape) << " " << e.offset << "\n";
  const std::string text = header.str();

  detail::ByteWriter w;
  w.raw(kCheckpointMagic);
  w.raw(std::string(1, static_cast<char>(kCheckpointVersion)));
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw(text);
  for (float v : ckpt.params.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("checkpoint: non-finite parameter value");
    w.f32(v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 9) throw FormatError("checkpoint: truncated header", bytes.size());
  if (bytes.substr(0, 4) != kCheckpointMagic) throw FormatError("checkpoint: bad magic", 0);
  if (static_cast<unsigned char>(bytes[4]) != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version", 4);
  detail::ByteReader r(bytes.substr(5));
  const std::uint32_t header_len = r.u32();
  const std::size_t header_start = 9;
  if (bytes.size() - header_start < header_len) throw FormatError("checkpoint: truncated header", bytes.size());
  const std::string header(bytes.substr(header_start, header_len));
  const std::size_t payload_start = header_start + header_len;

  Checkpoint ckpt;
  std::size_t total = 0;
  std::istringstream lines(header);
  std::string line;
  std::size_t line_offset = header_start;
  while (std::getline(lines, line)) {
    const std::size_t here = line_offset;
    line_offset += line.size() + 1;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string kind, name;
    is >> kind >> name;
    if (kind == "meta") {
      std::string value;
      std::getline(is >> std::ws, value);
      ckpt.meta[name] = value;
    } else if (kind == "param") {
      std::string shape_s;
      std::size_t offset = 0;
      if (!(is >> shape_s >> offset)) throw FormatError("checkpoint: malformed parameter line", here);
      if (ckpt.params.find(name)) throw FormatError("checkpoint: duplicate parameter " + name, here);
      if (offset != total) throw FormatError("checkpoint: parameter " + name + " is not contiguous", here);
      ckpt.params.add(name, parse_shape(shape_s, here));
      total = ckpt.params.size();
    } else {
      throw FormatError("checkpoint: unknown header record '" + kind + "'", here);
    }
  }

  const std::size_t payload = bytes.size() - payload_start;
  if (payload < total * 4) throw FormatError("checkpoint: truncated parameter payload", bytes.size());
  if (payload > total * 4) throw FormatError("checkpoint: trailing bytes after parameters", payload_start + total * 4);
  detail::ByteReader values(bytes.substr(payload_start));
  for (std::size_t i = 0; i < total; ++i) {
    const float v = values.f32();
    if (!std::isfinite(v)) throw FormatError("checkpoint: non-finite parameter value", payload_start + 4 * i);
    ckpt.params.values[i] = v;
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file_bytes(path)); }

void append_params(nn::ParamSet<float>& dst, const nn::ParamSet<float>& src) {
  for (const auto& e : src.entries) {
    if (dst.find(e.name)) throw std::invalid_argument("duplicate parameter name " + e.name);
    const std::size_t off = dst.add(e.name, e.shape);
    std::copy_n(src.values.begin() + static_cast<std::ptrdiff_t>(e.offset), e.count,
                dst.values.begin() + static_cast<std::ptrdiff_t>(off));
  }
}

void assign_params(nn::ParamSet<float>& dst, const nn::ParamSet<float>& src) {
  for (const auto& e : dst.entries) {
    const nn::ParamEntry* s = src.find(e.name);
    if (!s) throw std::runtime_error("checkpoint lacks parameter " + e.name);
    if (s->shape != e.shape)
      throw std::runtime_error("parameter " + e.name + " has shape " + shape_text(s->shape) + ", expected " +
                               shape_text(e.shape));
    std::copy_n(src.values.begin() + static_cast<std::ptrdiff_t>(s->offset), e.count,
                dst.values.begin() + static_cast<std::ptrdiff_t>(e.offset));
  }
}

}  // namespace physcast
