#include "physcast/image_dump.hpp"

#include <algorithm>
#include <cmath>

#include "physcast/fgrd.hpp"

namespace physcast {

std::string encode_pgm(const ScalarField& f, double lo, double hi) {
  std::string out = "P5\n" + std::to_string(f.width()) + " " + std::to_string(f.height()) + "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (double v : f.values()) {
    const double t = std::clamp((v - lo) / span, 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
  }
  return out;
}

std::string encode_pgm(const ScalarField& f) {
  const auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
  return encode_pgm(f, *lo, *hi);
}

std::string encode_pgm(const ConflictMask& m) { return encode_pgm(to_scalar(m), 0.0, 1.0); }

void write_pgm(const std::filesystem::path& path, const ScalarField& f, double lo, double hi) {
  write_file_bytes(path, encode_pgm(f, lo, hi));
}

void write_pgm(const std::filesystem::path& path, const ConflictMask& m) { write_file_bytes(path, encode_pgm(m)); }

}  // namespace physcast
