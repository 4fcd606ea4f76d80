#pragma once

#include <filesystem>
#include <string>

#include "physcast/conflict_mask.hpp"
#include "physcast/field.hpp"

namespace physcast {

// Binary 8-bit grayscale PGM (P5), values mapped linearly from [lo, hi] to
// [0, 255] and clamped.
std::string encode_pgm(const ScalarField& f, double lo, double hi);
// Uses the field's own min and max.
std::string encode_pgm(const ScalarField& f);
std::string encode_pgm(const ConflictMask& m);

void write_pgm(const std::filesystem::path& path, const ScalarField& f, double lo, double hi);
void write_pgm(const std::filesystem::path& path, const ConflictMask& m);

}  // namespace physcast
