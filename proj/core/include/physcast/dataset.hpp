#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "physcast/field.hpp"

namespace physcast {

struct Stats {
  double mean = 0.0;
  double std = 1.0;
  double min = 0.0;
  double max = 0.0;

  double range() const { return max - min; }
};

Stats compute_stats(const std::vector<Sequence>& sequences);

// (x - mean) / std elementwise. Throws std::invalid_argument if std <= 0.
Sequence normalize(const Sequence& seq, const Stats& stats);
Sequence denormalize(const Sequence& seq, const Stats& stats);
ScalarField normalize(const ScalarField& f, const Stats& stats);
ScalarField denormalize(const ScalarField& f, const Stats& stats);

enum class Split { kUnassigned, kTrain, kVal, kTest };

std::string to_string(Split s);
Split parse_split(const std::string& s);

struct ManifestRecord {
  std::string path;
  std::string start_timestamp;  // ISO-8601; lexicographic order is chronological
  Split split = Split::kUnassigned;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;

  std::vector<ManifestRecord> in_split(Split s) const;
};

struct SplitFractions {
  double train = 0.85;
  double val = 0.05;
  double test = 0.10;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
  bool operator==(const SplitCounts&) const = default;
};

// train = floor(n * train), val = floor(n * val), test = remainder, taken in
// chronological order. A non-empty manifest always keeps at least one
// training sequence, so n = 1 yields (1, 0, 0).
SplitCounts split_counts(std::size_t n, const SplitFractions& fractions);
DatasetManifest split_dataset(const DatasetManifest& manifest, const SplitFractions& fractions);

// One record per line: path,start_timestamp,split
DatasetManifest parse_manifest(const std::string& text);
std::string format_manifest(const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// key=value lines: mean, std, min, max
Stats parse_stats(const std::string& text);
std::string format_stats(const Stats& stats);
Stats read_stats(const std::filesystem::path& path);
void write_stats(const Stats& stats, const std::filesystem::path& path);

// A manifest on disk with its sequences resolved relative to the manifest's directory.
struct SequenceDataset {
  DatasetManifest manifest;
  Stats stats;
  std::filesystem::path root;

  // Loads manifest and, if present, the "<manifest>.stats" sidecar.
  static SequenceDataset open(const std::filesystem::path& manifest_path);
  std::vector<Sequence> load(Split split) const;
};

std::filesystem::path stats_sidecar_path(const std::filesystem::path& manifest_path);

}  // namespace physcast
