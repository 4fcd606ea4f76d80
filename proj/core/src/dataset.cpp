#include "physcast/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "physcast/fgrd.hpp"

namespace physcast {

Stats compute_stats(const std::vector<Sequence>& sequences) {
  double total = 0.0;
  std::size_t n = 0;
  Stats st;
  st.min = std::numeric_limits<double>::infinity();
  st.max = -std::numeric_limits<double>::infinity();
  for (const auto& seq : sequences)
    for (const auto& f : seq.frames)
      for (double x : f.values()) {
        total += x;
        st.min = std::min(st.min, x);
        st.max = std::max(st.max, x);
        ++n;
      }
  if (n == 0) throw std::invalid_argument("compute_stats: no values");
  st.mean = total / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& seq : sequences)
    for (const auto& f : seq.frames)
      for (double x : f.values()) ss += (x - st.mean) * (x - st.mean);
  st.std = std::sqrt(ss / static_cast<double>(n));
  return st;
}

namespace {

void require_positive_std(const Stats& stats) {
  if (!(stats.std > 0.0) || !std::isfinite(stats.std))
    throw std::invalid_argument("normalization requires std > 0");
}

}  // namespace

ScalarField normalize(const ScalarField& f, const Stats& stats) {
  require_positive_std(stats);
  ScalarField out(f.shape());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (f[i] - stats.mean) / stats.std;
  return out;
}

ScalarField denormalize(const ScalarField& f, const Stats& stats) {
  require_positive_std(stats);
  ScalarField out(f.shape());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * stats.std + stats.mean;
  return out;
}

Sequence normalize(const Sequence& seq, const Stats& stats) {
  Sequence out{{}, seq.step_hours};
  for (const auto& f : seq.frames) out.frames.push_back(normalize(f, stats));
  return out;
}

Sequence denormalize(const Sequence& seq, const Stats& stats) {
  Sequence out{{}, seq.step_hours};
  for (const auto& f : seq.frames) out.frames.push_back(denormalize(f, stats));
  return out;
}

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kUnassigned: break;
  }
  return "none";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  if (s == "none" || s.empty()) return Split::kUnassigned;
  throw std::invalid_argument("unknown split '" + s + "'");
}

std::vector<ManifestRecord> DatasetManifest::in_split(Split s) const {
  std::vector<ManifestRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [s](const ManifestRecord& r) { return r.split == s; });
  return out;
}

SplitCounts split_counts(std::size_t n, const SplitFractions& fr) {
  if (n == 0) throw std::invalid_argument("split_dataset: empty manifest");
  if (!(fr.train > 0.0) || !(fr.val >= 0.0) || !(fr.test >= 0.0))
    throw std::invalid_argument("split_dataset: fractions must be non-negative with a positive train share");
  if (std::abs(fr.train + fr.val + fr.test - 1.0) > 1e-9)
    throw std::invalid_argument("split_dataset: fractions must sum to 1");
  // The epsilon absorbs representation error, e.g. 20 * 0.85 = 16.999...
  const auto count = [n](double f) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f + 1e-9));
  };
  SplitCounts c;
  c.train = std::max<std::size_t>(1, count(fr.train));
  c.val = std::min(count(fr.val), n - c.train);
  c.test = n - c.train - c.val;
  return c;
}

DatasetManifest split_dataset(const DatasetManifest& manifest, const SplitFractions& fractions) {
  const SplitCounts c = split_counts(manifest.records.size(), fractions);
  std::vector<std::size_t> order(manifest.records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return manifest.records[a].start_timestamp < manifest.records[b].start_timestamp;
  });
  DatasetManifest out = manifest;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    Split s = Split::kTest;
    if (rank < c.train)
      s = Split::kTrain;
    else if (rank < c.train + c.val)
      s = Split::kVal;
    out.records[order[rank]].split = s;
  }
  return out;
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

DatasetManifest parse_manifest(const std::string& text) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> parts;
    std::stringstream ls(line);
    std::string part;
    while (std::getline(ls, part, ',')) parts.push_back(trim(part));
    if (parts.size() != 3)
      throw std::invalid_argument("manifest line " + std::to_string(lineno) + ": expected path,start_timestamp,split");
    m.records.push_back({parts[0], parts[1], parse_split(parts[2])});
  }
  return m;
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& r : manifest.records) out += r.path + "," + r.start_timestamp + "," + to_string(r.split) + "\n";
  return out;
}

DatasetManifest read_manifest(const std::filesystem::path& path) { return parse_manifest(read_file_bytes(path)); }

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  write_file_bytes(path, format_manifest(manifest));
}

Stats parse_stats(const std::string& text) {
  Stats st;
  bool seen[4] = {false, false, false, false};
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("stats: malformed line '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const double value = std::stod(trim(line.substr(eq + 1)));
    if (key == "mean") st.mean = value, seen[0] = true;
    else if (key == "std") st.std = value, seen[1] = true;
    else if (key == "min") st.min = value, seen[2] = true;
    else if (key == "max") st.max = value, seen[3] = true;
  }
  if (!(seen[0] && seen[1] && seen[2] && seen[3])) throw std::invalid_argument("stats: need mean, std, min and max");
  return st;
}

std::string format_stats(const Stats& stats) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "mean=" << stats.mean << "\nstd=" << stats.std << "\nmin=" << stats.min << "\nmax=" << stats.max << "\n";
  return out.str();
}

Stats read_stats(const std::filesystem::path& path) { return parse_stats(read_file_bytes(path)); }

void write_stats(const Stats& stats, const std::filesystem::path& path) { write_file_bytes(path, format_stats(stats)); }

std::filesystem::path stats_sidecar_path(const std::filesystem::path& manifest_path) {
  auto p = manifest_path;
  p += ".stats";
  return p;
}

SequenceDataset SequenceDataset::open(const std::filesystem::path& manifest_path) {
  SequenceDataset ds;
  ds.manifest = read_manifest(manifest_path);
  ds.root = manifest_path.parent_path();
  const auto sidecar = stats_sidecar_path(manifest_path);
  if (std::filesystem::exists(sidecar)) {
    ds.stats = read_stats(sidecar);
  } else {
    ds.stats = compute_stats(ds.load(Split::kTrain));
  }
  return ds;
}

std::vector<Sequence> SequenceDataset::load(Split split) const {
  std::vector<Sequence> out;
  for (const auto& r : manifest.in_split(split)) {
    std::filesystem::path p = r.path;
    if (p.is_relative()) p = root / p;
    out.push_back(load_field(p));
  }
  return out;
}

}  // namespace physcast
