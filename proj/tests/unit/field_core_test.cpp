#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <set>
#include <string>

#include "physcast/dataset.hpp"
#include "physcast/diff_ops.hpp"
#include "physcast/fgrd.hpp"
#include "support.hpp"

namespace physcast {
namespace {

using testing::Gen;

std::string le32(std::uint32_t v) {
  std::string s(4, '\0');
  for (int i = 0; i < 4; ++i) s[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  return s;
}

std::string f32(float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  return le32(bits);
}

Sequence random_sequence(Gen& g, int frames, Shape s) {
  Sequence seq;
  for (int i = 0; i < frames; ++i) {
    ScalarField f = g.field(s, -300.0, 300.0);
    // Values that survive the binary32 narrowing unchanged.
    for (double& x : f.values()) x = static_cast<float>(x);
    seq.frames.push_back(f);
  }
  return seq;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("physcast_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST(Fgrd, HandAssembledZerosDecode) {
  std::string bytes = "FGRD";
  bytes += '\x01';
  bytes += le32(2) + le32(3) + le32(3);
  for (int i = 0; i < 18; ++i) bytes += f32(0.0f);
  const Sequence seq = decode_fgrd(bytes);
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_EQ(seq.shape(), (Shape{3, 3}));
  for (const auto& f : seq.frames)
    for (double x : f.values()) EXPECT_EQ(x, 0.0);
}

TEST(Fgrd, EncodedLayoutMatchesByteSpec) {
  Sequence seq;
  ScalarField f(2, 2);
  f(0, 0) = 1.5;
  f(0, 1) = -2.0;
  f(1, 0) = 0.25;
  f(1, 1) = 8.0;
  seq.frames.push_back(f);
  const std::string bytes = encode_fgrd(seq);
  std::string expected = std::string("FGRD") + '\x01' + le32(1) + le32(2) + le32(2);
  expected += f32(1.5f) + f32(-2.0f) + f32(0.25f) + f32(8.0f);
  EXPECT_EQ(bytes, expected);
}

TEST(Fgrd, ZerosOneByTwoByTwoHasHeaderPlusSixteenPayloadBytes) {
  Sequence seq;
  seq.frames.push_back(ScalarField(2, 2));
  EXPECT_EQ(encode_fgrd(seq).size(), 17u + 16u);
}

TEST(Fgrd, BadMagicIsFormatErrorAtOffsetZero) {
  Sequence seq;
  seq.frames.push_back(ScalarField(2, 2));
  std::string bytes = encode_fgrd(seq);
  bytes[0] = 'X';
  try {
    decode_fgrd(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Fgrd, TruncatedPayloadAndTrailingBytesRejected) {
  Sequence seq;
  seq.frames.push_back(ScalarField(3, 2));
  const std::string bytes = encode_fgrd(seq);
  EXPECT_THROW(decode_fgrd(bytes.substr(0, bytes.size() - 1)), FormatError);
  EXPECT_THROW(decode_fgrd(bytes.substr(0, 10)), FormatError);
  EXPECT_THROW(decode_fgrd(bytes + "x"), FormatError);
}

TEST(Fgrd, NonFiniteValueOnDiskReportsItsOffset) {
  std::string bytes = std::string("FGRD") + '\x01' + le32(1) + le32(2) + le32(2);
  bytes += f32(0.0f) + f32(0.0f) + f32(std::numeric_limits<float>::quiet_NaN()) + f32(0.0f);
  try {
    decode_fgrd(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 17u + 8u);
  }
}

TEST(Fgrd, NanRejectedBeforeWrite) {
  Sequence seq;
  seq.frames.push_back(ScalarField(2, 2));
  seq.frames[0](1, 1) = std::nan("");
  EXPECT_THROW(encode_fgrd(seq), std::invalid_argument);
}

TEST_F(TempDir, SaveLoadRoundTripIsBitExactForRandomSequences) {
  Gen g(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Sequence seq = random_sequence(g, g.integer(1, 4), g.shape(2, 9));
    const auto path = dir_ / "seq.fgrd";
    save_field(seq, path);
    const Sequence back = load_field(path);
    ASSERT_EQ(back.size(), seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k) EXPECT_EQ(back.frames[k], seq.frames[k]);
    // Saving what was loaded reproduces the same bytes.
    const std::string first = read_file_bytes(path);
    save_field(back, dir_ / "again.fgrd");
    EXPECT_EQ(read_file_bytes(dir_ / "again.fgrd"), first);
  }
}

TEST_F(TempDir, FlowRoundTrip) {
  Gen g(3);
  VectorField w = g.flow({4, 5}, 2.0);
  for (double& x : w.u.values()) x = static_cast<float>(x);
  for (double& x : w.v.values()) x = static_cast<float>(x);
  save_flow(w, dir_ / "w.fgrd");
  EXPECT_EQ(load_flow(dir_ / "w.fgrd"), w);
}

TEST(Fgrd, MissingFileIsIoError) { EXPECT_THROW(load_field("/nonexistent/physcast.fgrd"), IoError); }

TEST(Normalize, ExamplesEvaluateDirectly) {
  Sequence seq;
  ScalarField f(1, 2);
  // One-row fields are fine for normalization even though operators need 2x2.
  f(0, 0) = 270.0;
  f(0, 1) = 280.0;
  seq.frames.push_back(f);
  const Sequence n = normalize(seq, {275.0, 5.0, 270.0, 280.0});
  EXPECT_DOUBLE_EQ(n.frames[0](0, 0), -1.0);
  EXPECT_DOUBLE_EQ(n.frames[0](0, 1), 1.0);

  const ScalarField c(3, 3, 4.0);
  const ScalarField zc = normalize(c, {4.0, 2.0, 0.0, 0.0});
  for (double x : zc.values()) EXPECT_EQ(x, 0.0);
  Gen g(1);
  const ScalarField r = g.field({3, 4});
  EXPECT_EQ(normalize(r, {0.0, 1.0, 0.0, 0.0}), r);
}

TEST(Normalize, ZeroStdRejected) {
  EXPECT_THROW(normalize(ScalarField(2, 2), {0.0, 0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST(Normalize, InverseRestoresInputProperty) {
  Gen g(5);
  for (int trial = 0; trial < 50; ++trial) {
    const ScalarField f = g.field(g.shape(2, 8), -400.0, 400.0);
    const Stats st{g.uniform(-300, 300), g.uniform(0.01, 50.0), 0.0, 0.0};
    const ScalarField back = denormalize(normalize(f, st), st);
    for (std::size_t i = 0; i < f.size(); ++i)
      EXPECT_LE(std::abs(back[i] - f[i]), 1e-6 * std::max(1.0, std::abs(f[i])));
  }
}

TEST(Stats, MatchTwoPassOracle) {
  Gen g(2);
  std::vector<Sequence> seqs{random_sequence(g, 3, {4, 4}), random_sequence(g, 2, {4, 4})};
  double sum = 0, n = 0, lo = 1e300, hi = -1e300;
  for (const auto& s : seqs)
    for (const auto& f : s.frames)
      for (double x : f.values()) sum += x, n += 1, lo = std::min(lo, x), hi = std::max(hi, x);
  const double mean = sum / n;
  double ss = 0;
  for (const auto& s : seqs)
    for (const auto& f : s.frames)
      for (double x : f.values()) ss += (x - mean) * (x - mean);
  const Stats st = compute_stats(seqs);
  EXPECT_NEAR(st.mean, mean, 1e-12 * std::abs(mean) + 1e-12);
  EXPECT_NEAR(st.std, std::sqrt(ss / n), 1e-9);
  EXPECT_EQ(st.min, lo);
  EXPECT_EQ(st.max, hi);
  const Stats back = parse_stats(format_stats(st));
  EXPECT_EQ(back.mean, st.mean);
  EXPECT_EQ(back.std, st.std);
  EXPECT_EQ(back.min, st.min);
  EXPECT_EQ(back.max, st.max);
}

TEST(DiffOps, ConstantFieldHasZeroGradient) {
  const VectorField g = gradient(ScalarField(5, 6, 3.25));
  for (double x : g.u.values()) EXPECT_EQ(x, 0.0);
  for (double x : g.v.values()) EXPECT_EQ(x, 0.0);
}

TEST(DiffOps, LinearRampHasUnitSlope) {
  ScalarField f(5, 7);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) f(y, x) = x;
  const VectorField g = gradient(f);
  for (double v : g.u.values()) EXPECT_DOUBLE_EQ(v, 1.0);  // one-sided edges are exact on a line too
  for (double v : g.v.values()) EXPECT_EQ(v, 0.0);
}

TEST(DiffOps, RandomFieldMatchesStencilOracle) {
  Gen g(7);
  for (int trial = 0; trial < 20; ++trial) {
    const ScalarField f = g.field(g.shape(2, 7));
    const VectorField d = gradient(f);
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x) {
        EXPECT_DOUBLE_EQ(d.u(y, x), testing::stencil_d(f, y, x, true));
        EXPECT_DOUBLE_EQ(d.v(y, x), testing::stencil_d(f, y, x, false));
      }
  }
}

TEST(DiffOps, DivergenceExamples) {
  const Shape s{6, 6};
  const ScalarField d0 = divergence(VectorField(s, 0.3, -2.0));
  for (double x : d0.values()) EXPECT_EQ(x, 0.0);
  VectorField rot(s), radial(s);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) {
      rot.u(y, x) = -y;
      rot.v(y, x) = x;
      radial.u(y, x) = x;
      radial.v(y, x) = y;
    }
  for (int y = 1; y < 5; ++y)
    for (int x = 1; x < 5; ++x) {
      EXPECT_DOUBLE_EQ(divergence(rot)(y, x), 0.0);
      EXPECT_DOUBLE_EQ(divergence(radial)(y, x), 2.0);
    }
}

TEST(DiffOps, DivergenceOfGradientMatchesComposedStencil) {
  Gen g(8);
  for (int trial = 0; trial < 20; ++trial) {
    const ScalarField f = g.field(g.shape(2, 7));
    ScalarField gx(f.shape()), gy(f.shape());
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x) {
        gx(y, x) = testing::stencil_d(f, y, x, true);
        gy(y, x) = testing::stencil_d(f, y, x, false);
      }
    const ScalarField lap = divergence(gradient(f));
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x)
        EXPECT_EQ(lap(y, x), testing::stencil_d(gx, y, x, true) + testing::stencil_d(gy, y, x, false));
  }
}

TEST(DiffOps, AdjointsSatisfyInnerProductIdentity) {
  Gen g(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape s = g.shape(2, 7);
    const ScalarField a = g.field(s), b = g.field(s);
    double lx = 0, rx = 0, ly = 0, ry = 0;
    const ScalarField dxa = ddx(a), dya = ddy(a), axb = ddx_adjoint(b), ayb = ddy_adjoint(b);
    for (std::size_t i = 0; i < a.size(); ++i) {
      lx += dxa[i] * b[i];
      rx += a[i] * axb[i];
      ly += dya[i] * b[i];
      ry += a[i] * ayb[i];
    }
    EXPECT_NEAR(lx, rx, 1e-12);
    EXPECT_NEAR(ly, ry, 1e-12);
  }
}

TEST(DiffOps, SubTwoByTwoRejected) { EXPECT_THROW(ddx(ScalarField(1, 5)), ShapeError); }

TEST(Split, PaperDatasetSizeCounts) { EXPECT_EQ(split_counts(4510, {}), (SplitCounts{3833, 225, 452})); }

TEST(Split, TwentySequences) { EXPECT_EQ(split_counts(20, {}), (SplitCounts{17, 1, 2})); }

TEST(Split, SingleSequenceGoesToTraining) { EXPECT_EQ(split_counts(1, {}), (SplitCounts{1, 0, 0})); }

TEST(Split, EmptyManifestAndBadFractionsRejected) {
  EXPECT_THROW(split_dataset({}, {}), std::invalid_argument);
  EXPECT_THROW(split_counts(10, {0.5, 0.2, 0.2}), std::invalid_argument);
}

TEST(Split, IsChronologicalDeterministicPartitionProperty) {
  Gen g(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = g.integer(1, 200);
    DatasetManifest m;
    std::set<int> days;
    while (static_cast<int>(days.size()) < n) days.insert(g.integer(0, 100000));
    std::vector<int> shuffled(days.begin(), days.end());
    std::shuffle(shuffled.begin(), shuffled.end(), g.engine());
    for (int d : shuffled) {
      char ts[16];
      std::snprintf(ts, sizeof ts, "%08d", d);
      m.records.push_back({"s" + std::to_string(d), ts, Split::kUnassigned});
    }
    const DatasetManifest a = split_dataset(m, {});
    const DatasetManifest b = split_dataset(m, {});
    const SplitCounts c = split_counts(n, {});
    EXPECT_EQ(a.in_split(Split::kTrain).size(), c.train);
    EXPECT_EQ(a.in_split(Split::kVal).size(), c.val);
    EXPECT_EQ(a.in_split(Split::kTest).size(), c.test);
    EXPECT_EQ(c.train + c.val + c.test, static_cast<std::size_t>(n));
    std::string latest_train, earliest_test = "~";
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      EXPECT_NE(a.records[i].split, Split::kUnassigned);
      EXPECT_EQ(a.records[i].split, b.records[i].split);
      EXPECT_EQ(a.records[i].path, m.records[i].path);
      if (a.records[i].split == Split::kTrain) latest_train = std::max(latest_train, a.records[i].start_timestamp);
      if (a.records[i].split == Split::kTest) earliest_test = std::min(earliest_test, a.records[i].start_timestamp);
    }
    EXPECT_LT(latest_train, earliest_test);
  }
}

TEST(Manifest, TextRoundTrip) {
  DatasetManifest m;
  m.records = {{"a.fgrd", "2000-01-01T00:00:00Z", Split::kTrain},
               {"b.fgrd", "2000-01-02T00:00:00Z", Split::kVal},
               {"c.fgrd", "2000-01-03T00:00:00Z", Split::kTest}};
  const DatasetManifest back = parse_manifest(format_manifest(m));
  ASSERT_EQ(back.records.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(back.records[i].path, m.records[i].path);
    EXPECT_EQ(back.records[i].start_timestamp, m.records[i].start_timestamp);
    EXPECT_EQ(back.records[i].split, m.records[i].split);
  }
  EXPECT_THROW(parse_manifest("only-one-column\n"), std::invalid_argument);
}

}  // namespace
}  // namespace physcast
