#pragma once

#include <functional>
#include <string>
#include <vector>

#include "physcast/field.hpp"
#include "physcast/metrics.hpp"

namespace physcast {

// Maps N observed frames to `horizon` predicted frames.
using Forecaster = std::function<Sequence(const Sequence& inputs, int horizon)>;

struct MetricValues {
  double mse = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  double corr = 0.0;
};

struct MetricReport {
  int horizon = 0;
  std::size_t sequences = 0;
  std::vector<MetricValues> per_step;
  std::vector<std::size_t> corr_samples;  // per step; constant fields leave CORR undefined
  MetricValues average;                   // over steps of the per-step means
};

struct EvalConfig {
  int input_frames = 4;
  int horizon = 8;
  double range = 1.0;  // dynamic range for PSNR and SSIM
  SsimConfig ssim;     // its range is overridden by `range`
};

MetricValues compute_metrics(const ScalarField& truth, const ScalarField& predicted, const EvalConfig& cfg);

// Uses the first input_frames + horizon frames of every sequence.
// Throws std::invalid_argument if `sequences` is empty or too short.
MetricReport evaluate(const std::vector<Sequence>& sequences, const Forecaster& forecaster, const EvalConfig& cfg);

// Repeats the last observed frame.
Forecaster persistence_forecaster();

// One `key=value` per line: step<k>.<metric> and mean.<metric>.
std::string format_report_kv(const MetricReport& report);
std::string format_report_table(const MetricReport& report);

}  // namespace physcast
