#include "physcast/evaluate.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace physcast {

namespace {

bool is_constant(const ScalarField& f) {
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i] != f[0]) return false;
  return true;
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

MetricValues compute_metrics(const ScalarField& truth, const ScalarField& predicted, const EvalConfig& cfg) {
  MetricValues m;
  m.mse = metric_mse(truth, predicted);
  m.psnr = psnr_from_mse(m.mse, cfg.range);
  SsimConfig ssim = cfg.ssim;
  ssim.range = cfg.range;
  m.ssim = metric_ssim(truth, predicted, ssim);
  m.corr = is_constant(truth) || is_constant(predicted) ? std::numeric_limits<double>::quiet_NaN()
                                                        : metric_corr(truth, predicted);
  return m;
}

MetricReport evaluate(const std::vector<Sequence>& sequences, const Forecaster& forecaster, const EvalConfig& cfg) {
  if (sequences.empty()) throw std::invalid_argument("evaluate: no sequences in the split");
  if (cfg.input_frames < 1 || cfg.horizon < 1) throw std::invalid_argument("evaluate: bad input/horizon length");
  const std::size_t need = static_cast<std::size_t>(cfg.input_frames + cfg.horizon);

  MetricReport r;
  r.horizon = cfg.horizon;
  r.sequences = sequences.size();
  r.per_step.assign(cfg.horizon, {});
  r.corr_samples.assign(cfg.horizon, 0);

  for (const auto& seq : sequences) {
    if (seq.size() < need)
      throw std::invalid_argument("evaluate: sequence of " + std::to_string(seq.size()) + " frames is shorter than " +
                                  std::to_string(cfg.input_frames) + " inputs + horizon " +
                                  std::to_string(cfg.horizon));
    Sequence inputs{{seq.frames.begin(), seq.frames.begin() + cfg.input_frames}, seq.step_hours};
    const Sequence pred = forecaster(inputs, cfg.horizon);
    if (pred.size() != static_cast<std::size_t>(cfg.horizon))
      throw std::runtime_error("evaluate: forecaster returned " + std::to_string(pred.size()) + " frames");
    for (int k = 0; k < cfg.horizon; ++k) {
      const MetricValues m = compute_metrics(seq.frames[cfg.input_frames + k], pred.frames[k], cfg);
      auto& acc = r.per_step[k];
      acc.mse += m.mse;
      acc.psnr += m.psnr;
      acc.ssim += m.ssim;
      if (!std::isnan(m.corr)) {
        acc.corr += m.corr;
        ++r.corr_samples[k];
      }
    }
  }

  const double n = static_cast<double>(sequences.size());
  std::size_t corr_steps = 0;
  for (int k = 0; k < cfg.horizon; ++k) {
    auto& s = r.per_step[k];
    s.mse /= n;
    s.psnr /= n;
    s.ssim /= n;
    s.corr = r.corr_samples[k] ? s.corr / static_cast<double>(r.corr_samples[k])
                               : std::numeric_limits<double>::quiet_NaN();
    r.average.mse += s.mse;
    r.average.psnr += s.psnr;
    r.average.ssim += s.ssim;
    if (r.corr_samples[k]) {
      r.average.corr += s.corr;
      ++corr_steps;
    }
  }
  const double k = cfg.horizon;
  r.average.mse /= k;
  r.average.psnr /= k;
  r.average.ssim /= k;
  r.average.corr = corr_steps ? r.average.corr / static_cast<double>(corr_steps)
                              : std::numeric_limits<double>::quiet_NaN();
  return r;
}

Forecaster persistence_forecaster() {
  return [](const Sequence& inputs, int horizon) {
    validate_sequence(inputs, 1);
    return Sequence{std::vector<ScalarField>(static_cast<std::size_t>(horizon), inputs.back()), inputs.step_hours};
  };
}

std::string format_report_kv(const MetricReport& report) {
  std::ostringstream os;
  os << "sequences=" << report.sequences << "\n";
  os << "horizon=" << report.horizon << "\n";
  auto emit = [&](const std::string& prefix, const MetricValues& m) {
    os << prefix << ".mse=" << num(m.mse) << "\n";
    os << prefix << ".psnr=" << num(m.psnr) << "\n";
    os << prefix << ".ssim=" << num(m.ssim) << "\n";
    os << prefix << ".corr=" << num(m.corr) << "\n";
  };
  for (std::size_t k = 0; k < report.per_step.size(); ++k) emit("step" + std::to_string(k + 1), report.per_step[k]);
  emit("mean", report.average);
  return os.str();
}

std::string format_report_table(const MetricReport& report) {
  std::ostringstream os;
  os << "step        MSE       PSNR       SSIM       CORR\n";
  auto row = [&](const std::string& label, const MetricValues& m) {
    os << std::left << std::setw(6) << label << std::right << std::fixed << std::setprecision(4) << std::setw(11)
       << m.mse << std::setw(11) << m.psnr << std::setw(11) << m.ssim << std::setw(11) << m.corr << "\n";
  };
  for (std::size_t k = 0; k < report.per_step.size(); ++k) row(std::to_string(k + 1), report.per_step[k]);
  row("mean", report.average);
  os << report.sequences << " sequence(s)\n";
  return os.str();
}

}  // namespace physcast
