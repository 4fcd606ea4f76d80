// physcast command-line tool: synthetic data, training, prediction,
// evaluation, mask inspection and the acceptance gate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "physcast/checkpoint.hpp"
#include "physcast/conflict_mask.hpp"
#include "physcast/dataset.hpp"
#include "physcast/evaluate.hpp"
#include "physcast/fgrd.hpp"
#include "physcast/gate.hpp"
#include "physcast/image_dump.hpp"
#include "physcast/model.hpp"
#include "physcast/synth.hpp"
#include "physcast/training.hpp"

namespace fs = std::filesystem;
using namespace physcast;

namespace {

struct SynthOptions {
  fs::path out = "data";
  int sequences = 20;
  int frames = 12;
  int size = 64;
  int blobs = 2;
  double sigma0 = 2.5;
  double kappa = 0.05;
  double noise = 0.0;
  double max_speed = 0.6;
  std::uint64_t seed = 0;
};

// Start of sequence i, spaced by its own duration from 2000-01-01.
std::string timestamp(int i, int frames, double step_hours) {
  using namespace std::chrono;
  const auto start = sys_days{year{2000} / January / 1} + hours{static_cast<long>(i * frames * step_hours)};
  const auto day = floor<days>(start);
  const year_month_day ymd{day};
  const hh_mm_ss hms{start - day};
  std::ostringstream os;
  os << std::setfill('0') << static_cast<int>(ymd.year()) << '-' << std::setw(2)
     << static_cast<unsigned>(ymd.month()) << '-' << std::setw(2) << static_cast<unsigned>(ymd.day()) << 'T'
     << std::setw(2) << hms.hours().count() << ":00:00Z";
  return os.str();
}

int run_synth(const SynthOptions& o) {
  if (o.sequences < 1) throw std::invalid_argument("--sequences must be positive");
  fs::create_directories(o.out);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Each blob starts where its whole path keeps five final standard
  // deviations of clearance from the edges.
  const double sigma_end = std::sqrt(o.sigma0 * o.sigma0 + 2.0 * o.kappa * (o.frames - 1));
  const double margin = 5.0 * sigma_end;
  DatasetManifest manifest;
  std::vector<Sequence> all;
  for (int i = 0; i < o.sequences; ++i) {
    SynthSpec spec;
    spec.height = spec.width = o.size;
    spec.sigma0 = o.sigma0;
    spec.kappa = o.kappa;
    spec.noise = o.noise;
    spec.frames = o.frames;
    const double speed = o.max_speed * (0.3 + 0.7 * unit(rng));
    const double dir = 2.0 * M_PI * unit(rng);
    const double turn = 0.05 * (unit(rng) - 0.5);
    double px = 0.0, py = 0.0, xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
    for (int t = 0; t < o.frames; ++t) {
      spec.flow.push_back(FlowStep::uniform(speed * std::cos(dir + turn * t), speed * std::sin(dir + turn * t)));
      if (t + 1 == o.frames) break;
      px += spec.flow.back().u;
      py += spec.flow.back().v;
      xmin = std::min(xmin, px), xmax = std::max(xmax, px);
      ymin = std::min(ymin, py), ymax = std::max(ymax, py);
    }
    const double x_lo = margin - xmin, x_hi = o.size - 1 - margin - xmax;
    const double y_lo = margin - ymin, y_hi = o.size - 1 - margin - ymax;
    if (x_lo > x_hi || y_lo > y_hi)
      throw std::invalid_argument("a " + std::to_string(o.size) + "x" + std::to_string(o.size) +
                                  " grid is too small for these blobs and speeds; raise --size or lower "
                                  "--max-speed, --sigma0 or --frames");
    for (int b = 0; b < o.blobs; ++b)
      spec.blobs.push_back(
          {x_lo + (x_hi - x_lo) * unit(rng), y_lo + (y_hi - y_lo) * unit(rng), 0.5 + 0.5 * unit(rng)});
    const Sequence seq = synth_sequence(spec, o.seed * 1000003 + i);
    char name[32];
    std::snprintf(name, sizeof name, "seq_%04d.fgrd", i);
    save_field(seq, o.out / name);
    manifest.records.push_back({name, timestamp(i, o.frames, spec.step_hours), Split::kUnassigned});
    all.push_back(seq);
  }
  manifest = split_dataset(manifest, {});

  std::vector<Sequence> train;
  for (std::size_t i = 0; i < manifest.records.size(); ++i)
    if (manifest.records[i].split == Split::kTrain) train.push_back(all[i]);
  const fs::path manifest_path = o.out / "manifest.csv";
  write_manifest(manifest, manifest_path);
  write_stats(compute_stats(train), stats_sidecar_path(manifest_path));

  const SplitCounts counts = split_counts(manifest.records.size(), {});
  std::cout << "wrote " << o.sequences << " sequences to " << o.out.string() << " (train " << counts.train << ", val "
            << counts.val << ", test " << counts.test << ")\n";
  return EXIT_SUCCESS;
}

struct TrainOptions {
  fs::path data;
  fs::path out = "model.pckp";
  int epochs = 50;
  double lr = 1e-3;
  double beta = 0.9999;
  double alpha = 0.9;
  double lambda_lp = 1.0;
  double lambda_div = 1.0;
  double lambda_smooth = 0.4;
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::string estimator = "net";
  std::string refiner = "net";
  std::string evolution = "momentum";
  int input_frames = 4;
  int horizon = 8;
};

LossConfig loss_of(const TrainOptions& o) { return {o.alpha, o.lambda_lp, o.lambda_div, o.lambda_smooth}; }

int run_train(const TrainOptions& o) {
  const SequenceDataset ds = SequenceDataset::open(o.data);
  std::vector<Sequence> data = ds.load(Split::kTrain);
  if (data.empty()) throw std::invalid_argument("training split of " + o.data.string() + " is empty");
  for (auto& s : data) s = normalize(s, ds.stats);

  ModelConfig mc;
  mc.input_frames = o.input_frames;
  mc.horizon = o.horizon;
  mc.estimator = parse_estimator_kind(o.estimator);
  mc.refiner = parse_refiner_kind(o.refiner);
  mc.evolution = o.evolution == "conv" ? EvolutionVariant::kConv : EvolutionVariant::kMomentum;
  if (o.evolution != "conv" && o.evolution != "momentum")
    throw std::invalid_argument("--evolution must be momentum or conv");
  mc.beta = o.beta;
  mc.kernel.kappa = o.kappa;
  mc.variational.loss = loss_of(o);
  Model model = make_model(mc, o.seed);
  model.stats = ds.stats;

  TrainConfig tc;
  tc.adam.learning_rate = o.lr;
  tc.epochs = o.epochs;
  tc.seed = o.seed;
  tc.loss = loss_of(o);
  const TrainResult r = train(model, data, tc);
  for (std::size_t e = 0; e < r.loss_history.size(); ++e)
    std::cout << "epoch " << e + 1 << " loss " << std::setprecision(6) << r.loss_history[e] << '\n';
  std::cout << "initial loss " << r.initial_loss << ", final loss " << r.final_loss << '\n';
  save_checkpoint(to_checkpoint(r.model), o.out);
  std::cout << "saved " << o.out.string() << '\n';
  if (r.diverged) {
    std::cerr << "training diverged: " << r.diagnostic << " (kept the last finite parameters)\n";
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}

// Model options shared by predict and eval when no checkpoint is given.
struct ModelOptions {
  fs::path checkpoint;
  std::string estimator = "variational";
  std::string refiner = "inpaint";
  double beta = 0.9999;
  double kappa = 0.0;
  int input_frames = 4;
};

Model resolve_model(const ModelOptions& o, int horizon) {
  if (!o.checkpoint.empty()) return from_checkpoint(load_checkpoint(o.checkpoint));
  ModelConfig mc;
  mc.estimator = parse_estimator_kind(o.estimator);
  mc.refiner = parse_refiner_kind(o.refiner);
  if (mc.estimator == EstimatorKind::kNet || mc.refiner == RefinerKind::kNet)
    throw std::invalid_argument("network components need --model <checkpoint>");
  mc.beta = o.beta;
  mc.kernel.kappa = o.kappa;
  mc.input_frames = o.input_frames;
  mc.horizon = horizon;
  return make_model(mc, 0);
}

// Rollout in the model's normalized space; predictions come back in data units.
Sequence traced_rollout(const Model& model, const Sequence& inputs, int horizon, std::vector<RolloutStep>* trace) {
  const auto est = model.make_estimator();
  const auto ref = model.make_refiner();
  const Sequence x = model.stats ? normalize(inputs, *model.stats) : inputs;
  const Sequence y = rollout(x, *est, *ref, horizon, model.rollout_config(), trace);
  return model.stats ? denormalize(y, *model.stats) : y;
}

struct PredictOptions {
  ModelOptions model;
  fs::path inputs;
  fs::path out = "prediction.fgrd";
  fs::path dump_flow;
  int horizon = 8;
};

int run_predict(const PredictOptions& o) {
  const Model model = resolve_model(o.model, o.horizon);
  Sequence inputs = load_field(o.inputs);
  const auto n = static_cast<std::size_t>(model.config.input_frames);
  if (inputs.size() < n)
    throw std::invalid_argument(o.inputs.string() + " holds " + std::to_string(inputs.size()) +
                                " frames, the model needs " + std::to_string(n));
  inputs.frames.erase(inputs.frames.begin(), inputs.frames.end() - static_cast<std::ptrdiff_t>(n));

  std::vector<RolloutStep> trace;
  const Sequence pred = traced_rollout(model, inputs, o.horizon, o.dump_flow.empty() ? nullptr : &trace);
  save_field(pred, o.out);
  std::cout << "wrote " << pred.size() << " predicted frames to " << o.out.string() << '\n';
  if (!o.dump_flow.empty()) {
    fs::create_directories(o.dump_flow);
    for (std::size_t k = 0; k < trace.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "flow_%02zu.fgrd", k + 1);
      save_flow(trace[k].state.total, o.dump_flow / name);
    }
    std::cout << "wrote " << trace.size() << " composed flows to " << o.dump_flow.string() << '\n';
  }
  return EXIT_SUCCESS;
}

struct EvalOptions {
  ModelOptions model;
  fs::path data;
  std::string split = "test";
  int horizon = 8;
  bool persistence = false;
  fs::path report;
  fs::path heatmaps;
};

int run_eval(const EvalOptions& o) {
  const SequenceDataset ds = SequenceDataset::open(o.data);
  const std::vector<Sequence> seqs = ds.load(parse_split(o.split));
  if (seqs.empty()) throw std::invalid_argument(o.split + " split of " + o.data.string() + " is empty");

  EvalConfig ec;
  ec.horizon = o.horizon;
  ec.range = ds.stats.range() > 0.0 ? ds.stats.range() : 1.0;
  std::optional<Model> model;
  Forecaster forecaster;
  if (o.persistence) {
    ec.input_frames = o.model.input_frames;
    forecaster = persistence_forecaster();
  } else {
    model = resolve_model(o.model, o.horizon);
    ec.input_frames = model->config.input_frames;
    forecaster = make_forecaster(*model);
  }
  const MetricReport report = evaluate(seqs, forecaster, ec);
  std::cout << format_report_table(report);
  if (!o.report.empty()) {
    std::ofstream f(o.report);
    if (!f) throw IoError("cannot write " + o.report.string());
    f << format_report_kv(report);
    std::cout << "key=value report written to " << o.report.string() << '\n';
  }

  if (!o.heatmaps.empty()) {
    // First sequence of the split: truth, prediction and (for a model) mask per step.
    fs::create_directories(o.heatmaps);
    const Sequence& s = seqs.front();
    Sequence inputs;
    inputs.step_hours = s.step_hours;
    inputs.frames.assign(s.frames.begin(), s.frames.begin() + ec.input_frames);
    std::vector<RolloutStep> trace;
    const Sequence pred =
        model ? traced_rollout(*model, inputs, o.horizon, &trace) : forecaster(inputs, o.horizon);
    const double lo = ds.stats.min, hi = ds.stats.max > ds.stats.min ? ds.stats.max : ds.stats.min + 1.0;
    for (int k = 0; k < o.horizon; ++k) {
      const std::string step = std::to_string(k + 1);
      write_pgm(o.heatmaps / ("truth_" + step + ".pgm"), s.frames[ec.input_frames + k], lo, hi);
      write_pgm(o.heatmaps / ("pred_" + step + ".pgm"), pred.frames[k], lo, hi);
      if (!trace.empty()) write_pgm(o.heatmaps / ("mask_" + step + ".pgm"), trace[k].mask);
    }
    std::cout << "heatmaps written to " << o.heatmaps.string() << '\n';
  }
  return EXIT_SUCCESS;
}

struct MaskOptions {
  fs::path flow;
  fs::path energy_out = "energy.fgrd";
  fs::path mask_out = "mask.fgrd";
  double tau_low = 0.05;
  double tau_high = 1.75;
  std::string splat = "bilinear";
  bool literal = false;
};

int run_mask(const MaskOptions& o) {
  MaskThresholds th{o.tau_low, o.tau_high, o.splat == "nearest" ? SplatMode::kNearest : SplatMode::kBilinear};
  if (o.splat != "nearest" && o.splat != "bilinear") throw std::invalid_argument("--splat must be bilinear or nearest");
  if (o.literal) th = MaskThresholds::literal();
  th.validate();
  const VectorField w = load_flow(o.flow);
  const SplatResult splat = splat_energy(w, th.splat_mode);
  const ConflictMask mask = conflict_mask(splat.energy, th);
  save_field(Sequence{{splat.energy}}, o.energy_out);
  save_field(Sequence{{to_scalar(mask)}}, o.mask_out);
  std::cout << "conflicts " << count_conflicts(mask) << " of " << mask.size() << " pixels, energy pushed off-grid "
            << splat.discarded << '\n'
            << "wrote " << o.energy_out.string() << " and " << o.mask_out.string() << '\n';
  return EXIT_SUCCESS;
}

int run_check_grad() {
  const gate::CriterionResult r = gate::check_gradients();
  std::cout << r.detail << '\n';
  return r.pass ? EXIT_SUCCESS : EXIT_FAILURE;
}

int run_gate(const std::vector<int>& only) {
  const bool ok = gate::run_all(only, [](const std::string& line) { std::cout << line << std::endl; });
  std::cout << (ok ? "gate: all criteria passed" : "gate: FAILED") << std::endl;
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}

void add_model_options(CLI::App* cmd, ModelOptions& m) {
  cmd->add_option("--model", m.checkpoint, "Checkpoint written by train")->check(CLI::ExistingFile);
  cmd->add_option("--estimator", m.estimator, "Estimator without a checkpoint")
      ->check(CLI::IsMember({"variational", "net"}));
  cmd->add_option("--refiner", m.refiner, "Refiner without a checkpoint")
      ->check(CLI::IsMember({"inpaint", "identity", "net"}));
  cmd->add_option("--beta", m.beta, "Momentum coefficient without a checkpoint");
  cmd->add_option("--kappa", m.kappa, "Diffusion per step without a checkpoint");
  cmd->add_option("--input-frames", m.input_frames, "Observed frames fed to the estimator");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physcast: physics-guided field forecasting"};
  app.require_subcommand(0, 1);
  bool gate_flag = false;
  std::vector<int> gate_only;
  app.add_flag("--gate", gate_flag, "Run the acceptance gate; exit nonzero if any criterion fails");
  app.add_option("--only", gate_only, "Gate criteria to run (default all)");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Write synthetic sequences, a manifest and stats");
  synth->add_option("--out", so.out, "Output directory");
  synth->add_option("--sequences", so.sequences, "Number of sequences");
  synth->add_option("--frames", so.frames, "Frames per sequence");
  synth->add_option("--size", so.size, "Grid height and width");
  synth->add_option("--blobs", so.blobs, "Gaussian blobs per sequence");
  synth->add_option("--sigma0", so.sigma0, "Initial blob standard deviation (px)");
  synth->add_option("--kappa", so.kappa, "Diffusion per step");
  synth->add_option("--noise", so.noise, "Additive noise standard deviation");
  synth->add_option("--max-speed", so.max_speed, "Largest drift (px per frame)");
  synth->add_option("--seed", so.seed, "Random seed");

  TrainOptions to;
  auto* trn = app.add_subcommand("train", "Train the model networks on the training split");
  trn->add_option("--data", to.data, "Dataset manifest")->required()->check(CLI::ExistingFile);
  trn->add_option("--out", to.out, "Checkpoint path");
  trn->add_option("--epochs", to.epochs, "Training epochs");
  trn->add_option("--lr", to.lr, "Adam step size");
  trn->add_option("--beta", to.beta, "Momentum coefficient");
  trn->add_option("--alpha", to.alpha, "Weight of trusted pixels");
  trn->add_option("--lambda-lp", to.lambda_lp, "Weight of the masked reconstruction term");
  trn->add_option("--lambda-div", to.lambda_div, "Weight of the divergence penalty");
  trn->add_option("--lambda-smooth", to.lambda_smooth, "Weight of the smoothness penalty");
  trn->add_option("--kappa", to.kappa, "Diffusion per step");
  trn->add_option("--seed", to.seed, "Initialization and shuffling seed");
  trn->add_option("--estimator", to.estimator, "Motion estimator")->check(CLI::IsMember({"variational", "net"}));
  trn->add_option("--refiner", to.refiner, "Second stage")->check(CLI::IsMember({"inpaint", "net"}));
  trn->add_option("--evolution", to.evolution, "Motion evolution")->check(CLI::IsMember({"momentum", "conv"}));
  trn->add_option("--input-frames", to.input_frames, "Observed frames per window");
  trn->add_option("--horizon", to.horizon, "Predicted frames per window");

  PredictOptions po;
  auto* pred = app.add_subcommand("predict", "Forecast from the last observed frames of a field file");
  add_model_options(pred, po.model);
  pred->add_option("--inputs", po.inputs, "FGRD file of observed frames")->required()->check(CLI::ExistingFile);
  pred->add_option("--horizon", po.horizon, "Frames to predict");
  pred->add_option("--out", po.out, "FGRD file for the predictions");
  pred->add_option("--dump-flow", po.dump_flow, "Directory for per-step composed flows");

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "Per-step MSE, PSNR, SSIM and CORR on a dataset split");
  add_model_options(eval, eo.model);
  eval->add_option("--data", eo.data, "Dataset manifest")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", eo.split, "Split to evaluate")->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--horizon", eo.horizon, "Frames to predict");
  eval->add_flag("--persistence", eo.persistence, "Evaluate the repeat-last-frame baseline");
  eval->add_option("--report", eo.report, "Write the key=value report here");
  eval->add_option("--heatmaps", eo.heatmaps, "Directory for PGM heatmaps of the first sequence");

  MaskOptions mo;
  auto* mask = app.add_subcommand("mask", "Splat energy and conflict mask of a flow file");
  mask->add_option("--flow", mo.flow, "Two-frame FGRD file (u, v)")->required()->check(CLI::ExistingFile);
  mask->add_option("--energy-out", mo.energy_out, "FGRD file for the energy");
  mask->add_option("--mask-out", mo.mask_out, "FGRD file for the mask");
  mask->add_option("--tau-low", mo.tau_low, "Energy at or below which nothing arrived");
  mask->add_option("--tau-high", mo.tau_high, "Energy at or above which sources collide");
  mask->add_option("--splat", mo.splat, "Splat kernel")->check(CLI::IsMember({"bilinear", "nearest"}));
  mask->add_flag("--literal", mo.literal, "Integer thresholds 0 and 2 with nearest splatting");

  auto* grad = app.add_subcommand("check-grad", "Finite-difference check of the objective and network gradients");

  CLI11_PARSE(app, argc, argv);
  if (app.get_subcommands().empty() && !gate_flag) {
    std::cout << app.help();
    return EXIT_FAILURE;
  }

  try {
    int rc = EXIT_SUCCESS;
    if (synth->parsed()) rc = run_synth(so);
    if (trn->parsed()) rc = run_train(to);
    if (pred->parsed()) rc = run_predict(po);
    if (eval->parsed()) rc = run_eval(eo);
    if (mask->parsed()) rc = run_mask(mo);
    if (grad->parsed()) rc = run_check_grad();
    if (gate_flag && run_gate(gate_only) != EXIT_SUCCESS) rc = EXIT_FAILURE;
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "physcast: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
}
