#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>

#include "physcast/checkpoint.hpp"
#include "physcast/dataset.hpp"
#include "physcast/estimators.hpp"
#include "physcast/evaluate.hpp"
#include "physcast/evolution.hpp"
#include "physcast/refiners.hpp"

namespace physcast {

enum class EstimatorKind { kVariational, kNet };
enum class RefinerKind { kIdentity, kInpaint, kNet };

std::string to_string(EstimatorKind k);
std::string to_string(RefinerKind k);
EstimatorKind parse_estimator_kind(const std::string& s);
RefinerKind parse_refiner_kind(const std::string& s);

struct ModelConfig {
  int input_frames = 4;  // N
  int horizon = 8;       // K used in training
  EstimatorKind estimator = EstimatorKind::kNet;
  RefinerKind refiner = RefinerKind::kNet;
  EvolutionVariant evolution = EvolutionVariant::kMomentum;
  double beta = 0.9999;
  KernelConfig kernel;  // diffusion per step
  MaskThresholds thresholds;
  std::array<int, 4> motion_widths{8, 16, 16, 16};
  std::array<int, 4> generator_widths{8, 16, 16, 16};
  int evolve_hidden = 8;
  VariationalConfig variational;

  void validate() const;
};

// Everything needed to run a forecast. Networks are present only for the
// components that use them.
struct Model {
  ModelConfig config;
  std::shared_ptr<MotionNet> motion;
  std::shared_ptr<GeneratorNet> generator;
  std::shared_ptr<ConvEvolveParams> evolve;
  std::optional<Stats> stats;  // normalization applied to the training data

  EvolutionConfig evolution_config() const;
  RolloutConfig rollout_config(PaddingRule pad = {}) const;
  std::unique_ptr<MotionEstimator> make_estimator() const;
  std::unique_ptr<Refiner> make_refiner() const;
};

Model make_model(const ModelConfig& cfg, std::uint64_t seed, double head_scale = 0.1);

Checkpoint to_checkpoint(const Model& model);
Model from_checkpoint(const Checkpoint& ckpt);

// Forecaster in the units of the stored data: inputs are normalized with
// the model's stats (if any) and predictions mapped back.
Forecaster make_forecaster(const Model& model, PaddingRule pad = {});

}  // namespace physcast
