#pragma once

#include "physcast/conflict_mask.hpp"
#include "physcast/field.hpp"
#include "physcast/warp.hpp"

namespace physcast {

// Coefficients of the training objective. Defaults are the cross-validated
// values used for the momentum model.
struct LossConfig {
  double alpha = 0.9;  // weight of trusted (mask = 1) pixels
  double lambda_lp = 1.0;
  double lambda_div = 1.0;
  double lambda_smooth = 0.4;

  void validate() const;
};

struct LossBreakdown {
  double mask_term = 0.0;
  double div_term = 0.0;
  double smooth_term = 0.0;
  double total = 0.0;
};

// Mean over pixels of [alpha*M + (1-alpha)*(1-M)] * (T - That)^2.
double masked_mse(const ScalarField& target, const ScalarField& predicted, const ConflictMask& mask, double alpha);
// d(masked_mse)/d(predicted)
ScalarField masked_mse_grad(const ScalarField& target, const ScalarField& predicted, const ConflictMask& mask,
                            double alpha);

// Spatial mean of (div w)^2.
double divergence_penalty(const VectorField& w);
VectorField divergence_penalty_grad(const VectorField& w);

// Spatial mean of |grad u|^2 + |grad v|^2.
double smoothness_penalty(const VectorField& w);
VectorField smoothness_penalty_grad(const VectorField& w);

LossBreakdown total_loss(const ScalarField& target, const ScalarField& predicted, const ConflictMask& mask,
                         const VectorField& w, const LossConfig& cfg);

struct LossWithGradient {
  LossBreakdown loss;
  ScalarField predicted;  // advect(source, w)
  VectorField grad;       // d(total)/d(w)
};

// Total loss of predicted = advect(source, w, kcfg) against target and its
// exact gradient in w. The mask is held constant.
LossWithGradient grad_total_loss(const ScalarField& target, const ScalarField& source, const VectorField& w,
                                 const ConflictMask& mask, const LossConfig& cfg, const KernelConfig& kcfg,
                                 PaddingRule pad = {});

}  // namespace physcast
