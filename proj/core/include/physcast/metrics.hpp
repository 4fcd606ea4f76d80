#pragma once

#include "physcast/field.hpp"

namespace physcast {

double metric_mse(const ScalarField& a, const ScalarField& b);

// 10 * log10(R^2 / MSE); +infinity when the fields are identical.
// Throws std::invalid_argument if range <= 0.
double metric_psnr(const ScalarField& a, const ScalarField& b, double range);
double psnr_from_mse(double mse, double range);

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double range = 1.0;  // dynamic range of the data
};

// Mean of local SSIM over all fully contained Gaussian windows.
// Throws ShapeError if the grid is smaller than the window.
double metric_ssim(const ScalarField& a, const ScalarField& b, const SsimConfig& cfg = {});

// Pearson correlation. Throws std::invalid_argument if either field is constant.
double metric_corr(const ScalarField& a, const ScalarField& b);

}  // namespace physcast
