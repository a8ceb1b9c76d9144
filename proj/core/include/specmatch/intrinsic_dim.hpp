#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace specmatch {

// Local-PCA intrinsic dimensionality estimate. Each trial picks a random
// sample, runs PCA over the patch made of that sample and its k nearest
// neighbors, and records the residual-variance curve plus the smallest
// component count whose cumulative variance reaches the threshold. The
// summary applies the threshold to the trial-averaged curve, which stays
// stable down to very small k where individual trials flicker.
struct DimReport {
  int trials = 0;
  int k_neighbors = 0;
  std::vector<int> per_trial_dimension;
  // residual_curves(t, c) = residual variance fraction after c components;
  // column 0 is 1.0 and the final column is 0 by construction.
  Eigen::MatrixXd residual_curves;
  int summary_dimension = 0;  // threshold crossing of the mean residual curve
  int modal_dimension = 0;    // most frequent per-trial estimate
};

DimReport estimate_intrinsic_dimension(const Eigen::MatrixXd& samples, int k_neighbors,
                                       double variance_threshold = 0.99, int trials = 200,
                                       std::uint64_t seed = 1);

// CSV rows "trial,component,residual" for external plotting.
std::string dim_report_csv(const DimReport& report);

}  // namespace specmatch
