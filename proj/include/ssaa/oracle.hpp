#pragma once

#include <span>
#include <vector>

#include "ssaa/core.hpp"
#include "ssaa/pooling.hpp"

namespace ssaa {

struct PerfSummary {
  double z_perf = 0.0;
  double z_full_info = 0.0;
  std::vector<double> per_problem;            ///< (lambda_k / lambda_bar) p_k' c_k(x_k)
  std::vector<double> full_info_per_problem;  ///< same weighting at the true-measure optimum
};

/// True weighted performance of the pooled decisions. Throws MissingTruth.
PerfSummary z_perf(const Dataset& dataset, const Anchors& anchors, Alpha alpha);

/// z_perf only, for every alpha.
std::vector<double> z_perf_curve(const Dataset& dataset, const Anchors& anchors,
                                 std::span<const Alpha> alphas);

/// (1/K) sum_k (lambda_k / lambda_bar) min_x p_k' c_k(x).
double full_information(const Dataset& dataset);

PoolingSelection select_alpha_oracle(const Dataset& dataset, const Anchors& anchors, const AlphaGrid& grid);

PoolingSelection select_joint_oracle(const Dataset& dataset, const std::vector<Anchors>& candidates,
                                     const AlphaGrid& grid);
PoolingSelection select_joint_oracle(const Dataset& dataset, const std::vector<Distribution>& candidates,
                                     const AlphaGrid& grid);

/// z_perf(alpha) minus z_perf at the reference selection.
double sub_opt(const Dataset& dataset, const Anchors& anchors, Alpha alpha,
               const PoolingSelection& reference);

struct Decomposition {
  Alpha alpha = 0.0;
  double saa_subopt = 0.0;
  double instability = 0.0;
  double saa0 = 0.0;
  double scale = 1.0;

  /// scale * (saa_subopt + instability + saa0), the scaled LOO estimate.
  double total() const { return scale * (saa_subopt + instability + saa0); }
};

Decomposition decompose(const Dataset& dataset, const Anchors& anchors, Alpha alpha, double scale = 1.0);
std::vector<Decomposition> decompose_curve(const Dataset& dataset, const Anchors& anchors,
                                           std::span<const Alpha> alphas, double scale = 1.0);

}  // namespace ssaa
