#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssaa/error.hpp"

namespace ssaa {

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct KsConfig {
  std::vector<double> rho_grid = default_rho_grid();
  int folds = 5;
  std::uint64_t seed = 0;

  /// {0, 0.05, ..., 1}.
  static std::vector<double> default_rho_grid();
};

/// Observed range of the samples.
Bounds observed_bounds(std::span<const double> samples);

/// Worst-case expected newsvendor cost over distributions on [lo, hi] whose
/// CDF stays within rho of the empirical CDF (sup norm).
double ks_worst_case(std::span<const double> samples, double rho, double x, double s, Bounds bounds);

/// Minimizer of ks_worst_case over the samples and both bounds; smallest on ties.
double ks_solve(std::span<const double> samples, double rho, double s, Bounds bounds);

/// Radius minimizing the held-out newsvendor cost over seeded folds. With
/// fewer samples than folds the smallest grid value is returned. `stream`
/// separates the fold draws of different problems.
double ks_select_rho(std::span<const double> samples, double s, Bounds bounds, const KsConfig& config,
                     std::uint64_t stream = 0);

}  // namespace ssaa
