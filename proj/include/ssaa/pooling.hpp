#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ssaa/core.hpp"

namespace ssaa {

/// One anchor per subproblem.
using Anchors = std::vector<Distribution>;

struct FixedAnchor {
  Distribution dist;
};

struct GrandMean {};

/// Scaled Beta(mu * shape / (1 - mu), shape) anchors discretized onto each
/// subproblem's support.
struct BetaFamily {
  std::vector<double> mean_grid;
  std::vector<double> shape_grid;

  /// mu in {1e-6, 0.05, ..., 1}, shape in {1e-6, 0.05, ..., 3}.
  static BetaFamily full_grid();
  /// mu in {1e-6, 0.1, ..., 1}, shape in {1e-6, 0.5, ..., 3}.
  static BetaFamily coarse_grid();
};

struct LooOptimized {
  std::vector<Distribution> candidates;
};

using AnchorSpec = std::variant<FixedAnchor, GrandMean, BetaFamily, LooOptimized>;

struct AlphaGrid {
  std::vector<Alpha> values;

  /// n equally spaced points on [lo, hi], optionally followed by +inf.
  static AlphaGrid linspace(double lo, double hi, std::size_t n, bool with_infinity);
  /// 120 points on [0, 180] plus +inf.
  static AlphaGrid default_grid();

  /// Throws EmptyGrid when empty; otherwise requires increasing values.
  void validate() const;
};

enum class SelectionMethod { Loo, KFold, JamesStein, APriori, Oracle };

const char* to_string(SelectionMethod m);

struct TracePoint {
  Alpha alpha = 0.0;
  std::size_t anchor_id = 0;
  double value = 0.0;
};

struct PoolingSelection {
  Alpha alpha = 0.0;
  std::size_t anchor_id = 0;
  Anchors anchors;
  std::vector<TracePoint> trace;
  SelectionMethod method = SelectionMethod::Loo;
  int folds = 0;
  std::uint64_t seed = 0;
};

/// Average empirical distribution over problems with data; uniform if none has any.
Distribution grand_mean(const Dataset& dataset);

/// Beta(mu * shape / (1 - mu), shape) mass on d equal bins of [0, 1].
/// mu = 1 puts all mass on the last bin.
Distribution beta_bins(double mu, double shape, std::size_t d);

/// beta_bins on every problem's support.
Anchors beta_anchor(double mu, double shape, const Dataset& dataset);

/// All (mu, shape) pairs of the family, mean-major.
std::vector<Anchors> beta_candidates(const BetaFamily& family, const Dataset& dataset);

Anchors resolve_anchor(const AnchorSpec& spec, const Dataset& dataset);

/// The same anchor for every problem.
Anchors replicate(const Distribution& anchor, std::size_t K);

/// Anchor means on each problem's support.
std::vector<double> anchor_means(const Dataset& dataset, const Anchors& anchors);

/// sum_k sum_{i : m_ki > 0} m_ki c_ki(x_k(alpha, anchor_k, m_k - e_i)).
double loo_criterion(const Dataset& dataset, const Anchors& anchors, Alpha alpha);
std::vector<double> loo_curve(const Dataset& dataset, const Anchors& anchors,
                              std::span<const Alpha> alphas);

PoolingSelection select_alpha_loo(const Dataset& dataset, const Anchors& anchors, const AlphaGrid& grid);
PoolingSelection select_alpha_loo(const Dataset& dataset, const AnchorSpec& spec, const AlphaGrid& grid);

/// Joint minimization over grid x candidates; ties go to the smaller alpha,
/// then the lower candidate index.
PoolingSelection select_joint_hloo(const Dataset& dataset, const std::vector<Anchors>& candidates,
                                   const AlphaGrid& grid);
PoolingSelection select_joint_hloo(const Dataset& dataset, const std::vector<Distribution>& candidates,
                                   const AlphaGrid& grid);

/// Held-out cost over kappa seeded folds per problem; alpha is not rescaled.
double kfold_criterion(const Dataset& dataset, const Anchors& anchors, Alpha alpha, int kappa,
                       std::uint64_t seed);
std::vector<double> kfold_curve(const Dataset& dataset, const Anchors& anchors,
                                std::span<const Alpha> alphas, int kappa, std::uint64_t seed);
PoolingSelection select_alpha_kfold(const Dataset& dataset, const Anchors& anchors,
                                    const AlphaGrid& grid, int kappa, std::uint64_t seed);

/// James-Stein pooling amount for squared error. Problems with fewer than two
/// observations are skipped; +inf when the denominator is not positive.
Alpha alpha_js(const Dataset& dataset, std::span<const double> anchor_means);

/// Same estimator on raw per-problem observations.
Alpha alpha_js(const std::vector<std::vector<double>>& samples, std::span<const double> anchor_means);

/// sum sigma_k^2 / sum (mu_k - mu_k0)^2.
Alpha alpha_ap(std::span<const double> mu, std::span<const double> variance,
               std::span<const double> anchor_means);

/// Index of the minimum of `values`, first occurrence.
std::size_t first_argmin(std::span<const double> values);

}  // namespace ssaa
