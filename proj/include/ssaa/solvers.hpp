#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "ssaa/core.hpp"

namespace ssaa {

inline constexpr double kTieTolerance = 1e-12;

struct ScalarLevel {
  double x = 0.0;
  friend bool operator==(const ScalarLevel&, const ScalarLevel&) = default;
};

struct TableIndex {
  std::size_t j = 0;
  friend bool operator==(const TableIndex&, const TableIndex&) = default;
};

using Decision = std::variant<ScalarLevel, TableIndex>;

/// c_k(x, a_i) for support index i.
double decision_cost(const SubproblemInstance& instance, const Decision& x, std::size_t i);

/// c_k(x, xi) at a real outcome; newsvendor and squared error only.
double decision_cost_at(const CostModel& cost, const Decision& x, double xi);

/// sum_i p_i c_k(x, a_i).
double expected_cost(const SubproblemInstance& instance, const Decision& x,
                     std::span<const double> measure);

/// Plug-in optimizer against `measure`.
///
/// Newsvendor: smallest support point whose cumulative mass reaches s.
/// Mse: measure-weighted mean of the support.
/// Table: lowest index among the rows whose expected cost is within 1e-12
/// of the minimum.
Decision solve_plugin(const SubproblemInstance& instance, const Distribution& measure);
Decision solve_measure(const SubproblemInstance& instance, std::span<const double> measure);

/// solve_plugin against the shrunken measure; N = 0 yields x(inf, anchor).
Decision solve_shrunken(const SubproblemInstance& instance, const Distribution& anchor, Alpha alpha);

/// Reusable scratch space for repeated shrunken solves of one subproblem.
class ShrunkenSolver {
 public:
  ShrunkenSolver(const SubproblemInstance& instance, std::span<const double> anchor);

  /// x(alpha, anchor, m) for arbitrary counts m of matching length.
  Decision solve(std::span<const std::int64_t> counts, std::int64_t total, Alpha alpha);

  /// x(alpha, anchor, m - e_i).
  Decision solve_leave_one_out(std::size_t i, Alpha alpha);

  Decision solve(Alpha alpha) {
    return solve(instance_.counts.values(), instance_.counts.total(), alpha);
  }

  const SubproblemInstance& instance() const noexcept { return instance_; }

 private:
  const SubproblemInstance& instance_;
  std::span<const double> anchor_;
  std::vector<double> measure_;
  std::vector<std::int64_t> counts_;
};

/// Piecewise-constant map alpha -> x(alpha, anchor, m) for finite feasible sets.
struct AlphaPath {
  std::vector<double> breakpoints;       ///< strictly increasing, in (0, inf)
  std::vector<Decision> decisions;       ///< one per open interval; size breakpoints + 1
  std::vector<Decision> at_breakpoints;  ///< tie-broken decision exactly at each breakpoint
  Decision at_zero;
  Decision at_infinity;
  std::int64_t total_count = 0;
  /// Alpha ranges around each breakpoint where the neighbouring decisions
  /// cost the same up to kTieTolerance; lookups there return at_breakpoints.
  std::vector<double> tie_lo;
  std::vector<double> tie_hi;

  Decision lookup(Alpha alpha) const;
};

/// Newsvendor restricted to its support levels, as a cost table.
Table lower_to_table(const SubproblemInstance& instance);

/// Exact breakpoints of the decision path via the lower envelope of the lines
/// g_x(theta) = ((1 - theta) p_hat + theta q)' c(x), theta = alpha / (N + alpha).
AlphaPath alpha_path(const SubproblemInstance& instance, const Distribution& anchor);

/// Distribution function of a continuous-mode anchor on [lo, hi].
///
/// `atoms` lists the jump points of `cdf` (empty when it is continuous).
/// `quantile`, when set, returns inf{x : cdf(x) >= t}; otherwise a bisection
/// on `cdf` is used.
struct AnchorCdf {
  std::function<double(double)> cdf;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> atoms;
  std::function<double(double)> quantile;

  static AnchorCdf uniform(double lo, double hi);
  /// Step CDF of a weighted sample.
  static AnchorCdf empirical(std::vector<double> points, std::vector<double> weights);
};

/// s-quantile of (N/(N+alpha)) F_emp + (alpha/(N+alpha)) F_anchor, i.e.
/// inf{x : F(x) >= s}. `samples` must be sorted ascending.
double continuous_newsvendor(std::span<const double> samples, const AnchorCdf& anchor, Alpha alpha,
                             double s);

}  // namespace ssaa
