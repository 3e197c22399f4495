#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ssaa/error.hpp"

namespace ssaa {

/// Pooling amount. Nonnegative; +infinity means full shrinkage to the anchor.
using Alpha = double;
inline constexpr Alpha kInfiniteAlpha = std::numeric_limits<double>::infinity();

inline constexpr double kSimplexTolerance = 1e-9;
inline constexpr double kRenormalizeTolerance = 1e-6;

/// A point of the probability simplex over a finite support.
///
/// Construction validates: entries must be nonnegative and sum to one. Sums
/// off by at most 1e-6 are renormalized; anything further is rejected.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  static Distribution uniform(std::size_t d);
  static Distribution point_mass(std::size_t d, std::size_t index);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<double>& vector() const noexcept { return probs_; }

  /// Mean of the support values under this distribution.
  double mean(std::span<const double> support) const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

/// Occurrence counts per support index.
class Counts {
 public:
  Counts() = default;
  explicit Counts(std::vector<std::int64_t> m);

  std::size_t size() const noexcept { return m_.size(); }
  std::int64_t operator[](std::size_t i) const { return m_[i]; }
  std::span<const std::int64_t> values() const noexcept { return m_; }
  std::int64_t total() const noexcept { return total_; }

  friend bool operator==(const Counts&, const Counts&) = default;

 private:
  std::vector<std::int64_t> m_;
  std::int64_t total_ = 0;
};

/// Newsvendor cost max{ s/(1-s) (xi - x), x - xi } with critical fractile s.
struct Newsvendor {
  double s = 0.5;
};

/// Squared error (x - xi)^2.
struct Mse {};

/// Finite feasible set: costs[j][i] is the cost of feasible point j when the
/// outcome is support index i.
struct Table {
  std::vector<std::vector<double>> costs;
  std::vector<std::string> labels;
};

using CostModel = std::variant<Newsvendor, Mse, Table>;

void validate_cost_model(const CostModel& cost, std::size_t d);

/// Piecewise-linear newsvendor loss at a real outcome.
double newsvendor_cost(double s, double x, double xi);

struct SubproblemInstance {
  std::vector<double> support;
  CostModel cost;
  Counts counts;
  double weight = 1.0;
  std::optional<Distribution> truth;

  std::size_t dimension() const noexcept { return support.size(); }

  /// Throws on inconsistent dimensions, unordered support or a nonpositive weight.
  void validate() const;
};

struct Dataset {
  std::vector<SubproblemInstance> problems;

  std::size_t size() const noexcept { return problems.size(); }
  double mean_weight() const;
  std::int64_t max_count() const;
  double mean_count() const;
  bool has_truth() const;
  void validate() const;
};

/// m / N. Throws ZeroData when N = 0.
Distribution empirical_distribution(const Counts& counts);

/// (alpha * anchor + m) / (N + alpha); returns the anchor itself when N = 0
/// or alpha is infinite.
Distribution shrunken_measure(const Counts& counts, const Distribution& anchor, Alpha alpha);

/// Writes the shrunken measure into `out` without allocating. Same arithmetic
/// as shrunken_measure.
void fill_shrunken(std::span<const std::int64_t> counts, std::int64_t total,
                   std::span<const double> anchor, Alpha alpha, std::span<double> out);

}  // namespace ssaa
