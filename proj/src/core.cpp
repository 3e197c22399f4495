#include "ssaa/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ssaa {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroData: return "ZeroData";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyFeasibleSet: return "EmptyFeasibleSet";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::MissingTruth: return "MissingTruth";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonMonotoneDates: return "NonMonotoneDates";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
  }
  return "Unknown";
}

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "distribution needs at least one support point");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "distribution entries must be finite and nonnegative");
    }
    sum += p;
  }
  const double gap = std::abs(sum - 1.0);
  if (gap > kRenormalizeTolerance) {
    throw Error(ErrorCode::InvalidArgument,
                "distribution sums to " + std::to_string(sum) + ", not 1");
  }
  if (gap > kSimplexTolerance) {
    for (double& p : probs_) p /= sum;
  }
}

Distribution Distribution::uniform(std::size_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "uniform distribution needs d >= 1");
  return Distribution(std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

Distribution Distribution::point_mass(std::size_t d, std::size_t index) {
  if (index >= d) throw Error(ErrorCode::InvalidArgument, "point mass index out of range");
  std::vector<double> p(d, 0.0);
  p[index] = 1.0;
  return Distribution(std::move(p));
}

double Distribution::mean(std::span<const double> support) const {
  if (support.size() != probs_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "support and distribution differ in length");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) m += probs_[i] * support[i];
  return m;
}

Counts::Counts(std::vector<std::int64_t> m) : m_(std::move(m)) {
  for (auto v : m_) {
    if (v < 0) throw Error(ErrorCode::InvalidArgument, "counts must be nonnegative");
    total_ += v;
  }
}

double newsvendor_cost(double s, double x, double xi) {
  return std::max(s / (1.0 - s) * (xi - x), x - xi);
}

void validate_cost_model(const CostModel& cost, std::size_t d) {
  if (const auto* nv = std::get_if<Newsvendor>(&cost)) {
    if (!(nv->s > 0.0 && nv->s < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "critical fractile must lie in (0, 1)");
    }
  } else if (const auto* table = std::get_if<Table>(&cost)) {
    if (table->costs.empty()) throw Error(ErrorCode::EmptyFeasibleSet, "cost table has no rows");
    for (const auto& row : table->costs) {
      if (row.size() != d) {
        throw Error(ErrorCode::DimensionMismatch, "cost table row length differs from support size");
      }
      for (double c : row) {
        if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "cost table entries must be finite");
      }
    }
    if (!table->labels.empty() && table->labels.size() != table->costs.size()) {
      throw Error(ErrorCode::DimensionMismatch, "cost table labels differ from row count");
    }
  }
}

void SubproblemInstance::validate() const {
  const std::size_t d = support.size();
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "support must be non-empty");
  if (counts.size() != d) throw Error(ErrorCode::DimensionMismatch, "counts length differs from support size");
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw Error(ErrorCode::InvalidArgument, "frequency weight must be positive");
  }
  if (truth && truth->size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "truth length differs from support size");
  }
  if (!std::holds_alternative<Table>(cost)) {
    for (std::size_t i = 1; i < d; ++i) {
      if (!(support[i] > support[i - 1])) {
        throw Error(ErrorCode::InvalidArgument, "scalar support must be strictly increasing");
      }
    }
  }
  validate_cost_model(cost, d);
}

double Dataset::mean_weight() const {
  if (problems.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : problems) sum += p.weight;
  return sum / static_cast<double>(problems.size());
}

std::int64_t Dataset::max_count() const {
  std::int64_t n = 0;
  for (const auto& p : problems) n = std::max(n, p.counts.total());
  return n;
}

double Dataset::mean_count() const {
  if (problems.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : problems) sum += static_cast<double>(p.counts.total());
  return sum / static_cast<double>(problems.size());
}

bool Dataset::has_truth() const {
  return std::all_of(problems.begin(), problems.end(),
                     [](const SubproblemInstance& p) { return p.truth.has_value(); });
}

void Dataset::validate() const {
  if (problems.empty()) throw Error(ErrorCode::InvalidArgument, "dataset needs K >= 1");
  for (const auto& p : problems) p.validate();
}

Distribution empirical_distribution(const Counts& counts) {
  const auto n = counts.total();
  if (n == 0) throw Error(ErrorCode::ZeroData, "empirical distribution of an empty sample");
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  return Distribution(std::move(p));
}

void fill_shrunken(std::span<const std::int64_t> counts, std::int64_t total,
                   std::span<const double> anchor, Alpha alpha, std::span<double> out) {
  const std::size_t d = anchor.size();
  if (total == 0 || std::isinf(alpha)) {
    std::copy(anchor.begin(), anchor.end(), out.begin());
    return;
  }
  const double denom = static_cast<double>(total) + alpha;
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = (alpha * anchor[i] + static_cast<double>(counts[i])) / denom;
  }
}

Distribution shrunken_measure(const Counts& counts, const Distribution& anchor, Alpha alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "pooling amount must be nonnegative");
  if (counts.size() != anchor.size()) {
    throw Error(ErrorCode::DimensionMismatch, "counts and anchor differ in length");
  }
  if (counts.total() == 0 || std::isinf(alpha)) return anchor;
  std::vector<double> out(anchor.size());
  fill_shrunken(counts.values(), counts.total(), anchor.probs(), alpha, out);
  return Distribution(std::move(out));
}

}  // namespace ssaa
