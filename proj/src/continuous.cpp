#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ssaa/solvers.hpp"

namespace ssaa {

AnchorCdf AnchorCdf::uniform(double lo, double hi) {
  if (!(lo <= hi)) throw Error(ErrorCode::InvalidBounds, "uniform anchor needs lo <= hi");
  AnchorCdf a;
  a.lo = lo;
  a.hi = hi;
  if (hi == lo) {
    a.atoms = {lo};
    a.cdf = [lo](double x) { return x >= lo ? 1.0 : 0.0; };
    a.quantile = [lo](double) { return lo; };
    return a;
  }
  a.cdf = [lo, hi](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); };
  a.quantile = [lo, hi](double t) { return lo + std::clamp(t, 0.0, 1.0) * (hi - lo); };
  return a;
}

AnchorCdf AnchorCdf::empirical(std::vector<double> points, std::vector<double> weights) {
  if (points.empty() || points.size() != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "empirical anchor needs matching points and weights");
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "anchor weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "anchor weights sum to zero");

  std::vector<double> atoms;
  std::vector<double> cumulative;
  double running = 0.0;
  for (std::size_t idx : order) {
    running += weights[idx] / total;
    if (!atoms.empty() && atoms.back() == points[idx]) {
      cumulative.back() = running;
    } else {
      atoms.push_back(points[idx]);
      cumulative.push_back(running);
    }
  }
  cumulative.back() = 1.0;

  AnchorCdf a;
  a.lo = atoms.front();
  a.hi = atoms.back();
  a.atoms = atoms;
  a.cdf = [atoms, cumulative](double x) {
    const auto it = std::upper_bound(atoms.begin(), atoms.end(), x);
    if (it == atoms.begin()) return 0.0;
    return cumulative[static_cast<std::size_t>(it - atoms.begin()) - 1];
  };
  a.quantile = [atoms, cumulative](double t) {
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), t - kTieTolerance);
    if (it == cumulative.end()) return atoms.back();
    return atoms[static_cast<std::size_t>(it - cumulative.begin())];
  };
  return a;
}

double continuous_newsvendor(std::span<const double> samples, const AnchorCdf& anchor, Alpha alpha,
                             double s) {
  if (alpha < 0.0 || std::isnan(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorCode::InvalidArgument, "s must lie in (0,1)");
  const double n = static_cast<double>(samples.size());
  if (samples.empty() && alpha == 0.0) {
    throw Error(ErrorCode::ZeroData, "no samples and no anchor weight");
  }
  const double w = (samples.empty() || std::isinf(alpha)) ? 0.0 : n / (n + alpha);
  const bool use_anchor = w < 1.0;

  auto empirical = [&](double x) {
    if (samples.empty()) return 0.0;
    const auto count = std::upper_bound(samples.begin(), samples.end(), x) - samples.begin();
    return static_cast<double>(count) / n;
  };
  auto mixture = [&](double x) {
    double f = w * empirical(x);
    if (use_anchor) f += (1.0 - w) * anchor.cdf(x);
    return f;
  };
  const double threshold = s - kTieTolerance;

  // Smallest breakpoint (sample, anchor atom or anchor bound) reaching the level.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto reaches = [&](double b) { return mixture(b) >= threshold; };
  double upper = kInf;
  if (w > 0.0) {
    const auto it = std::partition_point(samples.begin(), samples.end(),
                                         [&](double b) { return !reaches(b); });
    if (it != samples.end()) upper = *it;
  }
  if (use_anchor) {
    const auto it = std::partition_point(anchor.atoms.begin(), anchor.atoms.end(),
                                         [&](double b) { return !reaches(b); });
    if (it != anchor.atoms.end()) upper = std::min(upper, *it);
    if (reaches(anchor.lo)) upper = std::min(upper, anchor.lo);
    if (reaches(anchor.hi)) upper = std::min(upper, anchor.hi);
  }
  if (upper == kInf) {
    double top = use_anchor ? anchor.hi : -kInf;
    if (w > 0.0) top = std::max(top, samples.back());
    return top;
  }
  if (!use_anchor) return upper;

  double lower = -kInf;
  if (w > 0.0) {
    const auto it = std::lower_bound(samples.begin(), samples.end(), upper);
    if (it != samples.begin()) lower = *(it - 1);
  }
  {
    const auto it = std::lower_bound(anchor.atoms.begin(), anchor.atoms.end(), upper);
    if (it != anchor.atoms.begin()) lower = std::max(lower, *(it - 1));
  }
  if (anchor.lo < upper) lower = std::max(lower, anchor.lo);
  if (lower == -kInf) return upper;

  // Between breakpoints only the anchor CDF moves.
  if (anchor.quantile) {
    const double target = (threshold - w * empirical(lower)) / (1.0 - w);
    const double x = anchor.quantile(target);
    if (x > lower && x < upper && mixture(x) >= threshold) return x;
    if (!(x > lower && x < upper)) return upper;
  }
  double a = lower;
  double b = upper;
  for (int iter = 0; iter < 200 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++iter) {
    const double mid = 0.5 * (a + b);
    if (mixture(mid) >= threshold) {
      b = mid;
    } else {
      a = mid;
    }
  }
  return b;
}

}  // namespace ssaa
