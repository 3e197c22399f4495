#include "ssaa/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ssaa/core.hpp"
#include "ssaa/rng.hpp"

namespace ssaa {

std::vector<double> KsConfig::default_rho_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(0.05 * i);
  return g;
}

Bounds observed_bounds(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::InsufficientData, "no samples to bound");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  return {*lo, *hi};
}

namespace {

void check(std::span<const double> samples, double rho, Bounds bounds) {
  if (!(bounds.lo <= bounds.hi)) throw Error(ErrorCode::InvalidBounds, "need lo <= hi");
  for (double v : samples) {
    if (v < bounds.lo || v > bounds.hi) throw Error(ErrorCode::InvalidBounds, "sample outside bounds");
  }
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in [0,1]");
}

double empirical_cost(std::span<const double> samples, double x, double s) {
  double sum = 0.0;
  for (double v : samples) sum += newsvendor_cost(s, x, v);
  return sum / static_cast<double>(samples.size());
}

// x inside [lo, hi]; samples sorted.
double worst_case_inside(const std::vector<double>& sorted, double rho, double x, double s, Bounds b) {
  const double r = s / (1.0 - s);
  const double n = static_cast<double>(sorted.size());
  std::vector<double> points(sorted);
  points.push_back(b.lo);
  points.push_back(b.hi);
  points.push_back(x);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  // Interval [points[j], points[j+1]) with constant empirical CDF.
  struct Piece {
    double length;
    double upper;
    double lower;
    bool left;  // lies below x
  };
  std::vector<Piece> pieces;
  double lower_at_x_minus = 0.0;
  double upper_at_x = 1.0;
  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    const double t = points[j];
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    const double f = sorted.empty() ? 0.0 : static_cast<double>(count) / n;
    const Piece p{points[j + 1] - t, std::min(f + rho, 1.0), std::max(f - rho, 0.0), t < x};
    if (p.left) lower_at_x_minus = p.lower;
    if (t == x) upper_at_x = p.upper;
    pieces.push_back(p);
  }
  if (x >= b.hi) upper_at_x = 1.0;

  auto phi = [&](double v) {
    double total = 0.0;
    for (const auto& p : pieces) {
      total += p.left ? p.length * std::min(p.upper, v) : r * p.length * (1.0 - std::max(p.lower, v));
    }
    return total;
  };

  std::vector<double> candidates{lower_at_x_minus, upper_at_x};
  for (const auto& p : pieces) candidates.push_back(p.left ? p.upper : p.lower);
  double best = -std::numeric_limits<double>::infinity();
  for (double v : candidates) {
    if (v < lower_at_x_minus || v > upper_at_x) continue;
    best = std::max(best, phi(v));
  }
  return best;
}

}  // namespace

double ks_worst_case(std::span<const double> samples, double rho, double x, double s, Bounds bounds) {
  check(samples, rho, bounds);
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorCode::InvalidArgument, "s must lie in (0,1)");
  if (rho == 0.0 && !samples.empty()) return empirical_cost(samples, x, s);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (x < bounds.lo) {
    return s / (1.0 - s) * (bounds.lo - x) + worst_case_inside(sorted, rho, bounds.lo, s, bounds);
  }
  if (x > bounds.hi) return (x - bounds.hi) + worst_case_inside(sorted, rho, bounds.hi, s, bounds);
  return worst_case_inside(sorted, rho, x, s, bounds);
}

double ks_solve(std::span<const double> samples, double rho, double s, Bounds bounds) {
  check(samples, rho, bounds);
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorCode::InvalidArgument, "s must lie in (0,1)");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto value = [&](double x) {
    if (rho == 0.0 && !sorted.empty()) return empirical_cost(sorted, x, s);
    return worst_case_inside(sorted, rho, x, s, bounds);
  };
  auto tied = [](double v, double best) { return v <= best + 1e-12 * std::max(1.0, std::abs(best)); };

  std::vector<double> atoms(sorted);
  atoms.push_back(bounds.lo);
  atoms.push_back(bounds.hi);
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  std::vector<double> at(atoms.size());
  std::size_t best = 0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    at[j] = value(atoms[j]);
    if (at[j] < at[best]) best = j;
  }

  // The worst case is convex in x but can kink between atoms, so search the
  // two intervals next to the best atom.
  double x_star = atoms[best];
  double v_star = at[best];
  for (std::size_t side = 0; side < 2; ++side) {
    if ((side == 0 && best == 0) || (side == 1 && best + 1 == atoms.size())) continue;
    double a = side == 0 ? atoms[best - 1] : atoms[best];
    double b = side == 0 ? atoms[best] : atoms[best + 1];
    constexpr double g = 0.6180339887498949;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = value(c);
    double fd = value(d);
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = value(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = value(d);
      }
    }
    const double x = fc <= fd ? c : d;
    const double v = std::min(fc, fd);
    if (!tied(v_star, v)) {
      x_star = x;
      v_star = v;
    }
  }

  if (x_star == atoms[best] || tied(at[best], v_star)) {
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (tied(at[j], v_star)) return atoms[j];
    }
    return atoms[best];
  }
  // Interior minimum: move left across any flat stretch.
  const auto right = static_cast<std::size_t>(std::upper_bound(atoms.begin(), atoms.end(), x_star) - atoms.begin());
  double a = atoms[right - 1];
  double b = x_star;
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    const double m = 0.5 * (a + b);
    (tied(value(m), v_star) ? b : a) = m;
  }
  return b;
}

double ks_select_rho(std::span<const double> samples, double s, Bounds bounds, const KsConfig& config,
                     std::uint64_t stream) {
  if (config.rho_grid.empty()) throw Error(ErrorCode::EmptyGrid, "rho grid is empty");
  if (config.folds < 2) throw Error(ErrorCode::InvalidArgument, "need at least two folds");
  const double smallest = *std::min_element(config.rho_grid.begin(), config.rho_grid.end());
  const auto folds = static_cast<std::size_t>(config.folds);
  if (samples.size() < folds) return smallest;

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed, stream, 0, Purpose::KsFold);
  rng.shuffle(order);

  std::vector<double> rhos(config.rho_grid);
  std::sort(rhos.begin(), rhos.end());
  double best_rho = smallest;
  double best = std::numeric_limits<double>::infinity();
  for (double rho : rhos) {
    double total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<double> train;
      std::vector<double> test;
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        (pos % folds == f ? test : train).push_back(samples[order[pos]]);
      }
      const double x = ks_solve(train, rho, s, bounds);
      for (double v : test) total += newsvendor_cost(s, x, v);
    }
    const double avg = total / static_cast<double>(samples.size());
    if (avg < best) {
      best = avg;
      best_rho = rho;
    }
  }
  return best_rho;
}

}  // namespace ssaa
