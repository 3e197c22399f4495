#include "ssaa/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ssaa {
namespace {

template <class ValueOf>
std::size_t lowest_argmin(std::size_t n, ValueOf value_of) {
  double best = value_of(0);
  std::vector<double> values(n);
  values[0] = best;
  for (std::size_t j = 1; j < n; ++j) {
    values[j] = value_of(j);
    best = std::min(best, values[j]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (values[j] - best <= kTieTolerance) return j;
  }
  return 0;
}

std::size_t newsvendor_index(double s, std::span<const double> measure) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    cumulative += measure[i];
    if (cumulative >= s - kTieTolerance) return i;
  }
  return measure.size() - 1;
}

double row_cost(const std::vector<double>& row, std::span<const double> measure) {
  double c = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) c += measure[i] * row[i];
  return c;
}

}  // namespace

double decision_cost(const SubproblemInstance& instance, const Decision& x, std::size_t i) {
  return std::visit(
      [&](const auto& model) -> double {
        using M = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<M, Newsvendor>) {
          return newsvendor_cost(model.s, std::get<ScalarLevel>(x).x, instance.support[i]);
        } else if constexpr (std::is_same_v<M, Mse>) {
          const double diff = std::get<ScalarLevel>(x).x - instance.support[i];
          return diff * diff;
        } else {
          return model.costs[std::get<TableIndex>(x).j][i];
        }
      },
      instance.cost);
}

double decision_cost_at(const CostModel& cost, const Decision& x, double xi) {
  if (const auto* nv = std::get_if<Newsvendor>(&cost)) {
    return newsvendor_cost(nv->s, std::get<ScalarLevel>(x).x, xi);
  }
  if (std::holds_alternative<Mse>(cost)) {
    const double diff = std::get<ScalarLevel>(x).x - xi;
    return diff * diff;
  }
  throw Error(ErrorCode::InvalidArgument, "table costs are only defined on support indices");
}

double expected_cost(const SubproblemInstance& instance, const Decision& x,
                     std::span<const double> measure) {
  double total = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    if (measure[i] != 0.0) total += measure[i] * decision_cost(instance, x, i);
  }
  return total;
}

Decision solve_measure(const SubproblemInstance& instance, std::span<const double> measure) {
  return std::visit(
      [&](const auto& model) -> Decision {
        using M = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<M, Newsvendor>) {
          return ScalarLevel{instance.support[newsvendor_index(model.s, measure)]};
        } else if constexpr (std::is_same_v<M, Mse>) {
          double mean = 0.0;
          for (std::size_t i = 0; i < measure.size(); ++i) mean += measure[i] * instance.support[i];
          return ScalarLevel{mean};
        } else {
          if (model.costs.empty()) throw Error(ErrorCode::EmptyFeasibleSet, "cost table has no rows");
          return TableIndex{lowest_argmin(model.costs.size(), [&](std::size_t j) {
            return row_cost(model.costs[j], measure);
          })};
        }
      },
      instance.cost);
}

Decision solve_plugin(const SubproblemInstance& instance, const Distribution& measure) {
  if (measure.size() != instance.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "measure and support differ in length");
  }
  return solve_measure(instance, measure.probs());
}

Decision solve_shrunken(const SubproblemInstance& instance, const Distribution& anchor, Alpha alpha) {
  return solve_plugin(instance, shrunken_measure(instance.counts, anchor, alpha));
}

ShrunkenSolver::ShrunkenSolver(const SubproblemInstance& instance, std::span<const double> anchor)
    : instance_(instance),
      anchor_(anchor),
      measure_(instance.dimension()),
      counts_(instance.counts.values().begin(), instance.counts.values().end()) {
  if (anchor.size() != instance.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "anchor and support differ in length");
  }
}

Decision ShrunkenSolver::solve(std::span<const std::int64_t> counts, std::int64_t total, Alpha alpha) {
  fill_shrunken(counts, total, anchor_, alpha, measure_);
  return solve_measure(instance_, measure_);
}

Decision ShrunkenSolver::solve_leave_one_out(std::size_t i, Alpha alpha) {
  counts_[i] -= 1;
  Decision x = solve(counts_, instance_.counts.total() - 1, alpha);
  counts_[i] += 1;
  return x;
}

Decision AlphaPath::lookup(Alpha alpha) const {
  if (alpha == 0.0) return at_zero;
  if (std::isinf(alpha)) return at_infinity;
  const auto it = std::lower_bound(tie_hi.begin(), tie_hi.end(), alpha);
  const auto idx = static_cast<std::size_t>(it - tie_hi.begin());
  if (it != tie_hi.end() && tie_lo[idx] <= alpha) return at_breakpoints[idx];
  return decisions[idx];
}

Table lower_to_table(const SubproblemInstance& instance) {
  const auto* nv = std::get_if<Newsvendor>(&instance.cost);
  if (!nv) throw Error(ErrorCode::InvalidArgument, "only newsvendor costs lower to a table");
  const std::size_t d = instance.dimension();
  Table table;
  table.costs.assign(d, std::vector<double>(d));
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      table.costs[j][i] = newsvendor_cost(nv->s, instance.support[j], instance.support[i]);
    }
  }
  return table;
}

namespace {

struct Line {
  double slope;
  double intercept;
  std::size_t index;  // lowest index among identical lines
};

// theta where two lines with slope a.slope > b.slope meet.
double crossing(const Line& a, const Line& b) {
  return (b.intercept - a.intercept) / (a.slope - b.slope);
}

}  // namespace

AlphaPath alpha_path(const SubproblemInstance& instance, const Distribution& anchor) {
  if (anchor.size() != instance.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "anchor and support differ in length");
  }
  Table lowered;
  const Table* table = std::get_if<Table>(&instance.cost);
  const bool scalar = std::holds_alternative<Newsvendor>(instance.cost);
  if (scalar) {
    lowered = lower_to_table(instance);
    table = &lowered;
  } else if (!table) {
    throw Error(ErrorCode::InvalidArgument, "alpha path requires a finite feasible set");
  }
  if (table->costs.empty()) throw Error(ErrorCode::EmptyFeasibleSet, "cost table has no rows");

  const std::size_t rows = table->costs.size();
  auto to_decision = [&](std::size_t j) -> Decision {
    if (scalar) return ScalarLevel{instance.support[j]};
    return TableIndex{j};
  };

  std::vector<double> at_one(rows);
  for (std::size_t j = 0; j < rows; ++j) at_one[j] = row_cost(table->costs[j], anchor.probs());

  AlphaPath path;
  path.total_count = instance.counts.total();
  path.at_infinity = to_decision(lowest_argmin(rows, [&](std::size_t j) { return at_one[j]; }));
  if (path.total_count == 0) {
    path.at_zero = path.at_infinity;
    path.decisions = {path.at_infinity};
    return path;
  }

  const Distribution empirical = empirical_distribution(instance.counts);
  std::vector<double> at_zero(rows);
  for (std::size_t j = 0; j < rows; ++j) at_zero[j] = row_cost(table->costs[j], empirical.probs());
  path.at_zero = to_decision(lowest_argmin(rows, [&](std::size_t j) { return at_zero[j]; }));

  std::vector<Line> lines(rows);
  for (std::size_t j = 0; j < rows; ++j) lines[j] = {at_one[j] - at_zero[j], at_zero[j], j};
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.slope != b.slope) return a.slope > b.slope;
    if (a.intercept != b.intercept) return a.intercept < b.intercept;
    return a.index < b.index;
  });

  // Parallel lines: keep the lowest; identical lines collapse to the lowest index.
  std::vector<Line> distinct;
  for (const Line& l : lines) {
    if (!distinct.empty() && std::abs(distinct.back().slope - l.slope) <= kTieTolerance) {
      Line& kept = distinct.back();
      if (std::abs(kept.intercept - l.intercept) <= kTieTolerance) {
        kept.index = std::min(kept.index, l.index);
      } else if (l.intercept < kept.intercept) {
        kept = l;
      }
      continue;
    }
    distinct.push_back(l);
  }

  // Lower envelope over the real line, slopes decreasing left to right.
  std::vector<Line> hull;
  for (const Line& l : distinct) {
    while (hull.size() >= 2 &&
           crossing(hull[hull.size() - 2], l) <= crossing(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(l);
  }

  // Restrict to theta in (0, 1).
  std::size_t first = 0;
  while (first + 1 < hull.size() && crossing(hull[first], hull[first + 1]) <= kTieTolerance) ++first;
  std::vector<double> thetas;
  std::vector<double> widths;
  std::vector<std::size_t> active{hull[first].index};
  for (std::size_t h = first; h + 1 < hull.size(); ++h) {
    const double theta = crossing(hull[h], hull[h + 1]);
    if (theta >= 1.0 - kTieTolerance) break;
    const double width = kTieTolerance / (hull[h].slope - hull[h + 1].slope);
    if (!thetas.empty() && theta - thetas.back() <= kTieTolerance) {
      widths.back() = std::max(widths.back(), theta - thetas.back() + width);
      thetas.back() = theta;
      active.back() = hull[h + 1].index;
      continue;
    }
    thetas.push_back(theta);
    widths.push_back(width);
    active.push_back(hull[h + 1].index);
  }

  const double n = static_cast<double>(path.total_count);
  for (std::size_t b = 0; b < thetas.size(); ++b) {
    const double theta = thetas[b];
    auto to_alpha = [n](double t) { return t * n / (1.0 - t); };
    path.breakpoints.push_back(to_alpha(theta));
    const double lo = b > 0 ? (thetas[b - 1] + theta) / 2 : 0.0;
    const double hi = b + 1 < thetas.size() ? (thetas[b + 1] + theta) / 2 : 1.0;
    path.tie_lo.push_back(to_alpha(std::max(theta - widths[b], lo)));
    path.tie_hi.push_back(theta + widths[b] >= hi ? (b + 1 < thetas.size() ? to_alpha(hi) : kInfiniteAlpha)
                                                  : to_alpha(theta + widths[b]));
    path.at_breakpoints.push_back(to_decision(lowest_argmin(rows, [&](std::size_t j) {
      return (1.0 - theta) * at_zero[j] + theta * at_one[j];
    })));
  }
  for (std::size_t idx : active) path.decisions.push_back(to_decision(idx));
  return path;
}

}  // namespace ssaa
