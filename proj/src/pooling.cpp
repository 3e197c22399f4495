#include "ssaa/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "ssaa/parallel.hpp"
#include "ssaa/rng.hpp"
#include "ssaa/solvers.hpp"

namespace ssaa {

const char* to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::Loo: return "LOO";
    case SelectionMethod::KFold: return "KFold";
    case SelectionMethod::JamesStein: return "JS";
    case SelectionMethod::APriori: return "AP";
    case SelectionMethod::Oracle: return "Oracle";
  }
  return "Unknown";
}

BetaFamily BetaFamily::full_grid() {
  BetaFamily f;
  for (int i = 0; i <= 20; ++i) f.mean_grid.push_back(i == 0 ? 1e-6 : 0.05 * i);
  for (int i = 0; i <= 60; ++i) f.shape_grid.push_back(i == 0 ? 1e-6 : 0.05 * i);
  return f;
}

BetaFamily BetaFamily::coarse_grid() {
  BetaFamily f;
  for (int i = 0; i <= 10; ++i) f.mean_grid.push_back(i == 0 ? 1e-6 : 0.1 * i);
  for (int i = 0; i <= 6; ++i) f.shape_grid.push_back(i == 0 ? 1e-6 : 0.5 * i);
  return f;
}

AlphaGrid AlphaGrid::linspace(double lo, double hi, std::size_t n, bool with_infinity) {
  AlphaGrid g;
  if (n == 1) {
    g.values.push_back(lo);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      g.values.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
  }
  if (with_infinity) g.values.push_back(kInfiniteAlpha);
  return g;
}

AlphaGrid AlphaGrid::default_grid() { return linspace(0.0, 180.0, 120, true); }

void AlphaGrid::validate() const {
  if (values.empty()) throw Error(ErrorCode::EmptyGrid, "alpha grid is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha grid values must be >= 0");
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "alpha grid must be strictly increasing");
    }
  }
}

std::size_t first_argmin(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

Distribution grand_mean(const Dataset& dataset) {
  if (dataset.problems.empty()) throw Error(ErrorCode::InvalidArgument, "dataset needs K >= 1");
  const std::size_t d = dataset.problems.front().dimension();
  std::vector<double> sum(d, 0.0);
  std::size_t with_data = 0;
  for (const auto& p : dataset.problems) {
    if (p.dimension() != d) {
      throw Error(ErrorCode::DimensionMismatch, "grand-mean anchor needs a common support size");
    }
    const auto n = p.counts.total();
    if (n == 0) continue;
    ++with_data;
    for (std::size_t i = 0; i < d; ++i) {
      sum[i] += static_cast<double>(p.counts[i]) / static_cast<double>(n);
    }
  }
  if (with_data == 0) return Distribution::uniform(d);
  for (double& v : sum) v /= static_cast<double>(with_data);
  return Distribution(std::move(sum));
}

Distribution beta_bins(double mu, double shape, std::size_t d) {
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "beta anchor needs d >= 1");
  if (!(mu > 0.0 && mu <= 1.0) || !(shape > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "beta anchor needs mu in (0,1] and shape > 0");
  }
  if (mu >= 1.0) return Distribution::point_mass(d, d - 1);
  const double a = mu * shape / (1.0 - mu);
  const double b = shape;
  std::vector<double> p(d);
  bool ok = true;
  double previous = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double upper = 1.0;
    if (i + 1 < d) {
      try {
        upper = boost::math::ibeta(a, b, static_cast<double>(i + 1) / static_cast<double>(d));
      } catch (...) {
        ok = false;
        break;
      }
    }
    if (!std::isfinite(upper)) {
      ok = false;
      break;
    }
    p[i] = std::max(upper - previous, 0.0);
    previous = std::max(previous, upper);
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!ok || !(total > 0.0)) {
    const auto bin = std::min(static_cast<std::size_t>(mu * static_cast<double>(d)), d - 1);
    return Distribution::point_mass(d, bin);
  }
  for (double& v : p) v /= total;
  return Distribution(std::move(p));
}

Anchors beta_anchor(double mu, double shape, const Dataset& dataset) {
  Anchors out;
  out.reserve(dataset.size());
  for (const auto& p : dataset.problems) out.push_back(beta_bins(mu, shape, p.dimension()));
  return out;
}

std::vector<Anchors> beta_candidates(const BetaFamily& family, const Dataset& dataset) {
  if (family.mean_grid.empty() || family.shape_grid.empty()) {
    throw Error(ErrorCode::EmptyCandidates, "beta family grids must be non-empty");
  }
  std::vector<Anchors> out;
  for (double mu : family.mean_grid) {
    for (double shape : family.shape_grid) out.push_back(beta_anchor(mu, shape, dataset));
  }
  return out;
}

Anchors replicate(const Distribution& anchor, std::size_t K) { return Anchors(K, anchor); }

Anchors resolve_anchor(const AnchorSpec& spec, const Dataset& dataset) {
  const std::size_t K = dataset.size();
  if (const auto* f = std::get_if<FixedAnchor>(&spec)) {
    for (const auto& p : dataset.problems) {
      if (p.dimension() != f->dist.size()) {
        throw Error(ErrorCode::DimensionMismatch, "fixed anchor and support differ in length");
      }
    }
    return replicate(f->dist, K);
  }
  if (std::holds_alternative<GrandMean>(spec)) return replicate(grand_mean(dataset), K);
  if (const auto* b = std::get_if<BetaFamily>(&spec)) {
    if (b->mean_grid.size() != 1 || b->shape_grid.size() != 1) {
      throw Error(ErrorCode::InvalidArgument, "a beta family with several members needs joint selection");
    }
    return beta_anchor(b->mean_grid.front(), b->shape_grid.front(), dataset);
  }
  const auto& loo = std::get<LooOptimized>(spec);
  if (loo.candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no anchor candidates");
  if (loo.candidates.size() != 1) {
    throw Error(ErrorCode::InvalidArgument, "several anchor candidates need joint selection");
  }
  return replicate(loo.candidates.front(), K);
}

std::vector<double> anchor_means(const Dataset& dataset, const Anchors& anchors) {
  std::vector<double> out(dataset.size());
  for (std::size_t k = 0; k < dataset.size(); ++k) out[k] = anchors[k].mean(dataset.problems[k].support);
  return out;
}

namespace {

void check_anchors(const Dataset& dataset, const Anchors& anchors) {
  if (anchors.size() != dataset.size()) {
    throw Error(ErrorCode::DimensionMismatch, "need one anchor per problem");
  }
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    if (anchors[k].size() != dataset.problems[k].dimension()) {
      throw Error(ErrorCode::DimensionMismatch, "anchor and support differ in length");
    }
  }
}

void check_alphas(std::span<const Alpha> alphas) {
  for (Alpha a : alphas) {
    if (!(a >= 0.0)) throw Error(ErrorCode::InvalidArgument, "pooling amount must be nonnegative");
  }
}

// Per-problem contributions in a K x |alphas| table, summed in problem order.
template <class PerProblem>
std::vector<double> ordered_curve(std::size_t K, std::size_t n_alpha, PerProblem per_problem) {
  std::vector<double> table(K * n_alpha, 0.0);
  parallel_for(K, [&](std::size_t k) { per_problem(k, std::span<double>(table.data() + k * n_alpha, n_alpha)); });
  std::vector<double> out(n_alpha, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t a = 0; a < n_alpha; ++a) out[a] += table[k * n_alpha + a];
  }
  return out;
}

PoolingSelection select_from_table(const std::vector<std::vector<double>>& by_candidate,
                                   std::span<const Alpha> alphas) {
  PoolingSelection sel;
  double best = 0.0;
  bool found = false;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    for (std::size_t c = 0; c < by_candidate.size(); ++c) {
      const double v = by_candidate[c][a];
      sel.trace.push_back({alphas[a], c, v});
      if (!found || v < best) {
        best = v;
        found = true;
        sel.alpha = alphas[a];
        sel.anchor_id = c;
      }
    }
  }
  return sel;
}

}  // namespace

std::vector<double> loo_curve(const Dataset& dataset, const Anchors& anchors,
                              std::span<const Alpha> alphas) {
  check_anchors(dataset, anchors);
  check_alphas(alphas);
  return ordered_curve(dataset.size(), alphas.size(), [&](std::size_t k, std::span<double> out) {
    const auto& inst = dataset.problems[k];
    if (inst.counts.total() == 0) return;
    ShrunkenSolver solver(inst, anchors[k].probs());
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      double sum = 0.0;
      for (std::size_t i = 0; i < inst.dimension(); ++i) {
        const auto m = inst.counts[i];
        if (m == 0) continue;
        sum += static_cast<double>(m) * decision_cost(inst, solver.solve_leave_one_out(i, alphas[a]), i);
      }
      out[a] = sum;
    }
  });
}

double loo_criterion(const Dataset& dataset, const Anchors& anchors, Alpha alpha) {
  const Alpha one[] = {alpha};
  return loo_curve(dataset, anchors, one).front();
}

PoolingSelection select_alpha_loo(const Dataset& dataset, const Anchors& anchors, const AlphaGrid& grid) {
  return select_joint_hloo(dataset, std::vector<Anchors>{anchors}, grid);
}

PoolingSelection select_alpha_loo(const Dataset& dataset, const AnchorSpec& spec, const AlphaGrid& grid) {
  return select_alpha_loo(dataset, resolve_anchor(spec, dataset), grid);
}

PoolingSelection select_joint_hloo(const Dataset& dataset, const std::vector<Anchors>& candidates,
                                   const AlphaGrid& grid) {
  grid.validate();
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no anchor candidates");
  std::vector<std::vector<double>> curves;
  curves.reserve(candidates.size());
  for (const auto& c : candidates) curves.push_back(loo_curve(dataset, c, grid.values));
  PoolingSelection sel = select_from_table(curves, grid.values);
  sel.anchors = candidates[sel.anchor_id];
  sel.method = SelectionMethod::Loo;
  return sel;
}

PoolingSelection select_joint_hloo(const Dataset& dataset, const std::vector<Distribution>& candidates,
                                   const AlphaGrid& grid) {
  std::vector<Anchors> expanded;
  expanded.reserve(candidates.size());
  for (const auto& c : candidates) expanded.push_back(replicate(c, dataset.size()));
  return select_joint_hloo(dataset, expanded, grid);
}

std::vector<double> kfold_curve(const Dataset& dataset, const Anchors& anchors,
                                std::span<const Alpha> alphas, int kappa, std::uint64_t seed) {
  if (kappa < 2) throw Error(ErrorCode::InvalidArgument, "kappa must be at least 2");
  check_anchors(dataset, anchors);
  check_alphas(alphas);
  const auto folds = static_cast<std::size_t>(kappa);
  return ordered_curve(dataset.size(), alphas.size(), [&](std::size_t k, std::span<double> out) {
    const auto& inst = dataset.problems[k];
    const std::size_t d = inst.dimension();
    if (inst.counts.total() == 0) return;
    std::vector<std::size_t> observations;
    for (std::size_t i = 0; i < d; ++i) observations.insert(observations.end(), inst.counts[i], i);
    Rng rng(seed, k, 0, Purpose::Fold);
    rng.shuffle(observations);

    // held[f][i]: observations of support index i in fold f.
    std::vector<std::vector<std::int64_t>> held(folds, std::vector<std::int64_t>(d, 0));
    for (std::size_t pos = 0; pos < observations.size(); ++pos) ++held[pos % folds][observations[pos]];

    ShrunkenSolver solver(inst, anchors[k].probs());
    std::vector<std::int64_t> train(d);
    for (std::size_t f = 0; f < folds; ++f) {
      std::int64_t held_total = 0;
      for (std::size_t i = 0; i < d; ++i) {
        train[i] = inst.counts[i] - held[f][i];
        held_total += held[f][i];
      }
      if (held_total == 0) continue;
      const std::int64_t train_total = inst.counts.total() - held_total;
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        const Decision x = solver.solve(train, train_total, alphas[a]);
        double sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
          if (held[f][i] > 0) sum += static_cast<double>(held[f][i]) * decision_cost(inst, x, i);
        }
        out[a] += sum;
      }
    }
  });
}

double kfold_criterion(const Dataset& dataset, const Anchors& anchors, Alpha alpha, int kappa,
                       std::uint64_t seed) {
  const Alpha one[] = {alpha};
  return kfold_curve(dataset, anchors, one, kappa, seed).front();
}

PoolingSelection select_alpha_kfold(const Dataset& dataset, const Anchors& anchors,
                                    const AlphaGrid& grid, int kappa, std::uint64_t seed) {
  grid.validate();
  PoolingSelection sel =
      select_from_table({kfold_curve(dataset, anchors, grid.values, kappa, seed)}, grid.values);
  sel.anchors = anchors;
  sel.method = SelectionMethod::KFold;
  sel.folds = kappa;
  sel.seed = seed;
  return sel;
}

namespace {

struct Moments {
  double n;
  double mean;
  double variance;  // unbiased
};

Alpha js_from_moments(const std::vector<Moments>& moments, std::span<const double> anchor_means) {
  double variance_sum = 0.0;
  double distance_sum = 0.0;
  double count_sum = 0.0;
  std::size_t included = 0;
  for (std::size_t k = 0; k < moments.size(); ++k) {
    const auto& m = moments[k];
    if (m.n < 2.0) continue;
    variance_sum += m.variance;
    const double gap = anchor_means[k] - m.mean;
    distance_sum += gap * gap;
    count_sum += m.n;
    ++included;
  }
  if (included == 0) throw Error(ErrorCode::InsufficientData, "no problem has two or more observations");
  const double kk = static_cast<double>(included);
  const double numerator = variance_sum / kk;
  const double denominator = distance_sum / kk - variance_sum / (kk * (count_sum / kk));
  if (numerator == 0.0) return 0.0;
  if (!(denominator > 0.0)) return kInfiniteAlpha;
  return numerator / denominator;
}

}  // namespace

Alpha alpha_js(const Dataset& dataset, std::span<const double> anchor_means) {
  if (anchor_means.size() != dataset.size()) {
    throw Error(ErrorCode::DimensionMismatch, "need one anchor mean per problem");
  }
  std::vector<Moments> moments;
  for (const auto& p : dataset.problems) {
    const double n = static_cast<double>(p.counts.total());
    Moments m{n, 0.0, 0.0};
    if (n >= 2.0) {
      for (std::size_t i = 0; i < p.dimension(); ++i) m.mean += static_cast<double>(p.counts[i]) * p.support[i];
      m.mean /= n;
      double ss = 0.0;
      for (std::size_t i = 0; i < p.dimension(); ++i) {
        const double dev = p.support[i] - m.mean;
        ss += static_cast<double>(p.counts[i]) * dev * dev;
      }
      m.variance = ss / (n - 1.0);
    }
    moments.push_back(m);
  }
  return js_from_moments(moments, anchor_means);
}

Alpha alpha_js(const std::vector<std::vector<double>>& samples, std::span<const double> anchor_means) {
  if (anchor_means.size() != samples.size()) {
    throw Error(ErrorCode::DimensionMismatch, "need one anchor mean per problem");
  }
  std::vector<Moments> moments;
  for (const auto& xs : samples) {
    const double n = static_cast<double>(xs.size());
    Moments m{n, 0.0, 0.0};
    if (n >= 2.0) {
      for (double x : xs) m.mean += x;
      m.mean /= n;
      double ss = 0.0;
      for (double x : xs) ss += (x - m.mean) * (x - m.mean);
      m.variance = ss / (n - 1.0);
    }
    moments.push_back(m);
  }
  return js_from_moments(moments, anchor_means);
}

Alpha alpha_ap(std::span<const double> mu, std::span<const double> variance,
               std::span<const double> anchor_means) {
  if (mu.size() != variance.size() || mu.size() != anchor_means.size()) {
    throw Error(ErrorCode::DimensionMismatch, "alpha_ap inputs differ in length");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    num += variance[k];
    den += (mu[k] - anchor_means[k]) * (mu[k] - anchor_means[k]);
  }
  if (num == 0.0) return 0.0;
  if (den == 0.0) return kInfiniteAlpha;
  return num / den;
}

}  // namespace ssaa
