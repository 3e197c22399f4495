#include "ssaa/oracle.hpp"

#include <algorithm>

#include "ssaa/parallel.hpp"
#include "ssaa/solvers.hpp"

namespace ssaa {

namespace {

void require_truth(const Dataset& dataset) {
  if (!dataset.has_truth()) throw Error(ErrorCode::MissingTruth, "every problem needs a true distribution");
}

double relative_weight(const Dataset& dataset, std::size_t k) {
  return dataset.problems[k].weight / dataset.mean_weight();
}

double true_cost(const SubproblemInstance& inst, const Decision& x) {
  return expected_cost(inst, x, inst.truth->probs());
}

}  // namespace

PerfSummary z_perf(const Dataset& dataset, const Anchors& anchors, Alpha alpha) {
  require_truth(dataset);
  if (anchors.size() != dataset.size()) throw Error(ErrorCode::DimensionMismatch, "need one anchor per problem");
  const std::size_t K = dataset.size();
  PerfSummary out;
  out.per_problem.resize(K);
  out.full_info_per_problem.resize(K);
  parallel_for(K, [&](std::size_t k) {
    const auto& inst = dataset.problems[k];
    const double w = relative_weight(dataset, k);
    out.per_problem[k] = w * true_cost(inst, solve_shrunken(inst, anchors[k], alpha));
    out.full_info_per_problem[k] = w * true_cost(inst, solve_plugin(inst, *inst.truth));
  });
  for (std::size_t k = 0; k < K; ++k) {
    out.z_perf += out.per_problem[k];
    out.z_full_info += out.full_info_per_problem[k];
  }
  out.z_perf /= static_cast<double>(K);
  out.z_full_info /= static_cast<double>(K);
  return out;
}

std::vector<double> z_perf_curve(const Dataset& dataset, const Anchors& anchors,
                                 std::span<const Alpha> alphas) {
  require_truth(dataset);
  if (anchors.size() != dataset.size()) throw Error(ErrorCode::DimensionMismatch, "need one anchor per problem");
  const std::size_t K = dataset.size();
  const std::size_t n = alphas.size();
  std::vector<double> table(K * n);
  parallel_for(K, [&](std::size_t k) {
    const auto& inst = dataset.problems[k];
    const double w = relative_weight(dataset, k);
    ShrunkenSolver solver(inst, anchors[k].probs());
    for (std::size_t a = 0; a < n; ++a) table[k * n + a] = w * true_cost(inst, solver.solve(alphas[a]));
  });
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t a = 0; a < n; ++a) out[a] += table[k * n + a];
  }
  for (double& v : out) v /= static_cast<double>(K);
  return out;
}

double full_information(const Dataset& dataset) {
  require_truth(dataset);
  const std::size_t K = dataset.size();
  std::vector<double> per(K);
  parallel_for(K, [&](std::size_t k) {
    const auto& inst = dataset.problems[k];
    per[k] = relative_weight(dataset, k) * true_cost(inst, solve_plugin(inst, *inst.truth));
  });
  double sum = 0.0;
  for (double v : per) sum += v;
  return sum / static_cast<double>(K);
}

PoolingSelection select_alpha_oracle(const Dataset& dataset, const Anchors& anchors, const AlphaGrid& grid) {
  return select_joint_oracle(dataset, std::vector<Anchors>{anchors}, grid);
}

PoolingSelection select_joint_oracle(const Dataset& dataset, const std::vector<Anchors>& candidates,
                                     const AlphaGrid& grid) {
  grid.validate();
  require_truth(dataset);
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no anchor candidates");
  PoolingSelection sel;
  sel.method = SelectionMethod::Oracle;
  std::vector<std::vector<double>> curves;
  for (const auto& c : candidates) curves.push_back(z_perf_curve(dataset, c, grid.values));
  double best = 0.0;
  bool found = false;
  for (std::size_t a = 0; a < grid.values.size(); ++a) {
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double v = curves[c][a];
      sel.trace.push_back({grid.values[a], c, v});
      if (!found || v < best) {
        best = v;
        found = true;
        sel.alpha = grid.values[a];
        sel.anchor_id = c;
      }
    }
  }
  sel.anchors = candidates[sel.anchor_id];
  return sel;
}

PoolingSelection select_joint_oracle(const Dataset& dataset, const std::vector<Distribution>& candidates,
                                     const AlphaGrid& grid) {
  std::vector<Anchors> expanded;
  for (const auto& c : candidates) expanded.push_back(replicate(c, dataset.size()));
  return select_joint_oracle(dataset, expanded, grid);
}

double sub_opt(const Dataset& dataset, const Anchors& anchors, Alpha alpha,
               const PoolingSelection& reference) {
  const Alpha both[] = {alpha};
  const double here = z_perf_curve(dataset, anchors, both).front();
  const Alpha ref[] = {reference.alpha};
  const double best = z_perf_curve(dataset, reference.anchors, ref).front();
  return here - best;
}

std::vector<Decomposition> decompose_curve(const Dataset& dataset, const Anchors& anchors,
                                           std::span<const Alpha> alphas, double scale) {
  if (anchors.size() != dataset.size()) throw Error(ErrorCode::DimensionMismatch, "need one anchor per problem");
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  const std::size_t K = dataset.size();
  const std::size_t n = alphas.size();
  // Per problem and alpha: SAA-SubOpt, Instability, SAA(0).
  std::vector<double> table(K * n * 3, 0.0);
  parallel_for(K, [&](std::size_t k) {
    const auto& inst = dataset.problems[k];
    if (inst.counts.total() == 0) return;
    ShrunkenSolver solver(inst, anchors[k].probs());
    const Decision saa = solver.solve(0.0);
    for (std::size_t a = 0; a < n; ++a) {
      const Decision pooled = solver.solve(alphas[a]);
      double subopt = 0.0;
      double instability = 0.0;
      double saa0 = 0.0;
      for (std::size_t i = 0; i < inst.dimension(); ++i) {
        const auto m = inst.counts[i];
        if (m == 0) continue;
        const double md = static_cast<double>(m);
        const double c_saa = decision_cost(inst, saa, i);
        const double c_pooled = decision_cost(inst, pooled, i);
        const double c_loo = decision_cost(inst, solver.solve_leave_one_out(i, alphas[a]), i);
        subopt += md * (c_pooled - c_saa);
        instability += md * (c_loo - c_pooled);
        saa0 += md * c_saa;
      }
      double* slot = &table[(k * n + a) * 3];
      slot[0] = subopt;
      slot[1] = instability;
      slot[2] = saa0;
    }
  });
  std::vector<Decomposition> out(n);
  for (std::size_t a = 0; a < n; ++a) {
    out[a].alpha = alphas[a];
    out[a].scale = scale;
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      const double* slot = &table[(k * n + a) * 3];
      out[a].saa_subopt += slot[0];
      out[a].instability += slot[1];
      out[a].saa0 += slot[2];
    }
  }
  for (auto& dcmp : out) {
    dcmp.saa_subopt /= static_cast<double>(K);
    dcmp.instability /= static_cast<double>(K);
    dcmp.saa0 /= static_cast<double>(K);
  }
  return out;
}

Decomposition decompose(const Dataset& dataset, const Anchors& anchors, Alpha alpha, double scale) {
  const Alpha one[] = {alpha};
  return decompose_curve(dataset, anchors, one, scale).front();
}

}  // namespace ssaa
