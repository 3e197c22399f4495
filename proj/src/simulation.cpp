#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "policies.hpp"
#include "ssaa/experiments.hpp"
#include "ssaa/oracle.hpp"
#include "ssaa/rng.hpp"

namespace ssaa {

namespace {

std::vector<double> draw_truth(const TruthModel& model, std::size_t d, Rng& rng) {
  switch (model.kind) {
    case TruthKind::DirichletUniform:
      return rng.dirichlet_uniform(d);
    case TruthKind::Dirichlet:
      return rng.dirichlet(model.concentration);
    case TruthKind::Mixture: {
      const double u = rng.uniform();
      double cumulative = 0.0;
      for (std::size_t c = 0; c < model.components.size(); ++c) {
        cumulative += model.proportions[c];
        if (u < cumulative || c + 1 == model.components.size()) return draw_truth(model.components[c], d, rng);
      }
      break;
    }
    case TruthKind::Bernoulli: {
      const double p1 = rng.uniform(model.p_lo, model.p_hi);
      return {1.0 - p1, p1};
    }
    case TruthKind::Spike: {
      std::vector<double> p(d, 0.0);
      p[1 + rng.below(d - 2)] = model.spike;
      p[d - 1] = 1.0 - model.spike;
      return p;
    }
    case TruthKind::FromEmpirical:
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "truth model cannot be drawn per problem");
}

std::vector<double> integer_support(std::size_t d) {
  std::vector<double> s(d);
  for (std::size_t i = 0; i < d; ++i) s[i] = static_cast<double>(i + 1);
  return s;
}

}  // namespace

bool known_policy(const std::string& name) { return detail::parse_policy(name).has_value(); }

Population draw_population(const SimSpec& spec) {
  spec.validate();
  Population pop;
  const std::size_t K = spec.K;
  pop.weights.assign(K, 1.0);
  if (spec.data.kind == DataKind::Poisson) {
    for (std::size_t k = 0; k < K; ++k) {
      Rng rng(spec.seed, k, 0, Purpose::Weight);
      pop.weights[k] = spec.data.lambda_lo == spec.data.lambda_hi
                           ? spec.data.lambda_lo
                           : rng.uniform(spec.data.lambda_lo, spec.data.lambda_hi);
    }
  }

  if (spec.truth.kind == TruthKind::FromEmpirical) {
    auto stores = spec.truth.stores.empty() ? read_demand_csv(spec.truth.csv_path) : spec.truth.stores;
    stores = clean_series(std::move(stores), spec.truth.cleaning);
    if (stores.size() < K) {
      throw Error(ErrorCode::InsufficientData,
                  "demand data has " + std::to_string(stores.size()) + " stores, K = " + std::to_string(K));
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (stores[k].demand.empty()) throw Error(ErrorCode::InsufficientData, "store " + stores[k].id + " has no data");
      const Discretization bins = discretize(stores[k].demand, spec.d);
      if (bins.degenerate) {
        throw Error(ErrorCode::DegenerateRange, "store " + stores[k].id + " has constant demand");
      }
      pop.supports.push_back(bins.support);
      pop.truths.push_back(empirical_distribution(bins.counts(stores[k].demand)));
    }
    return pop;
  }

  for (std::size_t k = 0; k < K; ++k) {
    if (spec.support == SupportKind::Random) {
      Rng rng(spec.seed, k, 0, Purpose::Support);
      std::vector<double> s;
      while (s.size() < spec.d) {
        s.push_back(rng.uniform(spec.support_lo, spec.support_hi));
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
      }
      pop.supports.push_back(std::move(s));
    } else {
      pop.supports.push_back(spec.truth.kind == TruthKind::Bernoulli ? std::vector<double>{0.0, 1.0}
                                                                     : integer_support(spec.d));
    }
    Rng rng(spec.seed, k, 0, Purpose::Truth);
    pop.truths.emplace_back(draw_truth(spec.truth, spec.d, rng));
  }
  return pop;
}

Dataset sample_dataset(const SimSpec& spec, const Population& pop, std::size_t rep) {
  const std::size_t K = pop.truths.size();
  Dataset data;
  data.problems.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    auto& inst = data.problems[k];
    inst.support = pop.supports[k];
    if (spec.cost == CostKind::Mse) {
      inst.cost = Mse{};
    } else {
      inst.cost = Newsvendor{spec.s};
    }
    inst.weight = pop.weights[k];
    inst.truth = pop.truths[k];
    std::int64_t n = spec.data.fixed_n;
    if (spec.data.kind == DataKind::Poisson) {
      Rng rng(spec.seed, k, rep, Purpose::SampleSize);
      n = rng.poisson(spec.data.N * pop.weights[k]);
    }
    Rng rng(spec.seed, k, rep, Purpose::Counts);
    inst.counts = Counts(rng.multinomial(n, pop.truths[k].probs()));
  }
  return data;
}

Dataset gen_instance(const SimSpec& spec, std::size_t rep) {
  return sample_dataset(spec, draw_population(spec), rep);
}

double loo_scale(const SimSpec& spec, const Dataset& dataset) {
  if (spec.data.kind != DataKind::Poisson || spec.data.N <= 0.0) return 1.0;
  return 1.0 / (spec.data.N * dataset.mean_weight());
}

namespace {

detail::PolicyContext make_context(const SimSpec& spec, std::size_t rep) {
  detail::PolicyContext ctx;
  ctx.grid = spec.grid;
  ctx.beta = spec.beta;
  ctx.ks = spec.ks;
  ctx.fixed_anchor = spec.anchor ? *spec.anchor : Distribution::uniform(spec.d);
  ctx.seed = spec.seed;
  ctx.rep = rep;
  return ctx;
}

}  // namespace

ExperimentReport run_simulation(const SimSpec& spec) {
  const Population pop = draw_population(spec);
  ExperimentReport report;
  report.seed = spec.seed;
  const auto saa = *detail::parse_policy("SAA");
  for (std::size_t rep = 0; rep < spec.reps; ++rep) {
    const Dataset data = sample_dataset(spec, pop, rep);
    const auto ctx = make_context(spec, rep);
    const double full_info = full_information(data);
    const double z_saa = detail::true_performance(data, detail::run_policy(saa, data, ctx).decisions);
    for (const auto& name : spec.policies) {
      const auto policy = *detail::parse_policy(name);
      const auto result = name == "SAA" ? detail::PolicyResult{{}, 0.0} : detail::run_policy(policy, data, ctx);
      const double z = name == "SAA" ? z_saa : detail::true_performance(data, result.decisions);
      const long r = static_cast<long>(rep);
      report.add(r, spec.K, name, result.alpha, "alpha", result.alpha);
      report.add(r, spec.K, name, result.alpha, "z_perf", z);
      report.add(r, spec.K, name, result.alpha, "loss_to_full_info", z - full_info);
      report.add(r, spec.K, name, result.alpha, "benefit_pct", z_saa > 0.0 ? 100.0 * (z_saa - z) / z_saa : 0.0);
    }
    spdlog::debug("simulation rep {} of {} done", rep + 1, spec.reps);
  }
  report.aggregate();
  return report;
}

ExperimentReport run_diagnostics(const SimSpec& spec) {
  const Population pop = draw_population(spec);
  const Dataset data = sample_dataset(spec, pop, 0);
  const bool fixed = spec.anchor.has_value();
  const Anchors anchors = fixed ? replicate(*spec.anchor, data.size()) : replicate(grand_mean(data), data.size());
  const std::string policy = fixed ? "S-SAA-Fixed" : "S-SAA-GM";
  const double scale = loo_scale(spec, data);

  const auto curve = decompose_curve(data, anchors, spec.grid.values, scale);
  const auto perf = z_perf_curve(data, anchors, spec.grid.values);
  const double best = *std::min_element(perf.begin(), perf.end());

  ExperimentReport report;
  report.seed = spec.seed;
  for (std::size_t a = 0; a < curve.size(); ++a) {
    const double alpha = spec.grid.values[a];
    const auto& dc = curve[a];
    report.add(0, spec.K, policy, alpha, "saa_subopt", dc.saa_subopt);
    report.add(0, spec.K, policy, alpha, "instability", dc.instability);
    report.add(0, spec.K, policy, alpha, "saa0", dc.saa0);
    report.add(0, spec.K, policy, alpha, "loo", dc.total());
    report.add(0, spec.K, policy, alpha, "z_perf", perf[a]);
    report.add(0, spec.K, policy, alpha, "sub_opt", perf[a] - best);
  }
  const double alpha_loo = select_alpha_loo(data, anchors, spec.grid).alpha;
  const double alpha_or = select_alpha_oracle(data, anchors, spec.grid).alpha;
  report.add(0, spec.K, policy, alpha_loo, "alpha_loo", alpha_loo);
  report.add(0, spec.K, policy, alpha_or, "alpha_oracle", alpha_or);
  return report;
}

}  // namespace ssaa
