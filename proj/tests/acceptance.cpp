// Acceptance checks; one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "lp_oracle.hpp"
#include "ssaa/benchmarks.hpp"
#include "ssaa/experiments.hpp"
#include "ssaa/oracle.hpp"
#include "ssaa/parallel.hpp"
#include "ssaa/pooling.hpp"
#include "ssaa/rng.hpp"
#include "ssaa/solvers.hpp"

using namespace ssaa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> metric_by_rep(const ExperimentReport& r, const std::string& policy, const std::string& metric) {
  std::vector<double> out;
  for (const auto& row : r.rows) {
    if (row.rep >= 0 && row.policy == policy && row.metric == metric) out.push_back(row.value);
  }
  return out;
}

TruthModel mixture_truth() {
  TruthModel uniform;
  TruthModel dirichlet;
  dirichlet.kind = TruthKind::Dirichlet;
  dirichlet.concentration.assign(10, 3.0);
  TruthModel mix;
  mix.kind = TruthKind::Mixture;
  mix.components = {uniform, dirichlet};
  mix.proportions = {0.5, 0.5};
  return mix;
}

SimSpec mixture_spec(std::size_t K, std::size_t reps, std::uint64_t seed) {
  SimSpec spec;
  spec.K = K;
  spec.d = 10;
  spec.truth = mixture_truth();
  spec.data.kind = DataKind::Fixed;
  spec.data.fixed_n = 20;
  spec.s = 0.9;
  spec.policies = {"SAA", "S-SAA-GM"};
  spec.reps = reps;
  spec.seed = seed;
  return spec;
}

// 1: pooled loss to full information at most 40% of SAA's.
Outcome pooled_loss_ratio() {
  const auto report = run_simulation(mixture_spec(10000, 50, 101));
  const double saa = mean_of(metric_by_rep(report, "SAA", "loss_to_full_info"));
  const double gm = mean_of(metric_by_rep(report, "S-SAA-GM", "loss_to_full_info"));
  const double ratio = gm / saa;
  return {ratio <= 0.40, "loss ratio S-SAA-GM/SAA = " + fmt("%.4f", ratio) + " (need <= 0.40; SAA loss " +
                             fmt("%.5g", saa) + ", S-SAA-GM loss " + fmt("%.5g", gm) + ")"};
}

// 2: scaled leave-one-out criterion is an unbiased estimate of true performance.
Outcome unbiased() {
  SimSpec spec;
  spec.K = 200;
  spec.d = 10;
  spec.data.kind = DataKind::Poisson;
  spec.data.N = 5.0;
  spec.data.lambda_lo = 0.5;
  spec.data.lambda_hi = 1.5;
  spec.s = 0.8;
  spec.seed = 202;
  const std::vector<double> grid{0, 1, 2, 3, 5, 8, 12, 20, 40, kInfiniteAlpha};
  const std::size_t reps = 2000;
  const Population pop = draw_population(spec);
  const Anchors anchors = replicate(Distribution::uniform(spec.d), spec.K);
  std::vector<std::vector<double>> diff(grid.size(), std::vector<double>(reps));
  for (std::size_t r = 0; r < reps; ++r) {
    const Dataset ds = sample_dataset(spec, pop, r);
    const double scale = loo_scale(spec, ds) / static_cast<double>(spec.K);
    const auto loo = loo_curve(ds, anchors, grid);
    const auto perf = z_perf_curve(ds, anchors, grid);
    for (std::size_t a = 0; a < grid.size(); ++a) diff[a][r] = scale * loo[a] - perf[a];
  }
  double worst = 0.0;
  for (const auto& d : diff) worst = std::max(worst, std::abs(mean_of(d)) / se_of(d));
  return {worst <= 3.0, "max |mean(LOO - Z_perf)| / SE over 10 grid points = " + fmt("%.3f", worst) + " (need <= 3)"};
}

Dataset random_dataset(Rng& rng) {
  const std::size_t K = 5 + rng.below(56);
  const std::size_t d = 2 + rng.below(9);
  const int kind = static_cast<int>(rng.below(3));
  Dataset ds;
  const double s = rng.uniform(0.05, 0.95);
  Table table;
  table.costs.assign(2 + rng.below(8), std::vector<double>(d));
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> support(d);
    double v = rng.uniform(-5.0, 5.0);
    for (auto& x : support) x = (v += rng.uniform(0.1, 2.0));
    SubproblemInstance inst;
    inst.support = support;
    if (kind == 0) {
      inst.cost = Newsvendor{s};
    } else if (kind == 1) {
      inst.cost = Mse{};
    } else {
      for (auto& row : table.costs) {
        for (auto& c : row) c = rng.uniform(0.0, 5.0);
      }
      inst.cost = table;
    }
    inst.counts = Counts(rng.multinomial(rng.poisson(rng.uniform(0.0, 8.0)), rng.dirichlet_uniform(d)));
    ds.problems.push_back(inst);
  }
  return ds;
}

// 3: scale (SAA-SubOpt + Instability + SAA(0)) equals the scaled LOO criterion.
Outcome decomposition() {
  Rng rng(303);
  const auto grid = AlphaGrid::default_grid();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Dataset ds = random_dataset(rng);
    Anchors anchors;
    for (std::size_t k = 0; k < ds.size(); ++k) {
      anchors.push_back(trial % 2 ? grand_mean(ds) : Distribution(rng.dirichlet_uniform(ds.problems[k].dimension())));
    }
    const double scale = rng.uniform(0.05, 2.0);
    const auto curve = decompose_curve(ds, anchors, grid.values, scale);
    const auto loo = loo_curve(ds, anchors, grid.values);
    for (std::size_t a = 0; a < grid.values.size(); ++a) {
      worst = std::max(worst, std::abs(curve[a].total() - scale * loo[a] / static_cast<double>(ds.size())));
    }
  }
  return {worst <= 1e-9, "max abs deviation = " + fmt("%.3g", worst) + " over 100 instances x 121 alphas (need <= 1e-9)"};
}

// 4: exact path agrees with direct solves on a fine grid plus infinity.
Outcome path_equivalence() {
  Rng rng(404);
  std::size_t mismatches = 0;
  std::size_t too_many = 0;
  std::size_t max_breaks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng.below(12);
    const std::size_t d = 1 + rng.below(8);
    Table t;
    t.costs.assign(rows, std::vector<double>(d));
    for (auto& row : t.costs) {
      for (auto& c : row) c = trial % 4 == 0 ? std::floor(rng.uniform(0.0, 4.0)) : rng.uniform(0.0, 10.0);
    }
    std::vector<double> support(d);
    for (std::size_t i = 0; i < d; ++i) support[i] = static_cast<double>(i);
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.below(15));
    const SubproblemInstance inst{support, t, Counts(rng.multinomial(n, rng.dirichlet_uniform(d)))};
    const Distribution anchor(rng.dirichlet_uniform(d));
    const auto path = alpha_path(inst, anchor);
    max_breaks = std::max(max_breaks, path.breakpoints.size());
    if (path.breakpoints.size() > rows - 1) ++too_many;
    const double top = 10.0 * static_cast<double>(n);
    for (int g = 0; g <= 10000; ++g) {
      const double a = top * g / 10000.0;
      if (!(path.lookup(a) == solve_shrunken(inst, anchor, a))) ++mismatches;
    }
    if (!(path.lookup(kInfiniteAlpha) == solve_shrunken(inst, anchor, kInfiniteAlpha))) ++mismatches;
  }
  return {mismatches == 0 && too_many == 0,
          std::to_string(mismatches) + " mismatches in 200 x 10,002 evaluations; " + std::to_string(too_many) +
              " paths over the breakpoint bound (largest count " + std::to_string(max_breaks) + ")"};
}

// 5: anchor on the wrong side of 1/2 never helps.
Outcome no_benefit() {
  SimSpec spec;
  spec.K = 1000;
  spec.d = 2;
  spec.truth.kind = TruthKind::Bernoulli;
  spec.truth.p_lo = 0.6;
  spec.truth.p_hi = 0.9;
  spec.data.kind = DataKind::Poisson;
  spec.data.N = 10.0;
  spec.s = 0.5;
  spec.anchor = Distribution({0.7, 0.3});
  spec.seed = 505;
  const Population pop = draw_population(spec);
  const auto grid = AlphaGrid::default_grid();
  const Anchors anchors = replicate(*spec.anchor, spec.K);
  std::size_t violations = 0;
  std::size_t nonzero = 0;
  for (std::size_t r = 0; r < 20; ++r) {
    const Dataset ds = sample_dataset(spec, pop, r);
    const auto perf = z_perf_curve(ds, anchors, grid.values);
    for (double z : perf) {
      if (z < perf[0] - 1e-12) ++violations;
    }
    if (select_alpha_oracle(ds, anchors, grid).alpha != 0.0) ++nonzero;
  }
  return {violations == 0 && nonzero == 0, std::to_string(violations) + " grid points below z_perf(0); oracle alpha != 0 in " +
                                               std::to_string(nonzero) + " of 20 reps"};
}

// 6: optimization-aware pooling reaches full information; the MSE-style amount stays small.
Outcome example3() {
  SimSpec spec;
  spec.K = 500;
  spec.d = 10;
  spec.truth.kind = TruthKind::Spike;
  spec.truth.spike = 0.9;
  spec.data.kind = DataKind::Fixed;
  spec.data.fixed_n = 10;
  spec.s = 0.99;  // cost fractile above the spike mass
  std::vector<double> p0(10, 0.0);
  p0[0] = 0.9;
  p0[9] = 0.1;
  spec.anchor = Distribution(p0);
  spec.policies = {"S-SAA-Fixed", "JS-Fixed"};
  spec.reps = 50;
  spec.seed = 606;
  const auto report = run_simulation(spec);
  const auto loss = metric_by_rep(report, "S-SAA-Fixed", "loss_to_full_info");
  const auto js_alpha = metric_by_rep(report, "JS-Fixed", "alpha");
  const auto js_loss = metric_by_rep(report, "JS-Fixed", "loss_to_full_info");
  const double bound = (1.0 - 0.9) * 10.0 * 10.0 / 0.9;
  const auto exact = std::count(loss.begin(), loss.end(), 0.0);
  const auto small = std::count_if(js_alpha.begin(), js_alpha.end(), [&](double a) { return a <= bound; });
  const auto js_short = std::count_if(js_loss.begin(), js_loss.end(), [](double l) { return l > 0.0; });
  return {exact == 50 && small >= 45,
          "S-SAA-Fixed exact in " + std::to_string(exact) + "/50 reps; JS alpha <= " + fmt("%.3f", bound) + " in " +
              std::to_string(small) + "/50 (need 45); JS short of full information in " + std::to_string(js_short) +
              "/50"};
}

// 7: James-Stein pooling beats SAA for squared error in every rep.
Outcome js_mse() {
  SimSpec spec;
  spec.K = 5000;
  spec.d = 10;
  spec.support = SupportKind::Random;
  spec.support_lo = 0.0;
  spec.support_hi = 10.0;
  spec.data.kind = DataKind::Fixed;
  spec.data.fixed_n = 10;
  spec.cost = CostKind::Mse;
  spec.policies = {"SAA", "JS-Fixed"};
  spec.reps = 20;
  spec.seed = 707;
  const auto report = run_simulation(spec);
  const auto saa = metric_by_rep(report, "SAA", "z_perf");
  const auto js = metric_by_rep(report, "JS-Fixed", "z_perf");
  std::size_t wins = 0;
  for (std::size_t r = 0; r < saa.size(); ++r) wins += js[r] < saa[r];
  return {wins == saa.size() && saa.size() == 20, "JS-Fixed below SAA in " + std::to_string(wins) + "/20 reps (mean MSE " +
                                                      fmt("%.5g", mean_of(js)) + " vs " + fmt("%.5g", mean_of(saa)) + ")"};
}

std::vector<StoreSeries> store_panel() { return synthetic_stores(1115, 942, 808); }

// 8: synthetic-from-empirical benefit band.
Outcome synthetic_band() {
  SimSpec spec;
  spec.K = 1115;
  spec.d = 20;
  spec.truth.kind = TruthKind::FromEmpirical;
  spec.truth.stores = store_panel();
  spec.truth.cleaning = {true, true, {12}};
  spec.data.kind = DataKind::Poisson;
  spec.data.N = 10.0;
  spec.s = 0.95;
  spec.policies = {"SAA", "S-SAA-GM"};
  spec.reps = 20;
  spec.seed = 808;
  const auto report = run_simulation(spec);
  const double b = mean_of(metric_by_rep(report, "S-SAA-GM", "benefit_pct"));
  return {b >= 5.0 && b <= 20.0, "S-SAA-GM benefit over SAA = " + fmt("%.2f", b) + "% (need 5-20%)"};
}

// 9: sub-optimality of the leave-one-out choice falls with K.
Outcome subopt_decay() {
  const std::vector<std::size_t> sizes{64, 256, 1024, 4096};
  const auto grid = AlphaGrid::default_grid();
  std::vector<double> medians;
  for (std::size_t K : sizes) {
    const SimSpec spec = mixture_spec(K, 20, 909);
    const Population pop = draw_population(spec);
    std::vector<double> gaps;
    for (std::size_t r = 0; r < 20; ++r) {
      const Dataset ds = sample_dataset(spec, pop, r);
      const Anchors anchors = replicate(grand_mean(ds), ds.size());
      const auto orc = select_alpha_oracle(ds, anchors, grid);
      gaps.push_back(sub_opt(ds, anchors, select_alpha_loo(ds, anchors, grid).alpha, orc));
    }
    medians.push_back(median_of(gaps));
  }
  int inversions = 0;
  for (std::size_t i = 1; i < medians.size(); ++i) inversions += medians[i] > medians[i - 1];
  std::string text = "medians";
  for (std::size_t i = 0; i < sizes.size(); ++i) text += " K=" + std::to_string(sizes[i]) + ":" + fmt("%.3g", medians[i]);
  return {inversions <= 1, text + "; inversions " + std::to_string(inversions) + " (need <= 1)"};
}

// 10: closed-form robust cost against the linear program.
Outcome ks_lp() {
  Rng rng(1010);
  double worst = 0.0;
  std::size_t rho0_mismatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t atoms = 1 + rng.below(6);
    std::vector<double> levels(atoms);
    for (auto& v : levels) v = std::round(rng.uniform(0.0, 20.0)) / 2.0;
    std::vector<double> xs(1 + rng.below(15));
    for (auto& v : xs) v = levels[rng.below(atoms)];
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    const Bounds b{*mn - std::floor(rng.uniform(0.0, 3.0)), *mx + std::floor(rng.uniform(0.0, 3.0))};
    const double s = rng.uniform(0.1, 0.95);
    for (int q = 0; q < 5; ++q) {
      const double rho = q == 0 ? 1.0 : rng.uniform(0.0, 1.0);
      const double x = q == 1 ? xs[rng.below(xs.size())] : rng.uniform(b.lo - 1.0, b.hi + 1.0);
      worst = std::max(worst, std::abs(ks_worst_case(xs, rho, x, s, b) - oracle::ks_lp_worst_case(xs, rho, x, s, b.lo, b.hi)));
      double emp = 0.0;
      for (double v : xs) emp += newsvendor_cost(s, x, v);
      emp /= static_cast<double>(xs.size());
      if (ks_worst_case(xs, 0.0, x, s, b) != emp) ++rho0_mismatch;
    }
  }
  return {worst <= 1e-9 && rho0_mismatch == 0, "max |closed form - LP| = " + fmt("%.3g", worst) + " over 500 cases; rho=0 mismatches " +
                                                   std::to_string(rho0_mismatch)};
}

// 11: identical report bytes across runs and schedules.
Outcome determinism() {
  SimSpec spec;
  spec.K = 300;
  spec.d = 8;
  spec.truth = mixture_truth();
  spec.truth.components[1].concentration.assign(8, 3.0);
  spec.data.kind = DataKind::Poisson;
  spec.data.N = 6.0;
  spec.data.lambda_lo = 0.5;
  spec.data.lambda_hi = 1.5;
  spec.policies = {"SAA", "KS", "JS-Fixed", "JS-GM", "S-SAA-Fixed", "S-SAA-GM", "S-SAA-Beta", "S-SAA-GM-KF5",
                   "Oracle-Fixed", "Oracle-GM", "Oracle-Beta"};
  spec.reps = 3;
  spec.seed = 1111;

  BacktestSpec bt;
  bt.d = 20;
  bt.reps = 3;
  bt.policies = {"SAA", "KS", "JS-GM", "S-SAA-GM", "S-SAA-Beta", "Oracle-GM"};
  bt.seed = 1111;
  bt.cleaning = {true, true, {12}};
  BacktestSpec cont = bt;
  cont.d.reset();
  const auto stores = clean_series(synthetic_stores(60, 400, 1111), bt.cleaning);

  auto run_all = [&]() {
    return run_simulation(spec).to_csv() + run_diagnostics(spec).to_csv() + run_backtest(bt, stores).to_csv() +
           run_backtest(cont, stores).to_csv();
  };
  set_thread_count(1);
  const auto serial_a = run_all();
  const auto serial_b = run_all();
  set_thread_count(4);
  const auto parallel = run_all();
  set_thread_count(0);
  const bool same = serial_a == serial_b && serial_a == parallel;
  return {same, std::string(same ? "identical" : "different") + " bytes for simulation, diagnostics and both backtest modes (" +
                    std::to_string(serial_a.size()) + " bytes; 1 vs 4 threads)"};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"pooled loss vs SAA at K=10,000", pooled_loss_ratio},
      {"LOO unbiasedness", unbiased},
      {"decomposition identity", decomposition},
      {"exact alpha path", path_equivalence},
      {"no benefit with a misplaced anchor", no_benefit},
      {"optimization-aware pooling attains full information", example3},
      {"James-Stein benefit for squared error", js_mse},
      {"synthetic-from-empirical benefit band", synthetic_band},
      {"sub-optimality decay in K", subopt_decay},
      {"KS closed form vs LP", ks_lp},
      {"determinism across schedules", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%d] %s: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first, out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
