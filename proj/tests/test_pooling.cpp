#include <doctest.h>

#include <cmath>

#include "brute.hpp"
#include "ssaa/pooling.hpp"
#include "ssaa/rng.hpp"
#include "ssaa/solvers.hpp"

using namespace ssaa;

namespace {

SubproblemInstance nv01(std::vector<std::int64_t> m, double s = 0.5) {
  return SubproblemInstance{{0.0, 1.0}, Newsvendor{s}, Counts(std::move(m))};
}

Dataset random_dataset(Rng& rng, std::size_t K, std::size_t d, double s, double mean_n) {
  Dataset ds;
  std::vector<double> support(d);
  for (std::size_t i = 0; i < d; ++i) support[i] = static_cast<double>(i + 1);
  for (std::size_t k = 0; k < K; ++k) {
    const auto p = rng.dirichlet_uniform(d);
    ds.problems.push_back({support, Newsvendor{s}, Counts(rng.multinomial(rng.poisson(mean_n), p)), 1.0, Distribution(p)});
  }
  return ds;
}

double brute_loo(const Dataset& ds, const Anchors& anchors, double alpha) {
  double total = 0.0;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const auto& inst = ds.problems[k];
    const auto& nv = std::get<Newsvendor>(inst.cost);
    for (std::size_t i = 0; i < inst.dimension(); ++i) {
      if (inst.counts[i] == 0) continue;
      std::vector<std::int64_t> m(inst.counts.values().begin(), inst.counts.values().end());
      --m[i];
      const auto measure = oracle::shrink(m, anchors[k].vector(), alpha);
      const double x = oracle::newsvendor_by_scan(inst.support, measure, nv.s);
      total += static_cast<double>(inst.counts[i]) * oracle::newsvendor(nv.s, x, inst.support[i]);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("grand mean anchor") {
  Dataset ds;
  ds.problems = {nv01({3, 0}), nv01({0, 5}), nv01({0, 0})};
  CHECK(grand_mean(ds).vector() == std::vector<double>{0.5, 0.5});
  Dataset empty;
  empty.problems = {nv01({0, 0}), nv01({0, 0})};
  CHECK(grand_mean(empty) == Distribution::uniform(2));
  Dataset ragged;
  ragged.problems = {nv01({1, 1}), SubproblemInstance{{0.0, 1.0, 2.0}, Newsvendor{0.5}, Counts({1, 1, 1})}};
  try {
    grand_mean(ragged);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("beta anchors") {
  const auto u = beta_bins(0.5, 1.0, 7);
  for (std::size_t i = 0; i < 7; ++i) CHECK(u[i] == doctest::Approx(1.0 / 7).epsilon(1e-12));
  const auto top = beta_bins(1.0, 2.0, 5);
  CHECK(top[4] == 1.0);
  const auto skew = beta_bins(0.2, 3.0, 10);
  double mean = 0.0;
  for (std::size_t i = 0; i < 10; ++i) mean += skew[i] * (i + 0.5) / 10.0;
  CHECK(mean == doctest::Approx(0.2).epsilon(0.02));
  const auto full = BetaFamily::full_grid();
  CHECK(full.mean_grid.size() == 21);
  CHECK(full.shape_grid.size() == 61);
  CHECK(full.mean_grid.front() == 1e-6);
  CHECK(full.shape_grid.front() == 1e-6);
}

TEST_CASE("leave-one-out criterion on two observations") {
  Dataset ds;
  ds.problems = {nv01({1, 1})};
  const Anchors u = replicate(Distribution::uniform(2), 1);
  CHECK(loo_criterion(ds, u, 0.0) == 2.0);
  CHECK(loo_criterion(ds, u, kInfiniteAlpha) == 1.0);
  Dataset none;
  none.problems = {nv01({0, 0}), nv01({0, 0})};
  CHECK(loo_criterion(none, replicate(Distribution::uniform(2), 2), 3.0) == 0.0);
}

TEST_CASE("leave-one-out criterion matches direct enumeration") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ds = random_dataset(rng, 30, 6, rng.uniform(0.2, 0.9), 4.0);
    const auto anchors = replicate(grand_mean(ds), ds.size());
    for (double a : {0.0, 0.7, 3.0, 25.0, kInfiniteAlpha}) {
      CHECK(loo_criterion(ds, anchors, a) == doctest::Approx(brute_loo(ds, anchors, a)).epsilon(1e-12));
    }
  }
}

TEST_CASE("selection on trivial grids") {
  Rng rng(22);
  const auto ds = random_dataset(rng, 20, 4, 0.7, 5.0);
  const auto sel = select_alpha_loo(ds, GrandMean{}, AlphaGrid{{0.0}});
  CHECK(sel.alpha == 0.0);
  CHECK_THROWS_AS(select_alpha_loo(ds, GrandMean{}, AlphaGrid{{}}), Error);
  const auto u = Distribution::uniform(4);
  const auto two = select_joint_hloo(ds, std::vector<Distribution>{u}, AlphaGrid{{0.0, kInfiniteAlpha}});
  const auto anchors = replicate(u, ds.size());
  const double l0 = loo_criterion(ds, anchors, 0.0);
  const double linf = loo_criterion(ds, anchors, kInfiniteAlpha);
  CHECK(two.alpha == (linf < l0 ? kInfiniteAlpha : 0.0));
  CHECK_THROWS_AS(select_joint_hloo(ds, std::vector<Distribution>{}, AlphaGrid::default_grid()), Error);
}

TEST_CASE("selection is a grid argmin with ties to the smaller alpha") {
  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ds = random_dataset(rng, 40, 5, 0.8, 3.0);
    const auto grid = AlphaGrid::linspace(0.0, 30.0, 31, true);
    const auto anchors = replicate(grand_mean(ds), ds.size());
    const auto sel = select_alpha_loo(ds, anchors, grid);
    const auto curve = loo_curve(ds, anchors, grid.values);
    const auto best = first_argmin(curve);
    CHECK(sel.alpha == grid.values[best]);
    REQUIRE(sel.trace.size() == grid.values.size());
    for (std::size_t g = 0; g < curve.size(); ++g) CHECK(sel.trace[g].value == curve[g]);
  }
}

TEST_CASE("single candidate joint search equals plain search") {
  Rng rng(24);
  const auto ds = random_dataset(rng, 50, 5, 0.6, 3.0);
  const auto grid = AlphaGrid::default_grid();
  const auto q = Distribution(rng.dirichlet_uniform(5));
  const auto a = select_alpha_loo(ds, FixedAnchor{q}, grid);
  const auto b = select_joint_hloo(ds, std::vector<Distribution>{q}, grid);
  CHECK(a.alpha == b.alpha);
  CHECK(b.anchor_id == 0);
}

TEST_CASE("scaling costs leaves selections unchanged") {
  Rng rng(25);
  Dataset ds;
  for (int k = 0; k < 40; ++k) {
    auto inst = SubproblemInstance{{0, 1, 2, 3}, Table{}, Counts(rng.multinomial(rng.poisson(4.0), rng.dirichlet_uniform(4)))};
    Table t;
    t.costs.assign(5, std::vector<double>(4));
    for (auto& row : t.costs) {
      for (auto& c : row) c = rng.uniform(0.0, 1.0);
    }
    inst.cost = t;
    ds.problems.push_back(inst);
  }
  Dataset scaled = ds;
  for (auto& inst : scaled.problems) {
    for (auto& row : std::get<Table>(inst.cost).costs) {
      for (auto& c : row) c *= 8.0;
    }
  }
  const auto grid = AlphaGrid::default_grid();
  CHECK(select_alpha_loo(ds, GrandMean{}, grid).alpha == select_alpha_loo(scaled, GrandMean{}, grid).alpha);
  const auto cands = std::vector<Distribution>{Distribution::uniform(4), Distribution({0.7, 0.1, 0.1, 0.1})};
  const auto x = select_joint_hloo(ds, cands, grid);
  const auto y = select_joint_hloo(scaled, cands, grid);
  CHECK(x.alpha == y.alpha);
  CHECK(x.anchor_id == y.anchor_id);
}

TEST_CASE("k-fold criterion") {
  Rng rng(26);
  Dataset ds;
  for (int k = 0; k < 30; ++k) ds.problems.push_back(SubproblemInstance{{1, 2, 3, 4, 5}, Newsvendor{0.7}, Counts(rng.multinomial(6, rng.dirichlet_uniform(5)))});
  const auto anchors = replicate(grand_mean(ds), ds.size());
  for (double a : {0.0, 2.0, 11.0, kInfiniteAlpha}) {
    // Six folds over six observations are singletons.
    CHECK(kfold_criterion(ds, anchors, a, 6, 99) == doctest::Approx(loo_criterion(ds, anchors, a)).epsilon(1e-12));
    CHECK(kfold_criterion(ds, anchors, a, 3, 99) == kfold_criterion(ds, anchors, a, 3, 99));
  }
  Dataset empty;
  empty.problems = {SubproblemInstance{{1, 2}, Newsvendor{0.5}, Counts({0, 0})}};
  CHECK(kfold_criterion(empty, replicate(Distribution::uniform(2), 1), 1.0, 2, 1) == 0.0);
  CHECK_THROWS_AS(kfold_criterion(ds, anchors, 1.0, 1, 1), Error);
}

TEST_CASE("James-Stein pooling amount") {
  const std::vector<std::vector<double>> obs{{0.0, 2.0}, {1.0, 3.0}};
  const std::vector<double> zero{0.0, 0.0};
  CHECK(alpha_js(obs, zero) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(alpha_js(std::vector<std::vector<double>>{{1, 1}, {2, 2, 2}}, zero) == 0.0);
  CHECK(std::isinf(alpha_js(obs, std::vector<double>{1.0, 2.0})));
  try {
    alpha_js(std::vector<std::vector<double>>{{1.0}, {}}, zero);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }

  // Same numbers through counts on a support.
  Dataset ds;
  ds.problems = {SubproblemInstance{{0, 1, 2, 3}, Mse{}, Counts({1, 0, 1, 0})},
                 SubproblemInstance{{0, 1, 2, 3}, Mse{}, Counts({0, 1, 0, 1})}};
  CHECK(alpha_js(ds, zero) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("a priori pooling amount") {
  CHECK(alpha_ap(std::vector<double>{1, 2, 3}, std::vector<double>{1, 1, 1}, std::vector<double>{0, 1, 2}) == 1.0);
  CHECK(alpha_ap(std::vector<double>{1, 2}, std::vector<double>{0, 0}, std::vector<double>{0, 0}) == 0.0);
  CHECK(std::isinf(alpha_ap(std::vector<double>{1, 2}, std::vector<double>{1, 1}, std::vector<double>{1, 2})));
}

TEST_CASE("default grid") {
  const auto g = AlphaGrid::default_grid();
  REQUIRE(g.values.size() == 121);
  CHECK(g.values.front() == 0.0);
  CHECK(g.values[119] == 180.0);
  CHECK(std::isinf(g.values.back()));
  CHECK_THROWS_AS((AlphaGrid{{1.0, 0.5}}.validate()), Error);
}
