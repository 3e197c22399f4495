#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "brute.hpp"
#include "ssaa/rng.hpp"
#include "ssaa/solvers.hpp"

using namespace ssaa;

namespace {

double level(const Decision& d) { return std::get<ScalarLevel>(d).x; }
std::size_t index(const Decision& d) { return std::get<TableIndex>(d).j; }

SubproblemInstance two_point(double s, std::vector<std::int64_t> counts) {
  return SubproblemInstance{{0.0, 1.0}, Newsvendor{s}, Counts(std::move(counts))};
}

SubproblemInstance random_table(Rng& rng, std::size_t rows, std::size_t d, std::int64_t n) {
  Table t;
  t.costs.assign(rows, std::vector<double>(d));
  for (auto& row : t.costs) {
    for (auto& c : row) c = rng.uniform(0.0, 10.0);
  }
  std::vector<double> support(d);
  for (std::size_t i = 0; i < d; ++i) support[i] = static_cast<double>(i);
  const auto p = rng.dirichlet_uniform(d);
  return SubproblemInstance{support, t, Counts(rng.multinomial(n, p))};
}

}  // namespace

TEST_CASE("plug-in solutions") {
  const auto nv = two_point(0.5, {1, 1});
  CHECK(level(solve_plugin(nv, Distribution({0.4, 0.6}))) == 1.0);
  CHECK(level(solve_plugin(nv, Distribution({0.6, 0.4}))) == 0.0);

  const SubproblemInstance mse{{0.0, 2.0, 4.0}, Mse{}, Counts({1, 1, 1})};
  CHECK(level(solve_plugin(mse, Distribution({0.25, 0.5, 0.25}))) == doctest::Approx(2.0));

  const SubproblemInstance table{{0.0, 1.0}, Table{{{1.0, 0.0}, {0.0, 1.0}}, {}}, Counts({1, 1})};
  CHECK(index(solve_plugin(table, Distribution({0.5, 0.5}))) == 0);
  CHECK(index(solve_plugin(table, Distribution({0.6, 0.4}))) == 1);
}

TEST_CASE("two-point newsvendor follows the indicator rule") {
  // 6 of 10 observations at level 1; anchor puts 0.3 on level 1.
  const auto inst = two_point(0.5, {4, 6});
  const Distribution anchor({0.7, 0.3});
  CHECK(level(solve_shrunken(inst, anchor, 0.0)) == 1.0);
  CHECK(level(solve_shrunken(inst, anchor, 4.0)) == 1.0);
  // Exactly half the shrunken mass on level 0: CDF(0) = 0.5 >= s picks level 0.
  CHECK(level(solve_shrunken(inst, anchor, 5.0)) == 0.0);
  CHECK(level(solve_shrunken(inst, anchor, 6.0)) == 0.0);
  CHECK(level(solve_shrunken(inst, anchor, kInfiniteAlpha)) == 0.0);
  for (double a = 0.0; a < 20.0; a += 0.37) {
    const double p1 = (0.3 * a + 6.0) / (10.0 + a);
    const double expect = p1 > 0.5 ? 1.0 : 0.0;
    CHECK(level(solve_shrunken(inst, anchor, a)) == expect);
  }
}

TEST_CASE("no data returns the anchor solution") {
  const auto inst = two_point(0.5, {0, 0});
  const Distribution anchor({0.2, 0.8});
  for (double a : {0.0, 1.0, kInfiniteAlpha}) CHECK(level(solve_shrunken(inst, anchor, a)) == 1.0);
}

TEST_CASE("newsvendor plug-in matches a cost scan") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 2 + rng.below(9);
    std::vector<double> support(d);
    double v = 0.0;
    for (auto& x : support) x = (v += rng.uniform(0.1, 3.0));
    const auto p = rng.dirichlet_uniform(d);
    const double s = rng.uniform(0.05, 0.95);
    const SubproblemInstance inst{support, Newsvendor{s}, Counts(std::vector<std::int64_t>(d, 0))};
    CHECK(level(solve_plugin(inst, Distribution(p))) == oracle::newsvendor_by_scan(support, p, s));
  }
}

TEST_CASE("SAA equals the empirical quantile") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + rng.below(6);
    const auto inst_counts = rng.multinomial(1 + static_cast<std::int64_t>(rng.below(15)), rng.dirichlet_uniform(d));
    std::vector<double> support(d);
    for (std::size_t i = 0; i < d; ++i) support[i] = static_cast<double>(i);
    const double s = rng.uniform(0.05, 0.95);
    const SubproblemInstance inst{support, Newsvendor{s}, Counts(inst_counts)};
    std::vector<double> xs;
    for (std::size_t i = 0; i < d; ++i) xs.insert(xs.end(), static_cast<std::size_t>(inst_counts[i]), support[i]);
    const auto rank = static_cast<std::size_t>(std::ceil(s * static_cast<double>(xs.size())));
    CHECK(level(solve_shrunken(inst, Distribution::uniform(d), 0.0)) == xs[std::max<std::size_t>(rank, 1) - 1]);
  }
}

TEST_CASE("two crossing lines give one breakpoint") {
  // theta = alpha / (N + alpha); costs along the path: x0 -> 2 theta, x1 -> 1 - theta.
  const SubproblemInstance inst{{0.0, 1.0}, Table{{{0.0, 2.0}, {1.0, 0.0}}, {}}, Counts({2, 0})};
  const auto path = alpha_path(inst, Distribution({0.0, 1.0}));
  REQUIRE(path.breakpoints.size() == 1);
  CHECK(path.breakpoints[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(index(path.lookup(0.5)) == 0);
  CHECK(index(path.lookup(1.0)) == 0);
  CHECK(index(path.lookup(1.5)) == 1);
  CHECK(index(path.lookup(kInfiniteAlpha)) == 1);
}

TEST_CASE("single feasible point has no breakpoints") {
  const SubproblemInstance inst{{0.0, 1.0}, Table{{{3.0, 1.0}}, {}}, Counts({1, 2})};
  const auto path = alpha_path(inst, Distribution({0.5, 0.5}));
  CHECK(path.breakpoints.empty());
  CHECK(path.decisions.size() == 1);
}

TEST_CASE("alpha path agrees with direct solves") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const auto inst = random_table(rng, 6, 5, 1 + static_cast<std::int64_t>(rng.below(12)));
    const Distribution anchor(rng.dirichlet_uniform(5));
    const auto path = alpha_path(inst, anchor);
    CHECK(path.breakpoints.size() <= 5);
    const double top = 10.0 * static_cast<double>(inst.counts.total());
    for (int g = 0; g <= 10000; ++g) {
      const double a = top * g / 10000.0;
      CHECK(path.lookup(a) == solve_shrunken(inst, anchor, a));
    }
    CHECK(path.lookup(kInfiniteAlpha) == solve_shrunken(inst, anchor, kInfiniteAlpha));
    for (std::size_t b = 0; b < path.breakpoints.size(); ++b) {
      const double a = path.breakpoints[b];
      CHECK(path.lookup(a) == solve_shrunken(inst, anchor, a));
    }
  }
}

TEST_CASE("newsvendor path lowers to a table") {
  const auto inst = two_point(0.5, {4, 6});
  const auto path = alpha_path(inst, Distribution({0.7, 0.3}));
  REQUIRE(path.breakpoints.size() == 1);
  CHECK(path.breakpoints[0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK_THROWS_AS(alpha_path(SubproblemInstance{{0.0, 1.0}, Mse{}, Counts({1, 1})}, Distribution::uniform(2)),
                  Error);
}

TEST_CASE("pooling never beats SAA when the anchor is on the wrong side") {
  Rng rng(8);
  const Distribution anchor({0.7, 0.3});
  for (int trial = 0; trial < 300; ++trial) {
    const double p1 = rng.uniform(0.51, 0.99);
    const auto m = rng.multinomial(static_cast<std::int64_t>(rng.below(20)), std::vector<double>{1 - p1, p1});
    const auto inst = two_point(0.5, m);
    const std::vector<double> truth{1 - p1, p1};
    const double base = expected_cost(inst, solve_shrunken(inst, anchor, 0.0), truth);
    for (double a : {0.1, 1.0, 3.0, 10.0, 100.0, kInfiniteAlpha}) {
      CHECK(expected_cost(inst, solve_shrunken(inst, anchor, a), truth) >= base - 1e-12);
    }
  }
}

TEST_CASE("continuous newsvendor") {
  const std::vector<double> samples{1, 2, 3, 4};
  const auto u = AnchorCdf::uniform(0.0, 4.0);
  CHECK(continuous_newsvendor(samples, u, 4.0, 0.5) == doctest::Approx(2.0));
  CHECK(continuous_newsvendor(samples, u, 0.0, 0.5) == 2.0);
  CHECK(continuous_newsvendor(samples, u, 0.0, 0.8) == 4.0);
  CHECK(continuous_newsvendor(samples, u, kInfiniteAlpha, 0.3) == doctest::Approx(1.2));
  CHECK(continuous_newsvendor({}, u, 1.0, 0.3) == doctest::Approx(1.2));
  CHECK_THROWS_AS(continuous_newsvendor({}, u, 0.0, 0.3), Error);

  // Fine-grid scan of the mixture CDF.
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(1 + rng.below(10));
    for (auto& x : xs) x = rng.uniform(0.0, 4.0);
    std::sort(xs.begin(), xs.end());
    const double alpha = rng.uniform(0.0, 10.0);
    const double s = rng.uniform(0.1, 0.9);
    const double w = static_cast<double>(xs.size()) / (static_cast<double>(xs.size()) + alpha);
    auto F = [&](double x) {
      const auto n = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
      return w * static_cast<double>(n) / static_cast<double>(xs.size()) + (1 - w) * std::clamp(x / 4.0, 0.0, 1.0);
    };
    double scan = 4.0;
    for (int g = 0; g <= 40000; ++g) {
      if (F(g * 1e-4) >= s) {
        scan = g * 1e-4;
        break;
      }
    }
    const double got = continuous_newsvendor(xs, u, alpha, s);
    CHECK(F(got) >= s - 1e-9);
    CHECK(std::abs(got - scan) <= 1e-4 + 1e-9);
  }
}

TEST_CASE("continuous newsvendor with a step anchor") {
  const auto gm = AnchorCdf::empirical({1.0, 3.0}, {0.5, 0.5});
  const std::vector<double> samples{2.0};
  // Mixture with alpha = 1: half on {2}, a quarter each on {1, 3}.
  CHECK(continuous_newsvendor(samples, gm, 1.0, 0.25) == 1.0);
  CHECK(continuous_newsvendor(samples, gm, 1.0, 0.5) == 2.0);
  CHECK(continuous_newsvendor(samples, gm, 1.0, 0.9) == 3.0);
}
