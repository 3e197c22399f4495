#include <algorithm>
#include <memory>
#include <unordered_map>
#include <cmath>
#include <limits>
#include <set>

#include <boost/math/special_functions/beta.hpp>
#include <spdlog/spdlog.h>

#include "policies.hpp"
#include "ssaa/experiments.hpp"
#include "ssaa/oracle.hpp"
#include "ssaa/parallel.hpp"
#include "ssaa/rng.hpp"

namespace ssaa {

std::vector<StoreSeries> ingest_demand_csv(const BacktestSpec& spec) {
  auto stores = clean_series(read_demand_csv(spec.csv_path), spec.cleaning);
  for (const auto& s : stores) {
    if (s.demand.size() < spec.n_train + spec.n_test) {
      spdlog::warn("store {} has {} observations after cleaning, fewer than n_train + n_test = {}", s.id,
                   s.demand.size(), spec.n_train + spec.n_test);
    }
  }
  return stores;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Mean newsvendor cost of x against a fixed sample, via prefix sums.
class SampleCost {
 public:
  explicit SampleCost(std::vector<double> values) : sorted_(std::move(values)) {
    std::sort(sorted_.begin(), sorted_.end());
    prefix_.assign(sorted_.size() + 1, 0.0);
    for (std::size_t i = 0; i < sorted_.size(); ++i) prefix_[i + 1] = prefix_[i] + sorted_[i];
  }

  double mean(double x, double s) const {
    const auto below = static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
    const double nb = static_cast<double>(below);
    const double na = static_cast<double>(sorted_.size() - below);
    const double over = x * nb - prefix_[below];
    const double under = (prefix_.back() - prefix_[below]) - x * na;
    return (over + s / (1.0 - s) * under) / static_cast<double>(sorted_.size());
  }

 private:
  std::vector<double> sorted_;
  std::vector<double> prefix_;
};

struct Store {
  const StoreSeries* series = nullptr;
  Discretization bins;     // discrete mode
  Distribution proxy;      // discrete mode: full-history histogram
  SampleCost history{{}};  // continuous mode truth proxy
};

struct Split {
  std::vector<double> train;
  std::vector<double> test;
};

std::vector<Split> split_rep(const std::vector<Store>& stores, const std::vector<int>& calendar,
                             const BacktestSpec& spec, std::size_t rep) {
  std::vector<int> days(calendar);
  Rng rng(spec.seed, 0, rep, Purpose::Backtest);
  rng.shuffle(days);
  const std::size_t n_train = std::min(spec.n_train, days.size());
  const std::size_t n_test = std::min(spec.n_test, days.size() - n_train);
  std::vector<int> train_days(days.begin(), days.begin() + static_cast<long>(n_train));
  std::vector<int> test_days(days.begin() + static_cast<long>(n_train),
                             days.begin() + static_cast<long>(n_train + n_test));
  std::sort(train_days.begin(), train_days.end());
  std::sort(test_days.begin(), test_days.end());

  std::vector<Split> out(stores.size());
  for (std::size_t k = 0; k < stores.size(); ++k) {
    const auto& s = *stores[k].series;
    for (std::size_t i = 0; i < s.days.size(); ++i) {
      if (std::binary_search(train_days.begin(), train_days.end(), s.days[i])) out[k].train.push_back(s.demand[i]);
      if (std::binary_search(test_days.begin(), test_days.end(), s.days[i])) out[k].test.push_back(s.demand[i]);
    }
  }
  return out;
}

double test_cost(const std::vector<Split>& splits, const std::vector<double>& decisions, double s) {
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < splits.size(); ++k) {
    if (splits[k].test.empty()) continue;
    double c = 0.0;
    for (double v : splits[k].test) c += newsvendor_cost(s, decisions[k], v);
    total += c / static_cast<double>(splits[k].test.size());
    ++used;
  }
  return used == 0 ? kNaN : total / static_cast<double>(used);
}

// ---------------------------------------------------------------- discrete mode

struct Trained {
  std::vector<double> decisions;
  double alpha = kNaN;
};

Trained train_discrete(const detail::PolicyName& policy, const std::vector<Store>& stores,
                       const std::vector<Split>& splits, const BacktestSpec& spec, std::size_t rep) {
  Dataset data;
  detail::PolicyContext ctx;
  for (std::size_t k = 0; k < stores.size(); ++k) {
    SubproblemInstance inst;
    inst.support = stores[k].bins.support;
    inst.cost = Newsvendor{spec.s};
    inst.counts = stores[k].bins.counts(splits[k].train);
    inst.truth = stores[k].proxy;
    data.problems.push_back(std::move(inst));
    ctx.ks_bounds.push_back({stores[k].bins.support.front(), stores[k].bins.support.back()});
  }
  ctx.grid = spec.grid;
  ctx.beta = spec.beta;
  ctx.ks = spec.ks;
  ctx.fixed_anchor = Distribution::uniform(*spec.d);
  ctx.seed = spec.seed;
  ctx.rep = rep;
  const auto result = detail::run_policy(policy, data, ctx);
  Trained out;
  out.alpha = result.alpha;
  for (const auto& x : result.decisions) out.decisions.push_back(std::get<ScalarLevel>(x).x);
  return out;
}

// ---------------------------------------------------------------- continuous mode

// Anchors live on [0, 1]; store k maps u to lo_k + u (hi_k - lo_k).
AnchorCdf beta_cdf(double mu, double shape) {
  if (mu >= 1.0) {
    AnchorCdf a;
    a.lo = 0.0;
    a.hi = 1.0;
    a.atoms = {1.0};
    a.cdf = [](double u) { return u >= 1.0 ? 1.0 : 0.0; };
    a.quantile = [](double) { return 1.0; };
    return a;
  }
  const double a_param = mu * shape / (1.0 - mu);
  const double b_param = shape;
  AnchorCdf a;
  a.lo = 0.0;
  a.hi = 1.0;
  a.cdf = [=](double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return boost::math::ibeta(a_param, b_param, u);
  };
  a.quantile = [=](double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return boost::math::ibeta_inv(a_param, b_param, t);
  };
  return a;
}

struct ContinuousProblem {
  std::vector<double> u;  // sorted normalized training sample
  double lo = 0.0;
  double width = 1.0;
};

double criterion_loo(const std::vector<ContinuousProblem>& problems, const AnchorCdf& anchor, Alpha alpha,
                     double s) {
  double total = 0.0;
  std::vector<double> rest;
  for (const auto& p : problems) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.u.size(); ++i) {
      rest.assign(p.u.begin(), p.u.end());
      rest.erase(rest.begin() + static_cast<long>(i));
      const double x = continuous_newsvendor(rest, anchor, rest.empty() ? kInfiniteAlpha : alpha, s);
      sum += p.width * newsvendor_cost(s, x, p.u[i]);
    }
    total += sum;
  }
  return total;
}

/// Same anchor with its CDF and quantile values remembered; one per thread.
AnchorCdf memoized(const AnchorCdf& base) {
  auto cdf_cache = std::make_shared<std::unordered_map<double, double>>();
  auto q_cache = std::make_shared<std::unordered_map<double, double>>();
  AnchorCdf m = base;
  m.cdf = [cdf_cache, f = base.cdf](double x) {
    const auto [it, fresh] = cdf_cache->try_emplace(x, 0.0);
    if (fresh) it->second = f(x);
    return it->second;
  };
  if (base.quantile) {
    m.quantile = [q_cache, q = base.quantile](double t) {
      const auto [it, fresh] = q_cache->try_emplace(t, 0.0);
      if (fresh) it->second = q(t);
      return it->second;
    };
  }
  return m;
}

double solve_continuous(const ContinuousProblem& p, const AnchorCdf& anchor, Alpha alpha, double s) {
  const double a = p.u.empty() ? kInfiniteAlpha : alpha;
  return p.lo + p.width * continuous_newsvendor(p.u, anchor, a, s);
}

Trained train_continuous(const detail::PolicyName& policy, const std::vector<Store>& stores,
                         const std::vector<Split>& splits, const BacktestSpec& spec, std::size_t rep) {
  const std::size_t K = stores.size();
  std::vector<ContinuousProblem> problems(K);
  for (std::size_t k = 0; k < K; ++k) {
    auto& p = problems[k];
    p.lo = stores[k].bins.lo;
    p.width = stores[k].bins.hi - stores[k].bins.lo;
    for (double v : splits[k].train) p.u.push_back((v - p.lo) / p.width);
    std::sort(p.u.begin(), p.u.end());
  }
  Trained out;
  out.decisions.resize(K);
  const double s = spec.s;

  if (policy.base == detail::PolicyBase::Ks) {
    KsConfig config = spec.ks;
    config.seed = stream_key(spec.seed, 0, rep, Purpose::KsFold);
    parallel_for(K, [&](std::size_t k) {
      const Bounds b{stores[k].bins.lo, stores[k].bins.hi};
      if (splits[k].train.empty()) {
        out.decisions[k] = b.lo + s * (b.hi - b.lo);
        return;
      }
      const double rho = ks_select_rho(splits[k].train, s, b, config, k);
      out.decisions[k] = ks_solve(splits[k].train, rho, s, b);
    });
    return out;
  }

  std::vector<AnchorCdf> candidates;
  if (policy.anchor == detail::AnchorKind::Fixed || policy.base == detail::PolicyBase::Saa) {
    candidates.push_back(AnchorCdf::uniform(0.0, 1.0));
  } else if (policy.anchor == detail::AnchorKind::GrandMean) {
    std::vector<double> points;
    std::vector<double> weights;
    for (const auto& p : problems) {
      for (double u : p.u) {
        points.push_back(u);
        weights.push_back(1.0 / static_cast<double>(p.u.size()));
      }
    }
    candidates.push_back(points.empty() ? AnchorCdf::uniform(0.0, 1.0)
                                        : AnchorCdf::empirical(std::move(points), std::move(weights)));
  } else {
    for (double mu : spec.beta.mean_grid) {
      for (double shape : spec.beta.shape_grid) candidates.push_back(beta_cdf(mu, shape));
    }
  }

  auto oracle_value = [&](const AnchorCdf& anchor, Alpha alpha) {
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) total += stores[k].history.mean(solve_continuous(problems[k], anchor, alpha, s), s);
    return total;
  };
  std::size_t best_c = 0;
  Alpha best_alpha = 0.0;
  switch (policy.base) {
    case detail::PolicyBase::Saa:
      best_alpha = 0.0;
      break;
    case detail::PolicyBase::JamesStein: {
      std::vector<std::vector<double>> raw(K);
      std::vector<double> means(K);
      const double anchor_mean_u = policy.anchor == detail::AnchorKind::Fixed ? 0.5 : [&] {
        double m = 0.0;
        double w = 0.0;
        for (const auto& p : problems) {
          for (double u : p.u) {
            m += u / static_cast<double>(p.u.size());
          }
          if (!p.u.empty()) w += 1.0;
        }
        return w > 0.0 ? m / w : 0.5;
      }();
      for (std::size_t k = 0; k < K; ++k) {
        raw[k] = splits[k].train;
        means[k] = problems[k].lo + problems[k].width * anchor_mean_u;
      }
      try {
        best_alpha = alpha_js(raw, means);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientData) throw;
        best_alpha = 0.0;
      }
      break;
    }
    default: {
      const auto& alphas = spec.grid.values;
      std::vector<std::vector<double>> values(candidates.size());
      parallel_for(candidates.size(), [&](std::size_t c) {
        const AnchorCdf anchor = memoized(candidates[c]);
        values[c].resize(alphas.size());
        for (std::size_t a = 0; a < alphas.size(); ++a) {
          values[c][a] = policy.base == detail::PolicyBase::Oracle ? oracle_value(anchor, alphas[a])
                                                                   : criterion_loo(problems, anchor, alphas[a], s);
        }
      });
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          if (values[c][a] < best) {
            best = values[c][a];
            best_alpha = alphas[a];
            best_c = c;
          }
        }
      }
    }
  }
  out.alpha = best_alpha;
  for (std::size_t k = 0; k < K; ++k) out.decisions[k] = solve_continuous(problems[k], candidates[best_c], best_alpha, s);
  return out;
}

}  // namespace

ExperimentReport run_backtest(const BacktestSpec& spec, const std::vector<StoreSeries>& series) {
  spec.validate();
  std::vector<Store> stores;
  std::set<int> calendar_set;
  for (const auto& s : series) {
    if (s.demand.size() < 2) {
      spdlog::warn("store {} skipped: fewer than two observations", s.id);
      continue;
    }
    Store st;
    st.series = &s;
    st.bins = discretize(s.demand, spec.d.value_or(2));
    if (st.bins.degenerate) {
      spdlog::warn("store {} skipped: constant demand", s.id);
      continue;
    }
    if (spec.d) {
      st.proxy = empirical_distribution(st.bins.counts(s.demand));
    } else {
      st.history = SampleCost(s.demand);
    }
    calendar_set.insert(s.days.begin(), s.days.end());
    stores.push_back(std::move(st));
  }
  if (stores.empty()) throw Error(ErrorCode::InsufficientData, "no usable store in the demand data");
  const std::vector<int> calendar(calendar_set.begin(), calendar_set.end());
  const std::size_t K = stores.size();

  ExperimentReport report;
  report.seed = spec.seed;
  const auto saa = *detail::parse_policy("SAA");
  for (std::size_t rep = 0; rep < spec.reps; ++rep) {
    const auto splits = split_rep(stores, calendar, spec, rep);
    auto train = [&](const detail::PolicyName& p) {
      return spec.d ? train_discrete(p, stores, splits, spec, rep) : train_continuous(p, stores, splits, spec, rep);
    };
    const double saa_cost = test_cost(splits, train(saa).decisions, spec.s);
    for (const auto& name : spec.policies) {
      const auto policy = *detail::parse_policy(name);
      const Trained t = name == "SAA" ? Trained{{}, 0.0} : train(policy);
      const double cost = name == "SAA" ? saa_cost : test_cost(splits, t.decisions, spec.s);
      const long r = static_cast<long>(rep);
      report.add(r, K, name, t.alpha, "alpha", t.alpha);
      report.add(r, K, name, t.alpha, "test_cost", cost);
      report.add(r, K, name, t.alpha, "benefit_pct", 100.0 * (saa_cost - cost) / saa_cost);
    }
    spdlog::debug("backtest rep {} of {} done", rep + 1, spec.reps);
  }
  report.aggregate();
  return report;
}

}  // namespace ssaa
