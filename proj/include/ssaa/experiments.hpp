#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssaa/benchmarks.hpp"
#include "ssaa/core.hpp"
#include "ssaa/pooling.hpp"

namespace ssaa {

// ---------------------------------------------------------------- reports

struct ReportRow {
  long rep = 0;  ///< -1 for aggregates over reps
  std::size_t K = 0;
  std::string policy;
  double alpha = 0.0;  ///< selected pooling amount; NaN when not applicable
  std::string metric;
  double value = 0.0;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::string spec_hash;
  std::uint64_t seed = 0;

  void add(long rep, std::size_t K, const std::string& policy, double alpha, const std::string& metric,
           double value);

  /// Appends `<metric>_mean` and `<metric>_se` rows (rep = -1) for every
  /// (K, policy, metric) among the per-rep rows, in first-seen order.
  void aggregate();

  /// Header `rep,K,policy,alpha,metric,value`, 9 significant digits, '\n' line ends.
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

/// printf("%.9g"), with "inf", "-inf" and "nan" spelled out.
std::string format_number(double v);

/// FNV-1a of the text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

// ---------------------------------------------------------------- demand data

struct StoreSeries {
  std::string id;
  std::vector<int> days;  ///< days since 1970-01-01, strictly increasing
  std::vector<double> demand;
};

struct CleaningOptions {
  bool drop_weekends = false;
  bool detrend_linear = false;
  std::vector<int> drop_months;  ///< 1..12
};

/// Parses `store_id,date,demand` rows (header required). Stores keep first-seen order.
std::vector<StoreSeries> parse_demand_csv(const std::string& text);
std::vector<StoreSeries> read_demand_csv(const std::string& path);

/// Days since epoch of an ISO-8601 date (YYYY-MM-DD); throws ParseError.
int parse_iso_date(const std::string& date);
std::string format_iso_date(int days);
int weekday(int days);  ///< 0 = Monday
int month_of(int days);  ///< 1..12

/// Drops weekends, removes a pooled linear trend (each store keeps its mean
/// level), then drops the listed months.
std::vector<StoreSeries> clean_series(std::vector<StoreSeries> stores, const CleaningOptions& options);

struct Discretization {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> support;  ///< bin midpoints
  bool degenerate = false;       ///< max == min; a single bin

  std::size_t bin(double v) const;
  Counts counts(std::span<const double> values) const;
  std::size_t size() const noexcept { return support.size(); }
};

/// d equal-width bins over [min, max] of the series. A constant series yields
/// one bin flagged as degenerate.
Discretization discretize(std::span<const double> series, std::size_t d);

/// Synthetic daily demand for `stores` stores over `days` consecutive days
/// starting 2013-01-01, with store levels spread over roughly 3,000-23,000.
std::vector<StoreSeries> synthetic_stores(std::size_t stores, std::size_t days, std::uint64_t seed);
std::string demand_csv(const std::vector<StoreSeries>& stores);

// ---------------------------------------------------------------- simulation

enum class TruthKind { DirichletUniform, Dirichlet, FromEmpirical, Mixture, Bernoulli, Spike };

struct TruthModel {
  TruthKind kind = TruthKind::DirichletUniform;
  std::vector<double> concentration;       ///< Dirichlet
  std::vector<double> proportions;         ///< Mixture
  std::vector<TruthModel> components;      ///< Mixture
  double p_lo = 0.6;                       ///< Bernoulli: P(xi = 1) ~ U[p_lo, p_hi]
  double p_hi = 0.9;
  double spike = 0.9;                      ///< Spike: mass at a random interior level
  // FromEmpirical: per-store histograms of a demand file.
  std::string csv_path;
  CleaningOptions cleaning;
  std::vector<StoreSeries> stores;         ///< used instead of csv_path when non-empty
};

enum class DataKind { Poisson, Fixed };

struct DataModel {
  DataKind kind = DataKind::Fixed;
  double N = 10.0;           ///< Poisson: mean sample size is N * lambda_k
  double lambda_lo = 1.0;    ///< lambda_k ~ U[lambda_lo, lambda_hi]
  double lambda_hi = 1.0;
  std::int64_t fixed_n = 20;  ///< Fixed
};

enum class CostKind { Newsvendor, Mse };

enum class SupportKind { Integers, Random };

struct SimSpec {
  std::size_t K = 100;
  std::size_t d = 10;
  SupportKind support = SupportKind::Integers;  ///< 1..d, or sorted uniform draws
  double support_lo = 0.0;
  double support_hi = 10.0;
  TruthModel truth;
  DataModel data;
  CostKind cost = CostKind::Newsvendor;
  double s = 0.9;
  std::optional<Distribution> anchor;  ///< fixed anchor; uniform when absent
  std::vector<std::string> policies{"SAA", "S-SAA-GM"};
  AlphaGrid grid = AlphaGrid::default_grid();
  std::size_t reps = 1;
  std::uint64_t seed = 0;
  BetaFamily beta = BetaFamily::coarse_grid();
  KsConfig ks;

  void validate() const;
};

/// Reads the JSON spec document; unknown keys are rejected.
SimSpec parse_sim_spec(const std::string& json_text);
SimSpec load_sim_spec(const std::string& path);

/// Everything fixed across reps: supports, truths and frequency weights.
struct Population {
  std::vector<std::vector<double>> supports;
  std::vector<Distribution> truths;
  std::vector<double> weights;
};

/// Depends on (seed, k) only, so adding problems leaves existing ones unchanged.
Population draw_population(const SimSpec& spec);

/// Sample sizes and counts for one rep, drawn from (seed, k, rep) streams.
Dataset sample_dataset(const SimSpec& spec, const Population& population, std::size_t rep);

/// Truths and weights depend on (seed, k) only; sample sizes and counts on
/// (seed, k, rep).
Dataset gen_instance(const SimSpec& spec, std::size_t rep);

/// 1 / (N lambda_bar) for Poisson data, else 1.
double loo_scale(const SimSpec& spec, const Dataset& dataset);

/// Policy names accepted by run_simulation and run_backtest.
bool known_policy(const std::string& name);

/// Per rep and policy: z_perf, loss to full information and % benefit over
/// SAA, plus their means and standard errors over reps.
ExperimentReport run_simulation(const SimSpec& spec);

/// SAA-SubOpt, Instability, SAA(0), scaled LOO and (with truth) z_perf and
/// SubOpt over the grid, for rep 0.
ExperimentReport run_diagnostics(const SimSpec& spec);

// ---------------------------------------------------------------- backtest

struct BacktestSpec {
  std::string csv_path;
  CleaningOptions cleaning;
  std::optional<std::size_t> d = 20;  ///< nullopt: continuous mode
  std::size_t n_train = 10;
  std::size_t n_test = 10;
  std::size_t reps = 1;
  double s = 0.95;
  std::vector<std::string> policies{"SAA", "S-SAA-GM"};
  AlphaGrid grid = AlphaGrid::default_grid();
  std::uint64_t seed = 0;
  BetaFamily beta = BetaFamily::coarse_grid();
  KsConfig ks;

  void validate() const;
};

BacktestSpec parse_backtest_spec(const std::string& json_text);
BacktestSpec load_backtest_spec(const std::string& path);

/// Reads and cleans spec.csv_path.
std::vector<StoreSeries> ingest_demand_csv(const BacktestSpec& spec);

/// Per rep: average out-of-sample newsvendor cost per policy and % benefit over SAA.
ExperimentReport run_backtest(const BacktestSpec& spec, const std::vector<StoreSeries>& stores);

}  // namespace ssaa
