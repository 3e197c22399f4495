#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ssaa/experiments.hpp"
#include "ssaa/pooling.hpp"
#include "ssaa/solvers.hpp"

using namespace ssaa;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open " + path + " for writing");
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Pure Shrunken-SAA decisions for every store of a demand file.
std::string solve_csv(const std::vector<StoreSeries>& stores, const std::string& anchor_name, std::size_t d,
                      double s, const AlphaGrid& grid) {
  Dataset data;
  std::vector<std::string> ids;
  for (const auto& st : stores) {
    if (st.demand.empty()) continue;
    const Discretization bins = discretize(st.demand, d);
    if (bins.degenerate) {
      spdlog::warn("store {} skipped: constant demand", st.id);
      continue;
    }
    SubproblemInstance inst;
    inst.support = bins.support;
    inst.cost = Newsvendor{s};
    inst.counts = bins.counts(st.demand);
    data.problems.push_back(std::move(inst));
    ids.push_back(st.id);
  }
  if (data.problems.empty()) throw Error(ErrorCode::InsufficientData, "no usable store in the demand data");

  PoolingSelection sel;
  std::string label = anchor_name;
  if (anchor_name == "gm") {
    sel = select_alpha_loo(data, AnchorSpec{GrandMean{}}, grid);
  } else if (anchor_name == "uniform") {
    sel = select_alpha_loo(data, AnchorSpec{FixedAnchor{Distribution::uniform(d)}}, grid);
  } else if (anchor_name == "beta") {
    const BetaFamily family = BetaFamily::coarse_grid();
    sel = select_joint_hloo(data, beta_candidates(family, data), grid);
    const std::size_t shapes = family.shape_grid.size();
    label = "beta(mu=" + format_number(family.mean_grid[sel.anchor_id / shapes]) +
            ";shape=" + format_number(family.shape_grid[sel.anchor_id % shapes]) + ")";
  } else {
    throw Error(ErrorCode::InvalidArgument, "anchor must be gm, uniform or beta");
  }

  std::string out = "store_id,alpha,anchor,decision\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Decision x = solve_shrunken(data.problems[k], sel.anchors[k], sel.alpha);
    out += ids[k] + "," + format_number(sel.alpha) + "," + label + "," +
           format_number(std::get<ScalarLevel>(x).x) + "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shrunken-SAA: data pooling across many small newsvendor-type problems"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress");

  std::string spec_path;
  std::string data_path;
  std::string out_path = "-";

  auto* simulate = app.add_subcommand("simulate", "Run a simulation spec and write the report CSV");
  simulate->add_option("--spec", spec_path, "JSON simulation spec")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out_path, "Report CSV ('-' for stdout)");

  auto* backtest = app.add_subcommand("backtest", "Backtest policies on historical demand");
  backtest->add_option("--spec", spec_path, "JSON backtest spec")->required()->check(CLI::ExistingFile);
  backtest->add_option("--data", data_path, "Demand CSV (store_id,date,demand); overrides csv_path");
  backtest->add_option("--out", out_path, "Report CSV ('-' for stdout)");

  auto* diagnose = app.add_subcommand("diagnose", "Sub-optimality / instability curves over the alpha grid");
  diagnose->add_option("--spec", spec_path, "JSON simulation spec")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--out", out_path, "Report CSV ('-' for stdout)");

  std::string anchor = "gm";
  std::size_t bins = 20;
  double s = 0.95;
  auto* solve = app.add_subcommand("solve", "Shrunken-SAA decisions per store, no truth needed");
  solve->add_option("--data", data_path, "Demand CSV (store_id,date,demand)")->required()->check(CLI::ExistingFile);
  solve->add_option("--anchor", anchor, "gm, uniform or beta")->check(CLI::IsMember({"gm", "uniform", "beta"}));
  solve->add_option("--bins", bins, "Number of support bins per store")->check(CLI::PositiveNumber);
  solve->add_option("--s", s, "Critical fractile")->check(CLI::Range(0.0, 1.0));
  solve->add_option("--out", out_path, "Decisions CSV ('-' for stdout)");

  std::size_t stores = 1115;
  std::size_t days = 942;
  std::uint64_t seed = 1;
  auto* synth = app.add_subcommand("synth-data", "Write a synthetic multi-store demand CSV");
  synth->add_option("--stores", stores, "Number of stores");
  synth->add_option("--days", days, "Number of consecutive days");
  synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--out", out_path, "Demand CSV ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("pooled-saa"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    if (*simulate) {
      const std::string text = read_text(spec_path);
      const SimSpec spec = parse_sim_spec(text);
      spdlog::info("spec {} seed {}", fnv1a_hex(text), spec.seed);
      write_text(out_path, run_simulation(spec).to_csv());
    } else if (*backtest) {
      const std::string text = read_text(spec_path);
      BacktestSpec spec = parse_backtest_spec(text);
      if (!data_path.empty()) spec.csv_path = data_path;
      if (spec.csv_path.empty()) throw Error(ErrorCode::InvalidArgument, "no demand data: pass --data or set csv_path");
      spdlog::info("spec {} seed {}", fnv1a_hex(text), spec.seed);
      write_text(out_path, run_backtest(spec, ingest_demand_csv(spec)).to_csv());
    } else if (*diagnose) {
      write_text(out_path, run_diagnostics(load_sim_spec(spec_path)).to_csv());
    } else if (*solve) {
      write_text(out_path, solve_csv(read_demand_csv(data_path), anchor, bins, s, AlphaGrid::default_grid()));
    } else if (*synth) {
      write_text(out_path, demand_csv(synthetic_stores(stores, days, seed)));
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
