#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ssaa/experiments.hpp"

namespace ssaa {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) bad(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) bad("unknown key '" + key + "' in " + where);
  }
}

double number(const json& j, const std::string& what) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInfiniteAlpha;
  }
  if (!j.is_number()) bad(what + " must be a number");
  return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

std::uint64_t unsigned_int(const json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) bad(what + " must be a nonnegative integer");
  return j.get<std::uint64_t>();
}

AlphaGrid parse_grid(const json& j) {
  if (j.is_array()) return AlphaGrid{numbers(j, "alpha_grid")};
  only_keys(j, {"lo", "hi", "n", "infinity"}, "alpha_grid");
  return AlphaGrid::linspace(j.contains("lo") ? number(j["lo"], "alpha_grid.lo") : 0.0,
                             j.contains("hi") ? number(j["hi"], "alpha_grid.hi") : 180.0,
                             j.contains("n") ? unsigned_int(j["n"], "alpha_grid.n") : 120,
                             j.value("infinity", true));
}

BetaFamily parse_beta(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "full") return BetaFamily::full_grid();
    if (s == "coarse") return BetaFamily::coarse_grid();
    bad("beta must be \"full\", \"coarse\" or an object");
  }
  only_keys(j, {"mean_grid", "shape_grid"}, "beta");
  BetaFamily f;
  f.mean_grid = numbers(j.at("mean_grid"), "beta.mean_grid");
  f.shape_grid = numbers(j.at("shape_grid"), "beta.shape_grid");
  for (double& v : f.shape_grid) {
    if (v == 0.0) v = 1e-6;
  }
  return f;
}

KsConfig parse_ks(const json& j) {
  only_keys(j, {"rho_grid", "folds"}, "ks");
  KsConfig c;
  if (j.contains("rho_grid")) c.rho_grid = numbers(j["rho_grid"], "ks.rho_grid");
  if (j.contains("folds")) c.folds = static_cast<int>(unsigned_int(j["folds"], "ks.folds"));
  return c;
}

CleaningOptions parse_cleaning(const json& j) {
  only_keys(j, {"drop_weekends", "detrend_linear", "drop_months"}, "cleaning");
  CleaningOptions c;
  c.drop_weekends = j.value("drop_weekends", false);
  c.detrend_linear = j.value("detrend_linear", false);
  if (j.contains("drop_months")) {
    for (const auto& m : j["drop_months"]) {
      const auto v = static_cast<int>(unsigned_int(m, "cleaning.drop_months"));
      if (v < 1 || v > 12) bad("cleaning.drop_months entries must lie in 1..12");
      c.drop_months.push_back(v);
    }
  }
  return c;
}

std::vector<std::string> parse_policies(const json& j) {
  if (!j.is_array()) bad("policies must be an array of names");
  std::vector<std::string> out;
  for (const auto& p : j) {
    if (!p.is_string()) bad("policies must be an array of names");
    const auto name = p.get<std::string>();
    if (!known_policy(name)) bad("unknown policy '" + name + "'");
    out.push_back(name);
  }
  return out;
}

TruthModel parse_truth(const json& j, std::size_t d) {
  TruthModel t;
  if (j.is_string()) {
    if (j.get<std::string>() != "dirichlet_uniform") bad("unknown truth_model '" + j.get<std::string>() + "'");
    return t;
  }
  if (!j.is_object() || !j.contains("type")) bad("truth_model needs a type");
  const auto type = j["type"].get<std::string>();
  if (type == "dirichlet_uniform") {
    only_keys(j, {"type"}, "truth_model");
  } else if (type == "dirichlet") {
    only_keys(j, {"type", "concentration"}, "truth_model");
    t.kind = TruthKind::Dirichlet;
    const auto& c = j.at("concentration");
    t.concentration = c.is_array() ? numbers(c, "concentration") : std::vector<double>(d, number(c, "concentration"));
  } else if (type == "mixture") {
    only_keys(j, {"type", "components"}, "truth_model");
    t.kind = TruthKind::Mixture;
    for (const auto& c : j.at("components")) {
      only_keys(c, {"weight", "model"}, "mixture component");
      t.proportions.push_back(number(c.at("weight"), "mixture weight"));
      t.components.push_back(parse_truth(c.at("model"), d));
    }
  } else if (type == "bernoulli") {
    only_keys(j, {"type", "p_lo", "p_hi"}, "truth_model");
    t.kind = TruthKind::Bernoulli;
    t.p_lo = number(j.value("p_lo", json(0.6)), "p_lo");
    t.p_hi = number(j.value("p_hi", json(0.9)), "p_hi");
  } else if (type == "spike") {
    only_keys(j, {"type", "mass"}, "truth_model");
    t.kind = TruthKind::Spike;
    t.spike = number(j.value("mass", json(0.9)), "mass");
  } else if (type == "from_empirical") {
    only_keys(j, {"type", "csv", "cleaning"}, "truth_model");
    t.kind = TruthKind::FromEmpirical;
    t.csv_path = j.at("csv").get<std::string>();
    if (j.contains("cleaning")) t.cleaning = parse_cleaning(j["cleaning"]);
  } else {
    bad("unknown truth_model type '" + type + "'");
  }
  return t;
}

DataModel parse_data(const json& j) {
  DataModel m;
  only_keys(j, {"type", "N", "lambda", "n"}, "data_model");
  const auto type = j.at("type").get<std::string>();
  if (type == "poisson") {
    m.kind = DataKind::Poisson;
    if (j.contains("N")) m.N = number(j["N"], "data_model.N");
    if (j.contains("lambda")) {
      const auto range = numbers(j["lambda"], "data_model.lambda");
      if (range.size() != 2) bad("data_model.lambda must be [lo, hi]");
      m.lambda_lo = range[0];
      m.lambda_hi = range[1];
    }
  } else if (type == "fixed") {
    m.kind = DataKind::Fixed;
    if (j.contains("n")) m.fixed_n = static_cast<std::int64_t>(unsigned_int(j["n"], "data_model.n"));
  } else {
    bad("unknown data_model type '" + type + "'");
  }
  return m;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("spec is not valid JSON: ") + e.what());
  }
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

}  // namespace

void SimSpec::validate() const {
  if (K == 0) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "d must be at least 1");
  if (reps == 0) throw Error(ErrorCode::InvalidArgument, "reps must be at least 1");
  if (cost == CostKind::Newsvendor && !(s > 0.0 && s < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "s must lie in (0,1)");
  }
  if (anchor && anchor->size() != d) throw Error(ErrorCode::DimensionMismatch, "anchor length differs from d");
  if (support == SupportKind::Random && !(support_lo < support_hi)) {
    throw Error(ErrorCode::InvalidBounds, "random support needs lo < hi");
  }
  grid.validate();
  for (const auto& p : policies) {
    if (!known_policy(p)) throw Error(ErrorCode::InvalidArgument, "unknown policy '" + p + "'");
  }
  if (truth.kind == TruthKind::Mixture) {
    double total = 0.0;
    for (double w : truth.proportions) total += w;
    if (truth.components.empty() || std::abs(total - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, "mixture proportions must sum to 1");
    }
  }
  if (truth.kind == TruthKind::Dirichlet && truth.concentration.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "Dirichlet concentration length differs from d");
  }
  if (truth.kind == TruthKind::Bernoulli && d != 2) {
    throw Error(ErrorCode::InvalidArgument, "Bernoulli truths need d = 2");
  }
  if (truth.kind == TruthKind::Spike && d < 4) throw Error(ErrorCode::InvalidArgument, "spike truths need d >= 4");
  if (data.kind == DataKind::Poisson && !(data.N >= 0.0 && data.lambda_lo > 0.0 && data.lambda_lo <= data.lambda_hi)) {
    throw Error(ErrorCode::InvalidArgument, "Poisson data needs N >= 0 and 0 < lambda_lo <= lambda_hi");
  }
}

SimSpec parse_sim_spec(const std::string& json_text) {
  const json j = parse_json(json_text);
  only_keys(j,
            {"K", "d", "support", "truth_model", "data_model", "cost", "s", "anchor", "policies", "alpha_grid",
             "reps", "seed", "beta", "ks"},
            "simulation spec");
  SimSpec spec;
  if (j.contains("K")) spec.K = unsigned_int(j["K"], "K");
  if (j.contains("d")) spec.d = unsigned_int(j["d"], "d");
  if (j.contains("support")) {
    const auto& s = j["support"];
    if (s.is_string() && s.get<std::string>() == "integers") {
      spec.support = SupportKind::Integers;
    } else {
      only_keys(s, {"type", "lo", "hi"}, "support");
      if (s.at("type").get<std::string>() != "random") bad("support type must be integers or random");
      spec.support = SupportKind::Random;
      spec.support_lo = number(s.value("lo", json(0.0)), "support.lo");
      spec.support_hi = number(s.value("hi", json(10.0)), "support.hi");
    }
  }
  if (j.contains("truth_model")) spec.truth = parse_truth(j["truth_model"], spec.d);
  if (j.contains("data_model")) spec.data = parse_data(j["data_model"]);
  if (j.contains("cost")) {
    const auto c = j["cost"].get<std::string>();
    if (c == "newsvendor") {
      spec.cost = CostKind::Newsvendor;
    } else if (c == "mse") {
      spec.cost = CostKind::Mse;
    } else {
      bad("cost must be newsvendor or mse");
    }
  }
  if (j.contains("s")) spec.s = number(j["s"], "s");
  if (j.contains("anchor")) {
    const auto& a = j["anchor"];
    if (a.is_string()) {
      if (a.get<std::string>() != "uniform") bad("anchor must be \"uniform\" or a probability vector");
    } else {
      spec.anchor = Distribution(numbers(a, "anchor"));
    }
  }
  if (j.contains("policies")) spec.policies = parse_policies(j["policies"]);
  if (j.contains("alpha_grid")) spec.grid = parse_grid(j["alpha_grid"]);
  if (j.contains("reps")) spec.reps = unsigned_int(j["reps"], "reps");
  if (j.contains("seed")) spec.seed = unsigned_int(j["seed"], "seed");
  if (j.contains("beta")) spec.beta = parse_beta(j["beta"]);
  if (j.contains("ks")) spec.ks = parse_ks(j["ks"]);
  spec.validate();
  return spec;
}

SimSpec load_sim_spec(const std::string& path) { return parse_sim_spec(slurp(path)); }

void BacktestSpec::validate() const {
  if (n_train < 1 || n_test < 1) throw Error(ErrorCode::InvalidArgument, "n_train and n_test must be >= 1");
  if (reps == 0) throw Error(ErrorCode::InvalidArgument, "reps must be at least 1");
  if (d && *d == 0) throw Error(ErrorCode::InvalidArgument, "d must be at least 1");
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorCode::InvalidArgument, "s must lie in (0,1)");
  grid.validate();
  for (const auto& p : policies) {
    if (!known_policy(p)) throw Error(ErrorCode::InvalidArgument, "unknown policy '" + p + "'");
  }
}

BacktestSpec parse_backtest_spec(const std::string& json_text) {
  const json j = parse_json(json_text);
  only_keys(j,
            {"csv_path", "cleaning", "d", "n_train", "n_test", "reps", "s", "policies", "alpha_grid", "seed",
             "beta", "ks"},
            "backtest spec");
  BacktestSpec spec;
  if (j.contains("csv_path")) spec.csv_path = j["csv_path"].get<std::string>();
  if (j.contains("cleaning")) spec.cleaning = parse_cleaning(j["cleaning"]);
  if (j.contains("d")) {
    const double d = number(j["d"], "d");
    if (std::isinf(d)) {
      spec.d.reset();
    } else {
      spec.d = unsigned_int(j["d"], "d");
    }
  }
  if (j.contains("n_train")) spec.n_train = unsigned_int(j["n_train"], "n_train");
  if (j.contains("n_test")) spec.n_test = unsigned_int(j["n_test"], "n_test");
  if (j.contains("reps")) spec.reps = unsigned_int(j["reps"], "reps");
  if (j.contains("s")) spec.s = number(j["s"], "s");
  if (j.contains("policies")) spec.policies = parse_policies(j["policies"]);
  if (j.contains("alpha_grid")) spec.grid = parse_grid(j["alpha_grid"]);
  if (j.contains("seed")) spec.seed = unsigned_int(j["seed"], "seed");
  if (j.contains("beta")) spec.beta = parse_beta(j["beta"]);
  if (j.contains("ks")) spec.ks = parse_ks(j["ks"]);
  spec.validate();
  return spec;
}

BacktestSpec load_backtest_spec(const std::string& path) { return parse_backtest_spec(slurp(path)); }

}  // namespace ssaa
