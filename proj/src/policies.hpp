#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssaa/benchmarks.hpp"
#include "ssaa/core.hpp"
#include "ssaa/pooling.hpp"
#include "ssaa/solvers.hpp"

namespace ssaa::detail {

enum class PolicyBase { Saa, Ks, JamesStein, Shrunken, Oracle };
enum class AnchorKind { None, Fixed, Beta, GrandMean };

struct PolicyName {
  PolicyBase base = PolicyBase::Saa;
  AnchorKind anchor = AnchorKind::None;
  int kfold = 0;  ///< 0: leave-one-out
};

std::optional<PolicyName> parse_policy(const std::string& name);

struct PolicyContext {
  AlphaGrid grid;
  BetaFamily beta;
  KsConfig ks;
  Distribution fixed_anchor;         ///< common fixed anchor
  std::vector<Bounds> ks_bounds;     ///< per problem; observed range when empty
  std::uint64_t seed = 0;
  std::size_t rep = 0;
};

struct PolicyResult {
  std::vector<Decision> decisions;
  double alpha = 0.0;  ///< NaN when the policy has no pooling amount
};

/// Trains one policy on the counts of `dataset`. Oracle policies read the truths.
PolicyResult run_policy(const PolicyName& policy, const Dataset& dataset, const PolicyContext& ctx);

/// (1/K) sum_k (lambda_k / lambda_bar) p_k' c_k(x_k).
double true_performance(const Dataset& dataset, const std::vector<Decision>& decisions);

}  // namespace ssaa::detail
