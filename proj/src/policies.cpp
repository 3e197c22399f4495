#include "policies.hpp"

#include <cmath>
#include <limits>

#include "ssaa/oracle.hpp"
#include "ssaa/parallel.hpp"
#include "ssaa/rng.hpp"

namespace ssaa::detail {

std::optional<PolicyName> parse_policy(const std::string& name) {
  if (name == "SAA") return PolicyName{PolicyBase::Saa, AnchorKind::None, 0};
  if (name == "KS") return PolicyName{PolicyBase::Ks, AnchorKind::None, 0};
  std::string rest = name;
  PolicyName p;
  auto strip_prefix = [&](const std::string& prefix) {
    if (rest.rfind(prefix, 0) != 0) return false;
    rest = rest.substr(prefix.size());
    return true;
  };
  if (strip_prefix("JS-")) {
    p.base = PolicyBase::JamesStein;
  } else if (strip_prefix("S-SAA-")) {
    p.base = PolicyBase::Shrunken;
  } else if (strip_prefix("Oracle-")) {
    p.base = PolicyBase::Oracle;
  } else {
    return std::nullopt;
  }
  if (p.base == PolicyBase::Shrunken) {
    const auto pos = rest.find("-KF");
    if (pos != std::string::npos) {
      const std::string digits = rest.substr(pos + 3);
      if (digits.empty() || digits.size() > 4 ||
          digits.find_first_not_of("0123456789") != std::string::npos) {
        return std::nullopt;
      }
      p.kfold = std::stoi(digits);
      if (p.kfold < 2) return std::nullopt;
      rest = rest.substr(0, pos);
    }
  }
  if (rest == "Fixed") {
    p.anchor = AnchorKind::Fixed;
  } else if (rest == "GM") {
    p.anchor = AnchorKind::GrandMean;
  } else if (rest == "Beta" && p.base != PolicyBase::JamesStein) {
    p.anchor = AnchorKind::Beta;
  } else {
    return std::nullopt;
  }
  return p;
}

double true_performance(const Dataset& dataset, const std::vector<Decision>& decisions) {
  if (!dataset.has_truth()) throw Error(ErrorCode::MissingTruth, "every problem needs a true distribution");
  const double lambda_bar = dataset.mean_weight();
  double sum = 0.0;
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    const auto& inst = dataset.problems[k];
    sum += inst.weight / lambda_bar * expected_cost(inst, decisions[k], inst.truth->probs());
  }
  return sum / static_cast<double>(dataset.size());
}

namespace {

std::vector<Decision> pooled_decisions(const Dataset& dataset, const Anchors& anchors, Alpha alpha) {
  std::vector<Decision> out(dataset.size());
  parallel_for(dataset.size(), [&](std::size_t k) {
    out[k] = solve_shrunken(dataset.problems[k], anchors[k], alpha);
  });
  return out;
}

std::vector<Decision> ks_decisions(const Dataset& dataset, const PolicyContext& ctx) {
  std::vector<Decision> out(dataset.size());
  KsConfig config = ctx.ks;
  config.seed = stream_key(ctx.seed, 0, ctx.rep, Purpose::KsFold);
  parallel_for(dataset.size(), [&](std::size_t k) {
    const auto& inst = dataset.problems[k];
    const auto* nv = std::get_if<Newsvendor>(&inst.cost);
    if (!nv) throw Error(ErrorCode::InvalidArgument, "the KS policy needs newsvendor costs");
    std::vector<double> samples;
    for (std::size_t i = 0; i < inst.dimension(); ++i) samples.insert(samples.end(), inst.counts[i], inst.support[i]);
    if (samples.empty()) {
      out[k] = solve_plugin(inst, Distribution::uniform(inst.dimension()));
      return;
    }
    const Bounds bounds = ctx.ks_bounds.empty() ? observed_bounds(samples) : ctx.ks_bounds[k];
    const double rho = ks_select_rho(samples, nv->s, bounds, config, k);
    out[k] = ScalarLevel{ks_solve(samples, rho, nv->s, bounds)};
  });
  return out;
}

}  // namespace

PolicyResult run_policy(const PolicyName& policy, const Dataset& dataset, const PolicyContext& ctx) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t K = dataset.size();
  if (policy.base == PolicyBase::Saa) {
    Anchors uniform;
    for (const auto& inst : dataset.problems) uniform.push_back(Distribution::uniform(inst.dimension()));
    return {pooled_decisions(dataset, uniform, 0.0), 0.0};
  }
  if (policy.base == PolicyBase::Ks) return {ks_decisions(dataset, ctx), nan};

  if (policy.anchor == AnchorKind::Beta) {
    const auto candidates = beta_candidates(ctx.beta, dataset);
    const PoolingSelection sel = policy.base == PolicyBase::Oracle
                                     ? select_joint_oracle(dataset, candidates, ctx.grid)
                                     : select_joint_hloo(dataset, candidates, ctx.grid);
    return {pooled_decisions(dataset, sel.anchors, sel.alpha), sel.alpha};
  }

  const Anchors anchors = policy.anchor == AnchorKind::Fixed ? replicate(ctx.fixed_anchor, K)
                                                             : replicate(grand_mean(dataset), K);
  Alpha alpha = 0.0;
  switch (policy.base) {
    case PolicyBase::JamesStein:
      try {
        alpha = alpha_js(dataset, anchor_means(dataset, anchors));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientData) throw;
        alpha = 0.0;
      }
      break;
    case PolicyBase::Oracle:
      alpha = select_alpha_oracle(dataset, anchors, ctx.grid).alpha;
      break;
    default:
      alpha = policy.kfold > 0
                  ? select_alpha_kfold(dataset, anchors, ctx.grid, policy.kfold,
                                       stream_key(ctx.seed, 0, ctx.rep, Purpose::Fold))
                        .alpha
                  : select_alpha_loo(dataset, anchors, ctx.grid).alpha;
  }
  return {pooled_decisions(dataset, anchors, alpha), alpha};
}

}  // namespace ssaa::detail
