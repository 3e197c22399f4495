#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lp_oracle.hpp"

namespace oracle {

/// Lowest index whose expected cost is within tol of the minimum.
inline std::size_t argmin_rows(const std::vector<std::vector<double>>& costs, const std::vector<double>& p,
                               double tol = 1e-9) {
  std::vector<double> v(costs.size(), 0.0);
  for (std::size_t j = 0; j < costs.size(); ++j) {
    for (std::size_t i = 0; i < p.size(); ++i) v[j] += p[i] * costs[j][i];
  }
  double best = v[0];
  for (double x : v) best = std::min(best, x);
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (v[j] - best <= tol) return j;
  }
  return 0;
}

/// Smallest support level minimizing the expected newsvendor cost.
inline double newsvendor_by_scan(const std::vector<double>& support, const std::vector<double>& p, double s) {
  std::vector<std::vector<double>> costs(support.size(), std::vector<double>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    for (std::size_t i = 0; i < support.size(); ++i) costs[j][i] = newsvendor(s, support[j], support[i]);
  }
  return support[argmin_rows(costs, p)];
}

inline std::vector<double> shrink(const std::vector<std::int64_t>& m, const std::vector<double>& q, double alpha) {
  double n = 0.0;
  for (auto v : m) n += static_cast<double>(v);
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    out[i] = (n == 0.0 || std::isinf(alpha)) ? q[i] : (alpha * q[i] + static_cast<double>(m[i])) / (n + alpha);
  }
  return out;
}

}  // namespace oracle
