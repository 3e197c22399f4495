#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>

#include "ssaa/experiments.hpp"

namespace ssaa {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ExperimentReport::add(long rep, std::size_t K, const std::string& policy, double alpha,
                           const std::string& metric, double value) {
  rows.push_back({rep, K, policy, alpha, metric, value});
}

void ExperimentReport::aggregate() {
  using Key = std::tuple<std::size_t, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<double>> values;
  for (const auto& r : rows) {
    if (r.rep < 0) continue;
    Key key{r.K, r.policy, r.metric};
    auto [it, inserted] = values.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r.value);
  }
  const double nan = std::nan("");
  for (const auto& key : order) {
    const auto& v = values[key];
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double se = nan;
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      se = std::sqrt(ss / (n - 1.0) / n);
    }
    const auto& [K, policy, metric] = key;
    add(-1, K, policy, nan, metric + "_mean", mean);
    add(-1, K, policy, nan, metric + "_se", se);
  }
}

std::string ExperimentReport::to_csv() const {
  std::string out = "rep,K,policy,alpha,metric,value\n";
  for (const auto& r : rows) {
    out += std::to_string(r.rep);
    out += ',';
    out += std::to_string(r.K);
    out += ',';
    out += r.policy;
    out += ',';
    out += format_number(r.alpha);
    out += ',';
    out += r.metric;
    out += ',';
    out += format_number(r.value);
    out += '\n';
  }
  return out;
}

void ExperimentReport::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot open " + path + " for writing");
  f << to_csv();
  if (!f) throw Error(ErrorCode::InvalidArgument, "failed writing " + path);
}

}  // namespace ssaa
