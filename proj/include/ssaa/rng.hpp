#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ssaa {

/// Identifier of the generator below; bump when any draw sequence changes.
inline constexpr const char* kRngName = "splitmix64-ctr-v1";

std::uint64_t mix64(std::uint64_t z);

/// Tags keep streams for different uses of the same (k, rep) apart.
enum class Purpose : std::uint64_t {
  Truth = 1,
  Weight = 2,
  SampleSize = 3,
  Counts = 4,
  Fold = 5,
  KsFold = 6,
  Backtest = 7,
  Support = 8,
  Instance = 9,
  Store = 10,
};

/// hash(seed, k, rep, tag): key of an independent stream.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t k, std::uint64_t rep, Purpose tag);

/// Counter-based generator: the i-th output is mix64(key + i * golden).
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}
  Rng(std::uint64_t seed, std::uint64_t k, std::uint64_t rep, Purpose tag)
      : key_(stream_key(seed, k, rep, tag)) {}

  std::uint64_t next();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  double gamma(double shape);
  double beta(double a, double b);
  std::int64_t poisson(double mean);
  std::vector<double> dirichlet(std::span<const double> concentration);
  /// Uniform point of the simplex with d coordinates.
  std::vector<double> dirichlet_uniform(std::size_t d);
  /// Counts of n categorical draws from p.
  std::vector<std::int64_t> multinomial(std::int64_t n, std::span<const double> p);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ssaa
