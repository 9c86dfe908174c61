#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sfirg {

// Every stochastic operation takes an explicit engine; streams are forked by
// re-seeding, never shared between threads.
using Rng = std::mt19937_64;

// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform on (0, 1] with 53 random bits; never returns 0, so 1/u and log(u)
// are always finite.
inline double uniform_open_closed(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// Uniform on [0, 1).
inline double uniform_closed_open(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double unit_exponential(Rng& rng) { return -std::log(uniform_open_closed(rng)); }

inline std::uint64_t poisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::poisson_distribution<std::int64_t>(mean)(rng));
}

inline bool bernoulli(Rng& rng, double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return uniform_closed_open(rng) < p;
}

// Walker/Vose alias table: O(n) build, O(1) draws of index i with
// probability proportional to weights[i].
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(std::span<const double> weights) : prob_(weights.size()), alias_(weights.size()) {
    const std::size_t n = weights.size();
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    small.reserve(n);
    large.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      small.pop_back();
      const auto l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // Leftovers are 1 up to rounding.
    for (auto i : large) prob_[i] = 1.0, alias_[i] = i;
    for (auto i : small) prob_[i] = 1.0, alias_[i] = i;
  }

  std::size_t size() const noexcept { return prob_.size(); }

  std::size_t operator()(Rng& rng) const {
    const double u = uniform_closed_open(rng) * static_cast<double>(prob_.size());
    const auto i = std::min(static_cast<std::size_t>(u), prob_.size() - 1);
    return (u - static_cast<double>(i)) < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace sfirg
