#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sfirg/errors.hpp"
#include "sfirg/weights.hpp"

namespace sfirg {

// R_i = #{j : D_i <= D_j}, 1-based ranks, ties share the larger rank.
template <typename T>
std::vector<std::size_t> ranks(std::span<const T> d) {
  if (d.empty()) throw DomainError("ranks of an empty degree array");
  std::vector<T> asc(d.begin(), d.end());
  std::sort(asc.begin(), asc.end());
  std::vector<std::size_t> r(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto below = std::lower_bound(asc.begin(), asc.end(), d[i]) - asc.begin();
    r[i] = d.size() - static_cast<std::size_t>(below);
  }
  return r;
}

template <typename T>
std::vector<std::size_t> ranks(const std::vector<T>& d) {
  return ranks(std::span<const T>(d));
}

// Smallest m (1-based) with D_(m) != D_m, the m-th largest degree differing
// from the degree of the m-th heaviest node. Returns n + 1 when no such m
// exists (full alignment).
template <typename T>
std::size_t alignment_index(std::span<const T> d) {
  if (d.empty()) throw DomainError("alignment index of an empty degree array");
  std::vector<T> desc(d.begin(), d.end());
  std::sort(desc.begin(), desc.end(), std::greater<>());
  for (std::size_t m = 0; m < d.size(); ++m)
    if (desc[m] != d[m]) return m + 1;
  return d.size() + 1;
}

template <typename T>
std::size_t alignment_index(const std::vector<T>& d) {
  return alignment_index(std::span<const T>(d));
}

// (R_1, ..., R_k) == (1, ..., k).
template <typename T>
bool ranks_aligned(std::span<const T> d, std::size_t k) {
  if (k > d.size()) throw DomainError("alignment prefix longer than the degree array");
  if (k == 0) return true;
  const auto r = ranks(d);
  for (std::size_t i = 0; i < k; ++i)
    if (r[i] != i + 1) return false;
  return true;
}

namespace detail {
inline double concentration_radius(double n, double w) { return std::sqrt(5.0 * std::log(n) * w); }
}  // namespace detail

// S(n): W(i) - W(i+1) > 2 sqrt(5 log(n) W(i)) for every i in [k].
inline bool check_event_s(const WeightVector& w, std::size_t k, std::size_t n) {
  if (k >= n) throw DomainError("event S needs k < n");
  if (k >= w.size()) throw DomainError("event S needs W(k+1)");
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < k; ++i)
    if (!(w[i] - w[i + 1] > 2.0 * detail::concentration_radius(nd, w[i]))) return false;
  return true;
}

// C(n): |D_i - W(i)| < sqrt(5 log(n) W(i)) for every i in [k].
template <typename T>
bool check_event_c(const WeightVector& w, std::span<const T> d, std::size_t k, std::size_t n) {
  if (k > n || k > d.size() || k > w.size()) throw DomainError("event C needs k <= n");
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < k; ++i)
    if (!(std::fabs(static_cast<double>(d[i]) - w[i]) < detail::concentration_radius(nd, w[i]))) return false;
  return true;
}

// M(n): D_k > max_{i > k} D_i. Vacuously true at k = n.
template <typename T>
bool check_event_m(std::span<const T> d, std::size_t k) {
  if (k < 1 || k > d.size()) throw DomainError("event M needs 1 <= k <= n");
  if (k == d.size()) return true;
  const T tail_max = *std::max_element(d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  return d[k - 1] > tail_max;
}

// max(1, floor(c n^{1/(4 alpha + 1)} / log^alpha(n))).
inline std::size_t admissible_k(std::size_t n, double alpha, double c = 1.0) {
  if (n < 3) throw DomainError("admissible_k needs n >= 3");
  if (!(alpha > 0.0)) throw DomainError("admissible_k needs alpha > 0");
  if (!(c > 0.0)) throw DomainError("admissible_k needs c > 0");
  const double nd = static_cast<double>(n);
  const double k = std::floor(c * std::pow(nd, 1.0 / (4.0 * alpha + 1.0)) / std::pow(std::log(nd), alpha));
  return k < 1.0 ? 1 : static_cast<std::size_t>(std::min(k, nd));
}

struct AlignmentRecord {
  std::size_t n = 0;
  std::size_t K = 1;  // clamped into [1, n]
  bool fully_aligned = false;
  std::size_t k_used = 0;
  bool aligned_k = false;
  bool event_s = false;
  bool event_c = false;
  bool event_m = false;
};

// Evaluates K(n) and the three events at one common k on an ordered sample.
template <typename T>
AlignmentRecord measure_alignment(const WeightVector& w, std::span<const T> d, std::size_t k) {
  const std::size_t n = d.size();
  if (w.size() != n) throw DomainError("weights and degrees differ in length");
  if (k < 1 || k >= n) throw DomainError("alignment needs 1 <= k < n");
  AlignmentRecord rec;
  rec.n = n;
  const std::size_t raw = alignment_index(d);
  rec.fully_aligned = raw > n;
  rec.K = std::min(raw, n);
  rec.k_used = k;
  rec.aligned_k = ranks_aligned(d, k);
  rec.event_s = check_event_s(w, k, n);
  rec.event_c = check_event_c(w, d, k, n);
  rec.event_m = check_event_m(d, k);
  return rec;
}

}  // namespace sfirg
