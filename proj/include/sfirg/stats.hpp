#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "sfirg/errors.hpp"

// Summary statistics and goodness-of-fit tools used by the experiments and
// by the statistical test suites.

namespace sfirg {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Unbiased sample variance.
inline double variance(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("variance needs at least two values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double median(std::vector<double> x) {
  if (x.empty()) throw DomainError("median of empty sample");
  const auto mid = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid), x.end());
  const double hi = x[mid];
  if (x.size() % 2 == 1) return hi;
  const double lo = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// sup_x |F_m(x) - F(x)| for the empirical CDF of the samples.
template <typename Cdf>
double ks_statistic(std::span<const double> samples, Cdf&& cdf) {
  if (samples.empty()) throw DomainError("ks_statistic of empty sample");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double m = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - f, f - static_cast<double>(i) / m});
  }
  return std::min(d, 1.0);
}

// sup_x |F_a(x) - F_b(x)|, tie-aware.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample of empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    const double pi = std::numbers::pi;
    double s = 0.0;
    for (int j = 1; j <= 20; ++j) {
      const double t = (2.0 * j - 1.0) * pi / lambda;
      s += std::exp(-t * t / 8.0);
    }
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    s += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

// Asymptotic p-value with the Stephens small-sample correction.
inline double ks_pvalue(double d, double effective_n) {
  const double r = std::sqrt(effective_n);
  return kolmogorov_survival((r + 0.12 + 0.11 / r) * d);
}

inline double ks_two_sample_pvalue(std::span<const double> a, std::span<const double> b) {
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  return ks_pvalue(ks_two_sample(a, b), na * nb / (na + nb));
}

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

// Pearson goodness of fit. Adjacent cells are pooled left to right until each
// has expected count >= min_expected; leftovers join the last pooled cell.
inline ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected,
                                      double min_expected = 5.0) {
  if (observed.size() != expected.size() || observed.empty()) throw DomainError("chi_square_gof size mismatch");
  std::vector<double> obs, exp;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += observed[i];
    e += expected[i];
    if (e >= min_expected) {
      obs.push_back(o);
      exp.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp.empty()) {
      obs.push_back(o);
      exp.push_back(e);
    } else {
      obs.back() += o;
      exp.back() += e;
    }
  }
  if (exp.size() < 2) throw DomainError("chi_square_gof needs at least two pooled cells");
  ChiSquareResult r;
  for (std::size_t i = 0; i < exp.size(); ++i) r.statistic += (obs[i] - exp[i]) * (obs[i] - exp[i]) / exp[i];
  r.dof = exp.size() - 1;
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(r.dof)), r.statistic));
  return r;
}

// Uniform bins over [lo, hi); each bin is half-open [edge_i, edge_{i+1}).
struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;  // includes x >= hi and NaN
};

inline Histogram histogram(std::span<const double> samples, std::size_t bins, double lo, double hi) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  if (!(lo < hi)) throw DomainError("histogram range must satisfy lo < hi");
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double x : samples) {
    if (x < lo) {
      ++h.underflow;
    } else if (!(x < hi)) {
      ++h.overflow;
    } else {
      auto b = std::min(static_cast<std::size_t>((x - lo) / width), bins - 1);
      // Rounding in (x - lo) / width can land one bin off the edge convention.
      if (x < h.edges[b]) --b;
      else if (b + 1 < bins && x >= h.edges[b + 1]) ++b;
      ++h.counts[b];
    }
  }
  return h;
}

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

inline LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("least squares needs >= 2 paired points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("least squares needs at least two distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace sfirg
