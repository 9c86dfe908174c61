#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "sfirg/errors.hpp"

// Tail-index estimators on descending order statistics X(1) >= X(2) >= ...
// The k arguments are 1-based order-statistic indices: X(k) is sorted[k-1].

namespace sfirg {

enum class Estimator { Hill, Pickands, PWM };

inline const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::Hill: return "hill";
    case Estimator::Pickands: return "pickands";
    case Estimator::PWM: return "pwm";
  }
  return "unknown";
}

inline Estimator parse_estimator(std::string_view s) {
  if (s == "hill") return Estimator::Hill;
  if (s == "pickands") return Estimator::Pickands;
  if (s == "pwm") return Estimator::PWM;
  throw ParseError("unknown estimator '" + std::string(s) + "' (expected hill, pickands or pwm)");
}

struct EstimatorOutput {
  Estimator name = Estimator::Hill;
  std::size_t k = 0;
  double gamma_hat = 0.0;
  std::optional<double> tau;              // asymptotic variance, empty where undefined
  std::optional<double> centered_scaled;  // sqrt(k) (gamma_hat - gamma) / sqrt(tau(gamma))
};

// --- asymptotic variances -------------------------------------------------

inline double tau_hill(double gamma) {
  if (!(gamma > 0.0)) throw DomainError("tau_hill needs gamma > 0");
  return gamma * gamma;
}

inline double tau_pickands(double gamma) {
  if (!(gamma > 0.0)) throw DomainError("tau_pickands needs gamma > 0");
  const double ln2 = std::numbers::ln2;
  const double d = std::exp2(gamma) - 1.0;
  return gamma * gamma * (std::exp2(2.0 * gamma + 1.0) + 1.0) / (4.0 * ln2 * ln2 * d * d);
}

inline double tau_pwm(double gamma) {
  if (!(gamma >= 0.0 && gamma < 0.5)) throw DomainError("tau_pwm needs 0 <= gamma < 1/2");
  const double g = gamma;
  return (1.0 - g) * (2.0 - g) * (2.0 - g) * (1.0 - g + 2.0 * g * g) / ((1.0 - 2.0 * g) * (3.0 - 2.0 * g));
}

inline double tau(Estimator e, double gamma) {
  switch (e) {
    case Estimator::Hill: return tau_hill(gamma);
    case Estimator::Pickands: return tau_pickands(gamma);
    case Estimator::PWM: return tau_pwm(gamma);
  }
  return 0.0;
}

// Where gamma lies outside the formula's domain the variance is reported as absent.
inline std::optional<double> tau_if_defined(Estimator e, double gamma) {
  try {
    return tau(e, gamma);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

// Limiting covariance of the scaled PWM moments (I1, I2), gamma < 1/2.
inline std::array<std::array<double, 2>, 2> pwm_covariance(double gamma) {
  if (!(gamma < 0.5)) throw DomainError("pwm_covariance needs gamma < 1/2");
  std::array<std::array<double, 2>, 2> s{};
  for (int q = 1; q <= 2; ++q)
    for (int r = 1; r <= 2; ++r) {
      const double qd = q, rd = r;
      s[q - 1][r - 1] = (qd * rd / (qd + rd - 1.0 - 2.0 * gamma) + gamma * gamma) /
                        (qd * (qd - gamma) * rd * (rd - gamma));
    }
  return s;
}

// Root of tau_pwm - tau_pickands on (0, 1/2): below it PWM has the smaller
// asymptotic variance. Bisection to 1e-6.
inline double variance_crossover(double tol = 1e-6) {
  auto f = [](double g) { return tau_pwm(g) - tau_pickands(g); };
  const double lo = 1e-3, hi = 0.5 - 1e-3;
  if (!(f(lo) * f(hi) < 0.0)) throw NumericError("no sign change of tau_pwm - tau_pickands on (0, 1/2)");
  const auto [a, b] = boost::math::tools::bisect(f, lo, hi, [tol](double x, double y) { return std::fabs(y - x) <= tol; });
  return 0.5 * (a + b);
}

// --- estimators -----------------------------------------------------------

namespace detail {

template <typename T>
double at(std::span<const T> x, std::size_t i) {  // 1-based X(i)
  return static_cast<double>(x[i - 1]);
}

inline EstimatorOutput finish(Estimator e, std::size_t k, double gamma_hat) {
  EstimatorOutput out;
  out.name = e;
  out.k = k;
  out.gamma_hat = gamma_hat;
  out.tau = tau_if_defined(e, gamma_hat);
  return out;
}

}  // namespace detail

// (1/(k-1)) sum_{i<k} log(X(i) / X(k)).
template <typename T>
EstimatorOutput hill(std::span<const T> sorted, std::size_t k) {
  if (k < 2 || k > sorted.size()) throw DomainError("hill needs 2 <= k <= n");
  const double xk = detail::at(sorted, k);
  if (!(xk > 0.0)) throw DomainError("hill needs X(k) > 0");
  double s = 0.0;
  for (std::size_t i = 1; i < k; ++i) s += std::log(detail::at(sorted, i) / xk);
  return detail::finish(Estimator::Hill, k, s / static_cast<double>(k - 1));
}

// log((X(k) - X(2k)) / (X(2k) - X(4k))) / log 2.
template <typename T>
EstimatorOutput pickands(std::span<const T> sorted, std::size_t k) {
  if (k < 1 || 4 * k > sorted.size()) throw DomainError("pickands needs 1 <= k and 4k <= n");
  const double a = detail::at(sorted, k), b = detail::at(sorted, 2 * k), c = detail::at(sorted, 4 * k);
  if (!(b - c > 0.0))
    throw DegenerateSample(Degeneracy::ZeroDenominator, "pickands: X(2k) == X(4k), zero denominator");
  if (!(a - b > 0.0))
    throw DegenerateSample(Degeneracy::ZeroNumerator, "pickands: X(k) == X(2k), estimate would be -inf");
  return detail::finish(Estimator::Pickands, k, std::log((a - b) / (b - c)) / std::numbers::ln2);
}

struct PwmMoments {
  double i1 = 0.0;
  double i2 = 0.0;
};

// I^(q) = (1/(k-1)) sum_{i<k} (i/(k-1))^{q-1} (X(i) - X(k)), q = 1, 2.
template <typename T>
PwmMoments pwm_moments(std::span<const T> sorted, std::size_t k) {
  if (k < 2 || k > sorted.size()) throw DomainError("pwm needs 2 <= k <= n");
  const double xk = detail::at(sorted, k);
  const double m = static_cast<double>(k - 1);
  PwmMoments out;
  for (std::size_t i = 1; i < k; ++i) {
    const double excess = detail::at(sorted, i) - xk;
    out.i1 += excess;
    out.i2 += static_cast<double>(i) / m * excess;
  }
  out.i1 /= m;
  out.i2 /= m;
  return out;
}

template <typename T>
EstimatorOutput pwm(std::span<const T> sorted, std::size_t k) {
  const PwmMoments mom = pwm_moments(sorted, k);
  const double den = mom.i1 - 2.0 * mom.i2;
  if (den == 0.0) throw DegenerateSample(Degeneracy::TiedMoments, "pwm: I1 == 2 I2, estimate undefined");
  return detail::finish(Estimator::PWM, k, (mom.i1 - 4.0 * mom.i2) / den);
}

template <typename T>
EstimatorOutput estimate(Estimator e, std::span<const T> sorted, std::size_t k) {
  switch (e) {
    case Estimator::Hill: return hill(sorted, k);
    case Estimator::Pickands: return pickands(sorted, k);
    case Estimator::PWM: return pwm(sorted, k);
  }
  throw DomainError("unknown estimator");
}

// Recomputes tau at the true gamma and fills the centered, scaled value.
inline EstimatorOutput center_and_scale(EstimatorOutput out, double gamma_true) {
  const double t = tau(out.name, gamma_true);
  out.tau = t;
  out.centered_scaled = std::sqrt(static_cast<double>(out.k)) * (out.gamma_hat - gamma_true) / std::sqrt(t);
  return out;
}

template <typename T>
EstimatorOutput hill(const std::vector<T>& x, std::size_t k) { return hill(std::span<const T>(x), k); }
template <typename T>
EstimatorOutput pickands(const std::vector<T>& x, std::size_t k) { return pickands(std::span<const T>(x), k); }
template <typename T>
PwmMoments pwm_moments(const std::vector<T>& x, std::size_t k) { return pwm_moments(std::span<const T>(x), k); }
template <typename T>
EstimatorOutput pwm(const std::vector<T>& x, std::size_t k) { return pwm(std::span<const T>(x), k); }

}  // namespace sfirg
