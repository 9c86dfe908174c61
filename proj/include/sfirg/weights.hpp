#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sfirg/errors.hpp"
#include "sfirg/random.hpp"

namespace sfirg {

enum class Family { Pareto, Burr, MixedPolyTail, Frechet, HalfCauchy };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::Pareto: return "pareto";
    case Family::Burr: return "burr";
    case Family::MixedPolyTail: return "mixedpoly";
    case Family::Frechet: return "frechet";
    case Family::HalfCauchy: return "halfcauchy";
  }
  return "unknown";
}

// First- and second-order tail description of a weight law, plus the
// user-declared (eta, t0) under which U(tx)/U(t) >= (1-eta) x^gamma + eta.
struct TailParams {
  double gamma = 1.0;
  double alpha = 1.0;
  std::optional<double> rho;
  double eta = 0.0;
  double t0 = 1.0;

  static TailParams make(double alpha, std::optional<double> rho, double eta, double t0) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("tail index alpha must be positive");
    if (rho && !(*rho <= 0.0)) throw DomainError("second-order parameter rho must be <= 0");
    if (!(eta >= 0.0 && eta < 1.0)) throw DomainError("eta must lie in [0, 1)");
    if (!(t0 >= 1.0)) throw DomainError("t0 must be >= 1");
    TailParams p;
    p.alpha = alpha;
    p.gamma = 1.0 / alpha;
    p.rho = rho;
    p.eta = eta;
    p.t0 = t0;
    return p;
  }
};

class WeightDistribution {
 public:
  // 1 - F(x) = (scale / x)^alpha on [scale, inf)
  static WeightDistribution pareto(double scale, double alpha) {
    if (!(scale > 0.0)) throw DomainError("pareto scale must be positive");
    return WeightDistribution(Family::Pareto, scale, TailParams::make(alpha, std::nullopt, 0.0, 1.0));
  }
  // 1 - F(x) = 1 / (1 + x^alpha) on (0, inf)
  static WeightDistribution burr(double alpha) {
    return WeightDistribution(Family::Burr, 1.0, TailParams::make(alpha, -1.0, 0.0, 2.0));
  }
  // 1 - F(x) = (2 + x) / x^2 on [2, inf); alpha = 1 with a slowly varying factor
  static WeightDistribution mixed_poly_tail() {
    return WeightDistribution(Family::MixedPolyTail, 1.0, TailParams::make(1.0, -1.0, 0.25, 10.0));
  }
  // F(x) = exp(-x^-alpha)
  static WeightDistribution frechet(double alpha) {
    return WeightDistribution(Family::Frechet, 1.0, TailParams::make(alpha, -1.0, 0.0, 2.0));
  }
  // F(x) = (2/pi) atan(x)
  static WeightDistribution half_cauchy() {
    return WeightDistribution(Family::HalfCauchy, 1.0, TailParams::make(1.0, -2.0, 0.0, 2.0));
  }

  // Grammar: family[:key=value,...], e.g. "pareto:scale=2,alpha=1",
  // "burr:alpha=2.5", "mixedpoly", "frechet:alpha=1.5", "halfcauchy".
  // Every family also accepts eta=... and t0=... overrides.
  static WeightDistribution parse(std::string_view spec);

  // Canonical spec string; parse(d.spec()) reproduces d.
  std::string spec() const;

  WeightDistribution with_lower_bound(double eta, double t0) const {
    WeightDistribution d = *this;
    d.tail_ = TailParams::make(tail_.alpha, tail_.rho, eta, t0);
    return d;
  }

  Family family() const noexcept { return family_; }
  const TailParams& tail() const noexcept { return tail_; }
  double gamma() const noexcept { return tail_.gamma; }
  double alpha() const noexcept { return tail_.alpha; }
  double scale() const noexcept { return scale_; }

  double support_min() const noexcept {
    switch (family_) {
      case Family::Pareto: return scale_;
      case Family::MixedPolyTail: return 2.0;
      default: return 0.0;
    }
  }

  double survival(double x) const {
    const double a = tail_.alpha;
    switch (family_) {
      case Family::Pareto: return x <= scale_ ? 1.0 : std::pow(scale_ / x, a);
      case Family::Burr: return x <= 0.0 ? 1.0 : 1.0 / (1.0 + std::pow(x, a));
      case Family::MixedPolyTail: return x <= 2.0 ? 1.0 : (2.0 + x) / (x * x);
      case Family::Frechet: return x <= 0.0 ? 1.0 : -std::expm1(-std::pow(x, -a));
      case Family::HalfCauchy: return x <= 0.0 ? 1.0 : 2.0 / std::numbers::pi * std::atan(1.0 / x);
    }
    return 1.0;
  }

  double density(double x) const {
    const double a = tail_.alpha;
    switch (family_) {
      case Family::Pareto: return x < scale_ ? 0.0 : a * std::pow(scale_, a) * std::pow(x, -a - 1.0);
      case Family::Burr: {
        if (x <= 0.0) return 0.0;
        const double xa = std::pow(x, a);
        return a * xa / x / ((1.0 + xa) * (1.0 + xa));
      }
      case Family::MixedPolyTail: return x < 2.0 ? 0.0 : 4.0 / (x * x * x) + 1.0 / (x * x);
      case Family::Frechet: {
        if (x <= 0.0) return 0.0;
        const double xa = std::pow(x, -a);
        return a * xa / x * std::exp(-xa);
      }
      case Family::HalfCauchy: return x < 0.0 ? 0.0 : 2.0 / (std::numbers::pi * (1.0 + x * x));
    }
    return 0.0;
  }

  // U(t) = F^{<-}(1 - 1/t), t >= 1.
  double quantile_u(double t) const {
    if (!(t >= 1.0)) throw DomainError("quantile U(t) requires t >= 1");
    const double g = tail_.gamma;
    switch (family_) {
      case Family::Pareto: return scale_ * std::pow(t, g);
      case Family::Burr: return std::pow(t - 1.0, g);
      case Family::MixedPolyTail: return 0.5 * (t + std::sqrt(t * t + 8.0 * t));
      case Family::Frechet: return std::pow(-std::log1p(-1.0 / t), -g);
      case Family::HalfCauchy: return 1.0 / std::tan(std::numbers::pi / (2.0 * t));
    }
    return 0.0;
  }

  // U(e^s), s >= 0, evaluated without forming e^s where that loses digits.
  double quantile_u_of_log(double s) const {
    if (!(s >= 0.0)) throw DomainError("quantile U(e^s) requires s >= 0");
    const double g = tail_.gamma;
    switch (family_) {
      case Family::Pareto: return scale_ * std::exp(g * s);
      case Family::Burr: return std::pow(std::expm1(s), g);
      case Family::Frechet: return std::pow(-std::log(-std::expm1(-s)), -g);
      case Family::HalfCauchy: return 1.0 / std::tan(0.5 * std::numbers::pi * std::exp(-s));
      case Family::MixedPolyTail: return quantile_u(std::exp(s));
    }
    return 0.0;
  }

  // Closed-form A(t) of the second-order condition, where one is stored.
  // Pareto has none needed: U(tx)/U(t) = x^gamma exactly, so A = 0.
  std::optional<double> analytic_second_order_a(double t) const {
    const double g = tail_.gamma;
    switch (family_) {
      case Family::Pareto: return 0.0;
      case Family::Burr: return g / t;                                     // rho = -1
      case Family::MixedPolyTail: return -2.0 / t;                         // rho = -1
      case Family::Frechet: return g / (2.0 * t);                          // rho = -1
      case Family::HalfCauchy: return std::numbers::pi * std::numbers::pi / (6.0 * t * t);  // rho = -2
    }
    return std::nullopt;
  }

  double sample(Rng& rng) const { return quantile_u(1.0 / uniform_open_closed(rng)); }

  friend bool operator==(const WeightDistribution& a, const WeightDistribution& b) {
    return a.family_ == b.family_ && a.scale_ == b.scale_ && a.tail_.alpha == b.tail_.alpha &&
           a.tail_.eta == b.tail_.eta && a.tail_.t0 == b.tail_.t0;
  }

 private:
  WeightDistribution(Family f, double scale, TailParams tail) : family_(f), scale_(scale), tail_(tail) {}

  Family family_;
  double scale_;
  TailParams tail_;
};

inline double quantile_u(const WeightDistribution& dist, double t) { return dist.quantile_u(t); }

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty())
    throw ParseError("invalid number '" + std::string(s) + "' for " + std::string(what));
  return v;
}

// Neumaier's variant of compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

inline WeightDistribution WeightDistribution::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  std::optional<double> scale, alpha, eta, t0;
  if (colon != std::string_view::npos) {
    std::string_view rest = spec.substr(colon + 1);
    if (rest.empty()) throw ParseError("empty parameter list in distribution '" + std::string(spec) + "'");
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view kv = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = kv.find('=');
      if (eq == std::string_view::npos) throw ParseError("expected key=value, got '" + std::string(kv) + "'");
      const std::string_view key = kv.substr(0, eq);
      const double v = detail::parse_double(kv.substr(eq + 1), key);
      std::optional<double>* slot = nullptr;
      if (key == "scale") slot = &scale;
      else if (key == "alpha") slot = &alpha;
      else if (key == "eta") slot = &eta;
      else if (key == "t0") slot = &t0;
      else throw ParseError("unknown distribution parameter '" + std::string(key) + "'");
      if (slot->has_value()) throw ParseError("duplicate parameter '" + std::string(key) + "'");
      *slot = v;
    }
  }

  auto require_alpha = [&]() {
    if (!alpha) throw ParseError("distribution '" + std::string(name) + "' requires alpha=");
    return *alpha;
  };
  auto forbid = [&](const std::optional<double>& p, const char* key) {
    if (p) throw ParseError("distribution '" + std::string(name) + "' takes no " + key + "= parameter");
  };

  try {
    std::optional<WeightDistribution> d;
    if (name == "pareto") {
      d = pareto(scale.value_or(1.0), require_alpha());
    } else if (name == "burr") {
      forbid(scale, "scale");
      d = burr(require_alpha());
    } else if (name == "mixedpoly") {
      forbid(scale, "scale");
      forbid(alpha, "alpha");
      d = mixed_poly_tail();
    } else if (name == "frechet") {
      forbid(scale, "scale");
      d = frechet(require_alpha());
    } else if (name == "halfcauchy") {
      forbid(scale, "scale");
      forbid(alpha, "alpha");
      d = half_cauchy();
    } else {
      throw ParseError("unknown distribution family '" + std::string(name) + "'");
    }
    if (eta || t0) *d = d->with_lower_bound(eta.value_or(d->tail().eta), t0.value_or(d->tail().t0));
    return *d;
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid distribution '") + std::string(spec) + "': " + e.what());
  }
}

inline std::string WeightDistribution::spec() const {
  using detail::format_double;
  std::string s = to_string(family_);
  std::vector<std::string> kv;
  if (family_ == Family::Pareto) kv.push_back("scale=" + format_double(scale_));
  if (family_ == Family::Pareto || family_ == Family::Burr || family_ == Family::Frechet)
    kv.push_back("alpha=" + format_double(tail_.alpha));
  const WeightDistribution base = [&] {
    switch (family_) {
      case Family::Pareto: return pareto(scale_, tail_.alpha);
      case Family::Burr: return burr(tail_.alpha);
      case Family::MixedPolyTail: return mixed_poly_tail();
      case Family::Frechet: return frechet(tail_.alpha);
      case Family::HalfCauchy: break;
    }
    return half_cauchy();
  }();
  if (base.tail_.eta != tail_.eta || base.tail_.t0 != tail_.t0) {
    kv.push_back("eta=" + format_double(tail_.eta));
    kv.push_back("t0=" + format_double(tail_.t0));
  }
  for (std::size_t i = 0; i < kv.size(); ++i) s += (i == 0 ? ":" : ",") + kv[i];
  return s;
}

// Descending order statistics W(1) >= ... >= W(n) with their total L(n).
class WeightVector {
 public:
  WeightVector() = default;

  // Sorts descending and validates; entries must be strictly positive.
  static WeightVector from_values(std::vector<double> values) {
    if (values.empty()) throw DomainError("weight vector must be non-empty");
    for (double v : values)
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("weights must be finite and strictly positive");
    std::sort(values.begin(), values.end(), std::greater<>());
    return WeightVector(std::move(values));
  }

  // Caller guarantees descending, positive entries.
  static WeightVector from_sorted(std::vector<double> sorted) { return WeightVector(std::move(sorted)); }

  const std::vector<double>& sorted() const noexcept { return sorted_; }
  double total() const noexcept { return total_; }
  std::size_t size() const noexcept { return sorted_.size(); }
  // 0-based access to W(i+1).
  double operator[](std::size_t i) const { return sorted_[i]; }

  double sum_of_squares() const {
    detail::CompensatedSum s;
    for (double w : sorted_) s.add(w * w);
    return s.value();
  }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  explicit WeightVector(std::vector<double> sorted) : sorted_(std::move(sorted)) {
    detail::CompensatedSum s;
    for (double w : sorted_) s.add(w);
    total_ = s.value();
  }

  std::vector<double> sorted_;
  double total_ = 0.0;
};

// n iid inverse-CDF draws, sorted descending.
inline WeightVector sample_weights(const WeightDistribution& dist, std::size_t n, Rng& rng) {
  if (n == 0) throw DomainError("sample_weights requires n >= 1");
  std::vector<double> w(n);
  for (auto& x : w) x = dist.sample(rng);
  std::sort(w.begin(), w.end(), std::greater<>());
  return WeightVector::from_sorted(std::move(w));
}

// Order statistics drawn directly via exponential spacings:
// W(i) = U(exp(sum_{j=i}^n E_j / j)). One backward pass, no sort.
inline WeightVector sample_order_statistics_renyi(const WeightDistribution& dist, std::size_t n, Rng& rng) {
  if (n == 0) throw DomainError("sample_order_statistics_renyi requires n >= 1");
  std::vector<double> w(n);
  double s = 0.0;
  for (std::size_t i = n; i >= 1; --i) {
    s += unit_exponential(rng) / static_cast<double>(i);
    w[i - 1] = dist.quantile_u_of_log(s);
  }
  return WeightVector::from_sorted(std::move(w));
}

struct QuadratureSettings {
  double abs_tol = 1e-10;
  double upper_t = 1e8;  // integrate up to U(upper_t), then bound the rest
  unsigned max_depth = 15;
};

// P(D = k) for the mixed-Poisson limit law: integral of e^{-w} w^k / k! dF(w).
inline double mixed_poisson_pmf(const WeightDistribution& dist, std::uint64_t k,
                                const QuadratureSettings& quad = {}) {
  const double kd = static_cast<double>(k);
  const double log_kfact = std::lgamma(kd + 1.0);
  auto poisson_pmf = [&](double w) {
    if (w <= 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(-w + kd * std::log(w) - log_kfact);
  };
  auto integrand = [&](double w) { return poisson_pmf(w) * dist.density(w); };

  // Beyond b > k the Poisson pmf decreases in w, so the remainder is at most
  // pmf(k; b) * (1 - F(b)). Push b out until that bound is negligible.
  double t_hi = quad.upper_t;
  double b = dist.quantile_u(t_hi);
  auto remainder_bound = [&] { return (b > kd ? poisson_pmf(b) : 1.0) / t_hi; };
  while (remainder_bound() > 0.1 * quad.abs_tol && t_hi < 1e300) {
    t_hi *= 100.0;
    b = dist.quantile_u(t_hi);
  }
  const double tail = remainder_bound();

  const double a = dist.support_min();
  std::vector<double> cuts{a, b};
  for (double x = std::max(a, 1.0); x < b; x *= 2.0) cuts.push_back(x);
  const double sd = std::sqrt(kd + 1.0);
  for (double m : {0.0, 1.0, 3.0, 6.0, 10.0, 20.0, 40.0}) {
    cuts.push_back(kd - m * sd);
    cuts.push_back(kd + m * sd);
  }
  std::erase_if(cuts, [&](double x) { return !(x >= a && x <= b); });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1],
                                                                         quad.max_depth, 1e-13, &err);
    error += err;
  }
  if (!std::isfinite(value) || error + tail > quad.abs_tol) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "mixed-Poisson quadrature did not converge for %s at k=%llu: value=%.6g, "
                  "error estimate=%.3g, tail bound=%.3g, tolerance %.3g, %zu panels",
                  dist.spec().c_str(), static_cast<unsigned long long>(k), value, error, tail, quad.abs_tol,
                  cuts.size() - 1);
    throw NumericError(buf);
  }
  return std::clamp(value, 0.0, 1.0);
}

struct UlowerViolation {
  double t;
  double x;
  double ratio;  // U(tx) / U(t)
  double bound;  // (1 - eta) x^gamma + eta
};

// Evaluates U(tx)/U(t) >= (1-eta) x^gamma + eta on the given (t, x) pairs.
// A relative slack of 1e-12 absorbs rounding at x = 1 where both sides are 1.
inline std::vector<UlowerViolation> check_u_lower_condition(const WeightDistribution& dist, double eta, double t0,
                                                            const std::vector<std::pair<double, double>>& grid) {
  if (!(eta >= 0.0 && eta < 1.0)) throw DomainError("eta must lie in [0, 1)");
  std::vector<UlowerViolation> out;
  const double g = dist.gamma();
  for (auto [t, x] : grid) {
    if (!(t >= t0) || !(x >= 1.0)) throw DomainError("grid points need t >= t0 and x >= 1");
    const double ratio = dist.quantile_u(t * x) / dist.quantile_u(t);
    const double bound = (1.0 - eta) * std::pow(x, g) + eta;
    if (ratio < bound * (1.0 - 1e-12)) out.push_back({t, x, ratio, bound});
  }
  return out;
}

// Log-spaced t in [t0, t0 * 10^decades] crossed with x in [1, 10^3].
inline std::vector<std::pair<double, double>> u_lower_grid(double t0, int decades = 8, int per_decade = 4) {
  std::vector<std::pair<double, double>> grid;
  for (int i = 0; i <= decades * per_decade; ++i) {
    const double t = t0 * std::pow(10.0, static_cast<double>(i) / per_decade);
    for (int j = 0; j <= 3 * per_decade; ++j) grid.emplace_back(t, std::pow(10.0, static_cast<double>(j) / per_decade));
  }
  return grid;
}

enum class SecondOrderMethod { Auto, Analytic, Numeric };

// A(t) from the second-order condition. The numeric route inverts the
// defining quotient at x = 2 and needs rho.
inline double second_order_a(const WeightDistribution& dist, double t,
                             SecondOrderMethod method = SecondOrderMethod::Auto) {
  if (!(t > 1.0)) throw DomainError("second_order_a requires t > 1");
  if (method != SecondOrderMethod::Numeric) {
    if (auto a = dist.analytic_second_order_a(t)) return *a;
    if (method == SecondOrderMethod::Analytic)
      throw UnsupportedError("no analytic A(t) stored for " + dist.spec());
  }
  const auto rho = dist.tail().rho;
  if (!rho) throw UnsupportedError("numeric A(t) needs a known rho; " + dist.spec() + " has none");
  const double g = dist.gamma();
  const double x = 2.0;
  const double xg = std::pow(x, g);
  const double limit = *rho == 0.0 ? xg * std::log(x) : xg * (std::pow(x, *rho) - 1.0) / *rho;
  return (dist.quantile_u(t * x) / dist.quantile_u(t) - xg) / limit;
}

}  // namespace sfirg
