#pragma once

#include <stdexcept>
#include <string>

namespace sfirg {

// Precondition violated by the caller (bad k, t < 1, n = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Degeneracy {
  ZeroDenominator,  // Pickands: X(2k) == X(4k)
  ZeroNumerator,    // Pickands: X(k) == X(2k), estimate would be -inf
  TiedMoments,      // PWM: I1 == 2 I2
};

inline const char* to_string(Degeneracy d) {
  switch (d) {
    case Degeneracy::ZeroDenominator: return "zero-denominator";
    case Degeneracy::ZeroNumerator: return "zero-numerator";
    case Degeneracy::TiedMoments: return "tied-moments";
  }
  return "unknown";
}

// The sample is valid input but the statistic is undefined on it, usually
// because of ties among integer degrees. Experiments count these.
class DegenerateSample : public std::runtime_error {
 public:
  DegenerateSample(Degeneracy reason, const std::string& what)
      : std::runtime_error(what), reason_(reason) {}
  Degeneracy reason() const noexcept { return reason_; }

 private:
  Degeneracy reason_;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed user input: distribution specs, config files, CSV.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sfirg
