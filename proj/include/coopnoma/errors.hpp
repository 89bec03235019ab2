#pragma once

#include <stdexcept>
#include <string>

namespace coopnoma {

/// Invalid input: bad configuration field, out-of-domain argument,
/// dimension mismatch. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver a trustworthy value
/// (series/continued fraction or quadrature did not converge, training
/// diverged). Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace coopnoma
