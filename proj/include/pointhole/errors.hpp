#pragma once

#include <stdexcept>
#include <string>

namespace pointhole {

/// Input outside an operation's domain (bad argument, invalid geometry, ...).
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical stage failed (factorization breakdown, no convergence, ...).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The requested spectral parameter coincides with an eigenvalue.
class SpectralHit : public NumericalError {
public:
  SpectralHit(const std::string& what, double lambda)
      : NumericalError(what), lambda_(lambda) {}

  double lambda() const noexcept { return lambda_; }

private:
  double lambda_;
};

}  // namespace pointhole
