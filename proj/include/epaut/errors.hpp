#pragma once

#include <stdexcept>
#include <string>

namespace epaut {

/// Malformed input: wrong shapes, out-of-range parameters, bad files.
class ValidationError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix that should lie in the represented group/algebra does not.
class RepresentationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or a violated stability guard during time stepping.
class IntegrationError : public std::runtime_error
{
public:
  IntegrationError(const std::string& what, double time)
    : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), time_(time)
  {}

  double time() const noexcept { return time_; }

private:
  double time_;
};

/// Lagrangian markers lost monotonicity (the discrete flow map stopped being a diffeomorphism).
class FlowMapDegeneracy : public IntegrationError
{
public:
  using IntegrationError::IntegrationError;
};

}  // namespace epaut
