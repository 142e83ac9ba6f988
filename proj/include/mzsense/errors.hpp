#pragma once

#include <stdexcept>
#include <string>

namespace mzsense {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidPhotonNumber : public Error {
public:
    using Error::Error;
};

class InvalidState : public Error {
public:
    using Error::Error;
};

class InvalidWidth : public Error {
public:
    using Error::Error;
};

class InvalidPrior : public Error {
public:
    using Error::Error;
};

/// Outcome (n_c, n_d) does not add up to the photon number of the state.
class OutcomeMismatch : public Error {
public:
    using Error::Error;
};

/// Outcome has zero evidence under the prior, so the posterior is undefined.
class ImpossibleOutcome : public Error {
public:
    using Error::Error;
};

class InsufficientResolution : public Error {
public:
    using Error::Error;
};

/// Non-positive or otherwise out-of-domain input to a fit.
class DomainError : public Error {
public:
    using Error::Error;
};

class FitFailure : public Error {
public:
    using Error::Error;
};

class IntegrandError : public Error {
public:
    using Error::Error;
};

/// Quadrature did not reach its tolerance; carries the best estimate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_value, double error_estimate)
        : Error(what), best_value_(best_value), error_estimate_(error_estimate) {}

    double best_value() const noexcept { return best_value_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double best_value_;
    double error_estimate_;
};

class UndefinedApproximation : public Error {
public:
    using Error::Error;
};

}  // namespace mzsense
