#pragma once

#include <stdexcept>
#include <string>

namespace obskit {

// Base class for every error raised by the library. Each subclass maps onto
// one CLI exit-code family (see ErrorFamily).
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class ErrorFamily { config, numeric, infeasible };

class ConfigError : public Error {
  public:
    using Error::Error;
};

class DimensionError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class GeometryError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class InputError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class WindowError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class NumericError : public Error {
  public:
    using Error::Error;
};

class IntegrationDiverged : public NumericError {
  public:
    IntegrationDiverged(double t, const std::string& what)
        : NumericError(what), time_(t) {}
    double time() const { return time_; }

  private:
    double time_;
};

class EvaluationError : public NumericError {
  public:
    using NumericError::NumericError;
};

class UnobservableError : public NumericError {
  public:
    using NumericError::NumericError;
};

class InfeasibleStart : public Error {
  public:
    using Error::Error;
};

inline ErrorFamily family_of(const Error& e) {
    if (dynamic_cast<const InfeasibleStart*>(&e)) return ErrorFamily::infeasible;
    if (dynamic_cast<const NumericError*>(&e)) return ErrorFamily::numeric;
    return ErrorFamily::config;
}

}  // namespace obskit
