#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mixlogit {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input table/schema problems: missing columns, malformed coding tables.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A value that cannot be interpreted (bad severity label, unknown level).
class ValueError : public Error {
 public:
  using Error::Error;
};

// Every row was filtered out.
class DatasetEmptyError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid model specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

// A name that does not resolve (variable, term, parameter).
class NameError : public Error {
 public:
  using Error::Error;
};

// Bad argument to a numeric routine.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A fixed capacity was exceeded (e.g. the prime table for draw bases).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// The objective is not finite at the starting point.
class InitializationError : public Error {
 public:
  using Error::Error;
};

// Line search failed; carries the best point reached so far.
class OptimizerStallError : public Error {
 public:
  OptimizerStallError(const std::string& msg, std::vector<double> best_point,
                      double best_loglik, int iterations)
      : Error(msg),
        best_point(std::move(best_point)),
        best_loglik(best_loglik),
        iterations(iterations) {}
  std::vector<double> best_point;
  double best_loglik = 0.0;
  int iterations = 0;
};

// Neither covariance estimator is invertible at the optimum.
class InferenceError : public Error {
 public:
  InferenceError(const std::string& msg, std::vector<std::string> parameters)
      : Error(msg), parameters(std::move(parameters)) {}
  std::vector<std::string> parameters;
};

}  // namespace mixlogit
