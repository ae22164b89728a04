#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mixlogit/fit.hpp"

namespace mixlogit {

struct RandomParamSummary {
  std::string term;
  double mean = 0.0;  // base mean, shifters at zero
  double sd = 0.0;
  double share_above_zero = 0.0;
  double share_below_zero = 0.0;
};

struct CorrelationResult {
  int m = 0;
  std::vector<double> covariance;   // m x m, row major
  std::vector<double> sd;           // length m
  std::vector<double> correlation;  // m x m, row major
};

struct EffectsReport {
  std::vector<std::string> variables;
  std::vector<double> effects;  // variables x alternatives, row major
  int n_alternatives = 0;
  std::vector<RandomParamSummary> random_params;
  std::vector<std::string> block_terms;
  CorrelationResult block;

  double effect(int variable, int alternative) const {
    return effects[static_cast<std::size_t>(variable) * n_alternatives + alternative];
  }
};

// (share_above_zero, share_below_zero) of a normal(mean, sd) mass.
std::pair<double, double> distribution_shares(double mean, double sd);

// Euclidean norm of one row of the lower-triangular factor.
double random_param_sd(const std::vector<double>& cholesky_row);

// Full m x m lower-triangular factor, row major.
CorrelationResult correlation_matrix(const std::vector<double>& lower, int m);

std::vector<double> marginal_effect(const FitResult& fit, const ChoiceDataset& data,
                                    const std::string& variable, int n_threads = 1);

EffectsReport effects_report(const FitResult& fit, const ChoiceDataset& data,
                             int n_threads = 1);

// Lower-triangular factor of the fitted correlated block, m x m row major.
std::vector<double> cholesky_block(const FitResult& fit);

}  // namespace mixlogit
