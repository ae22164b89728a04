#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixlogit/likelihood.hpp"

namespace mixlogit {

enum class ConvergedBy { Gradient, FunctionChange, None };
enum class SeEstimator { Hessian, Bhhh };

struct FitResult {
  ModelSpec spec;
  ParamLayout layout;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  double ll_zero = 0.0;
  double ll_convergence = 0.0;
  int n_obs = 0;
  int n_params = 0;
  bool converged = false;
  ConvergedBy criterion = ConvergedBy::None;
  int iterations = 0;
  bool non_identified = false;
  std::vector<std::string> at_bound;  // parameters pinned to the box guard
  SeEstimator se_estimator = SeEstimator::Hessian;
  int n_draws = 0;
  std::uint64_t seed = 0;
  std::vector<int> primes;
  int n_threads = 1;
};

double null_log_likelihood(const ChoiceDataset& data);

// Warm start for a spec with random terms: fixed betas and random means from
// a plain conditional-logit pre-fit, sds at 0.5, shifters and off-diagonal
// Cholesky entries at 0. An explicit optimizer start vector overrides this.
std::vector<double> starting_point(const ModelSpec& spec, const ChoiceDataset& data,
                                   int n_threads = 1);

FitResult maximize(const ModelSpec& spec, const ChoiceDataset& data, int n_threads = 1);
FitResult maximize(const ModelSpec& spec, const ChoiceDataset& data,
                   const OptimizerSettings& options, int n_threads = 1);

std::vector<double> standard_errors(const Evaluator& eval, const std::vector<double>& estimates,
                                    const DrawTensor& draws, SeEstimator& used);

}  // namespace mixlogit
