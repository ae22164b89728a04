#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixlogit/fit.hpp"

namespace mixlogit {

struct TruthConfig {
  ModelSpec spec;
  std::vector<double> true_params;
  int n_obs = 0;
  std::map<std::string, double> covariate_probability;  // per-variable Bernoulli p
  double default_probability = 0.5;
  std::uint64_t seed = 0;
};

struct RecoveryRow {
  std::string name;
  double truth = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  bool covered = false;  // |z| < 1.96
};

TruthConfig parse_truth_config(const nlohmann::json& config);
TruthConfig parse_truth_config_file(const std::string& path);

ChoiceDataset generate_dataset(const TruthConfig& cfg);

std::vector<RecoveryRow> recovery_report(const std::vector<double>& truth,
                                         const FitResult& fit);

// Flips Cholesky-block column signs so every diagonal is nonnegative; the
// implied covariance is unchanged. Use before comparing factors directly.
std::vector<double> canonical_cholesky(const std::vector<double>& params,
                                       const ModelSpec& spec);

}  // namespace mixlogit
