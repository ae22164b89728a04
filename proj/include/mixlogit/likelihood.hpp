#pragma once

#include <utility>
#include <vector>

#include "mixlogit/dataset.hpp"
#include "mixlogit/draws.hpp"
#include "mixlogit/model_spec.hpp"

namespace mixlogit {

std::vector<double> mnl_probability(const std::vector<double>& utilities);

// Bound evaluation plan for one spec against one dataset. Immutable; all
// evaluation methods are pure and safe to call concurrently.
class Evaluator {
 public:
  Evaluator(const ModelSpec& spec, const ChoiceDataset& data);

  const ParamLayout& layout() const { return layout_; }
  const ModelSpec& spec() const { return spec_; }
  const ChoiceDataset& data() const { return data_; }
  int n_params() const { return layout_.size(); }
  int n_random_terms() const { return n_random_; }

  void set_threads(int n) { n_threads_ = n < 1 ? 1 : n; }
  int threads() const { return n_threads_; }

  double log_likelihood(const std::vector<double>& params, const DrawTensor& draws) const;
  std::vector<double> gradient(const std::vector<double>& params,
                               const DrawTensor& draws) const;
  // Row-major n_obs x n_params matrix of per-observation score vectors.
  std::vector<double> score_matrix(const std::vector<double>& params,
                                   const DrawTensor& draws) const;
  double simulated_probability(const std::vector<double>& params, int obs,
                               const DrawTensor& draws) const;
  // Row-major n_obs x n_alternatives matrix of simulated choice probabilities.
  std::vector<double> probability_matrix(const std::vector<double>& params,
                                         const DrawTensor& draws) const;
  // Coefficient realized for every model term, in term order.
  std::vector<double> realized_coefficients(const std::vector<double>& params, int obs,
                                            const double* draw_row) const;

  DrawTensor make_model_draws() const;

 private:
  struct TermPlan {
    int column = -1;  // -1 encodes the constant
    int alternative = 0;
    int param = 0;  // beta for fixed terms, mean for random ones
    int draw_dim = -1;
    std::vector<std::pair<int, int>> shifters;  // (delta param, dataset column)
    std::vector<std::pair<int, int>> gamma;     // (chol/sd param, draw dimension)
  };

  struct Workspace {
    std::vector<double> coef, util, lp, probs;
  };

  double observation_loglik(const double* params, int obs, const DrawTensor& draws,
                            Workspace& ws, double* grad_row, double* prob_row) const;
  void check_shapes(const std::vector<double>& params, const DrawTensor& draws) const;

  ModelSpec spec_;
  const ChoiceDataset& data_;
  ParamLayout layout_;
  std::vector<TermPlan> plans_;
  int n_random_ = 0;
  int n_threads_ = 1;
};

}  // namespace mixlogit
