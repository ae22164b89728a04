#include "mixlogit/post.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mixlogit/draws.hpp"
#include "mixlogit/errors.hpp"

namespace mixlogit {

std::pair<double, double> distribution_shares(double mean, double sd) {
  if (sd <= 0.0) throw ArgumentError("distribution_shares needs sd > 0");
  const double below = normal_cdf(-mean / sd);
  return {1.0 - below, below};
}

double random_param_sd(const std::vector<double>& cholesky_row) {
  double ss = 0.0;
  for (double v : cholesky_row) ss += v * v;
  return std::sqrt(ss);
}

CorrelationResult correlation_matrix(const std::vector<double>& lower, int m) {
  if (static_cast<int>(lower.size()) != m * m)
    throw ArgumentError("correlation_matrix needs a full m x m factor");
  CorrelationResult out;
  out.m = m;
  out.covariance.assign(static_cast<std::size_t>(m) * m, 0.0);
  out.correlation.assign(static_cast<std::size_t>(m) * m, 0.0);
  out.sd.resize(static_cast<std::size_t>(m));
  auto L = [&](int r, int c) { return lower[static_cast<std::size_t>(r) * m + c]; };
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      double v = 0.0;
      for (int j = 0; j <= std::min(r, c); ++j) v += L(r, j) * L(c, j);
      out.covariance[static_cast<std::size_t>(r) * m + c] = v;
    }
  for (int r = 0; r < m; ++r)
    out.sd[static_cast<std::size_t>(r)] =
        std::sqrt(out.covariance[static_cast<std::size_t>(r) * m + r]);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      const double s = out.sd[static_cast<std::size_t>(r)] * out.sd[static_cast<std::size_t>(c)];
      out.correlation[static_cast<std::size_t>(r) * m + c] =
          s > 0.0 ? out.covariance[static_cast<std::size_t>(r) * m + c] / s
                  : (r == c ? 1.0 : 0.0);
    }
  return out;
}

std::vector<double> cholesky_block(const FitResult& fit) {
  const int m = static_cast<int>(fit.spec.correlated_block.size());
  std::vector<double> lower(static_cast<std::size_t>(m) * m, 0.0);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c <= r; ++c) {
      const int idx = fit.layout.index_of("chol:" + fit.spec.correlated_block[static_cast<std::size_t>(r)] +
                                          ":" + fit.spec.correlated_block[static_cast<std::size_t>(c)]);
      lower[static_cast<std::size_t>(r) * m + c] = fit.estimates[static_cast<std::size_t>(idx)];
    }
  return lower;
}

namespace {

bool spec_uses_variable(const ModelSpec& spec, const std::string& variable) {
  for (const auto& t : spec.terms)
    if (t.variable == variable) return true;
  for (const auto& s : spec.mean_shifters)
    if (s.variable == variable) return true;
  return false;
}

ChoiceDataset with_column_forced(const ChoiceDataset& data, int column, double value) {
  ChoiceDataset out = data;
  for (int n = 0; n < out.n_obs(); ++n)
    out.x[static_cast<std::size_t>(n) * out.n_vars() + column] = value;
  return out;
}

std::vector<double> mean_probabilities(const ModelSpec& spec, const ChoiceDataset& data,
                                       const std::vector<double>& params,
                                       const DrawTensor& draws, int n_threads) {
  Evaluator eval(spec, data);
  eval.set_threads(n_threads);
  const std::vector<double> probs = eval.probability_matrix(params, draws);
  const int n_alts = data.n_alternatives;
  std::vector<double> mean(static_cast<std::size_t>(n_alts), 0.0);
  for (int n = 0; n < data.n_obs(); ++n)
    for (int a = 0; a < n_alts; ++a)
      mean[static_cast<std::size_t>(a)] += probs[static_cast<std::size_t>(n) * n_alts + a];
  for (double& v : mean) v /= data.n_obs();
  return mean;
}

}  // namespace

std::vector<double> marginal_effect(const FitResult& fit, const ChoiceDataset& data,
                                    const std::string& variable, int n_threads) {
  if (!spec_uses_variable(fit.spec, variable))
    throw NameError("variable '" + variable + "' does not appear in the fitted model");
  const int column = data.variable_index(variable);
  if (column < 0)
    throw NameError("variable '" + variable + "' is absent from the dataset");

  const int n_random = static_cast<int>(fit.spec.random_term_names().size());
  const DrawTensor draws = make_draws(data.n_obs(), n_random, fit.spec.draws);

  const ChoiceDataset on = with_column_forced(data, column, 1.0);
  const ChoiceDataset off = with_column_forced(data, column, 0.0);
  const std::vector<double> p_on =
      mean_probabilities(fit.spec, on, fit.estimates, draws, n_threads);
  const std::vector<double> p_off =
      mean_probabilities(fit.spec, off, fit.estimates, draws, n_threads);

  std::vector<double> effect(p_on.size());
  for (std::size_t a = 0; a < p_on.size(); ++a) effect[a] = p_on[a] - p_off[a];
  return effect;
}

EffectsReport effects_report(const FitResult& fit, const ChoiceDataset& data, int n_threads) {
  EffectsReport report;
  report.n_alternatives = data.n_alternatives;

  std::set<std::string> seen;
  auto add_variable = [&](const std::string& v) {
    if (v != kConstant && seen.insert(v).second) report.variables.push_back(v);
  };
  for (const auto& t : fit.spec.terms) add_variable(t.variable);
  for (const auto& s : fit.spec.mean_shifters) add_variable(s.variable);

  for (const auto& v : report.variables) {
    const std::vector<double> e = marginal_effect(fit, data, v, n_threads);
    report.effects.insert(report.effects.end(), e.begin(), e.end());
  }

  const std::vector<std::string> random_names = fit.spec.random_term_names();
  for (const auto& name : random_names) {
    RandomParamSummary s;
    s.term = name;
    s.mean = fit.estimates[static_cast<std::size_t>(fit.layout.index_of(name))];
    if (fit.spec.is_correlated(name)) {
      const auto& block = fit.spec.correlated_block;
      const int row = static_cast<int>(
          std::find(block.begin(), block.end(), name) - block.begin());
      std::vector<double> chol_row;
      for (int c = 0; c <= row; ++c)
        chol_row.push_back(fit.estimates[static_cast<std::size_t>(fit.layout.index_of(
            "chol:" + block[static_cast<std::size_t>(row)] + ":" +
            block[static_cast<std::size_t>(c)]))]);
      s.sd = random_param_sd(chol_row);
    } else {
      s.sd = std::fabs(
          fit.estimates[static_cast<std::size_t>(fit.layout.index_of("sd:" + name))]);
    }
    if (s.sd > 0.0) {
      std::tie(s.share_above_zero, s.share_below_zero) = distribution_shares(s.mean, s.sd);
    } else if (s.mean > 0.0) {
      s.share_above_zero = 1.0;
      s.share_below_zero = 0.0;
    } else if (s.mean < 0.0) {
      s.share_above_zero = 0.0;
      s.share_below_zero = 1.0;
    } else {
      s.share_above_zero = 0.5;
      s.share_below_zero = 0.5;
    }
    report.random_params.push_back(std::move(s));
  }

  report.block_terms = fit.spec.correlated_block;
  const int m = static_cast<int>(report.block_terms.size());
  if (m > 0) report.block = correlation_matrix(cholesky_block(fit), m);
  return report;
}

}  // namespace mixlogit
