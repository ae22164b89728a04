#include "mixlogit/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mixlogit/errors.hpp"
#include "parallel.hpp"

namespace mixlogit {

std::vector<double> mnl_probability(const std::vector<double>& utilities) {
  const double top = *std::max_element(utilities.begin(), utilities.end());
  std::vector<double> probs(utilities.size());
  double den = 0.0;
  for (std::size_t a = 0; a < utilities.size(); ++a) {
    probs[a] = std::exp(utilities[a] - top);
    den += probs[a];
  }
  for (double& p : probs) p /= den;
  return probs;
}

Evaluator::Evaluator(const ModelSpec& spec, const ChoiceDataset& data)
    : spec_(spec), data_(data), layout_(parameter_layout(spec)) {
  std::unordered_map<std::string, int> draw_dim;
  for (const auto& t : spec_.terms)
    if (t.kind == TermKind::Random) draw_dim[t.name] = n_random_++;

  std::unordered_map<std::string, int> block_row;
  for (std::size_t i = 0; i < spec_.correlated_block.size(); ++i)
    block_row[spec_.correlated_block[i]] = static_cast<int>(i);

  auto column_of = [&](const std::string& var, const std::string& where) {
    if (var == kConstant) return -1;
    const int col = data.variable_index(var);
    if (col < 0)
      throw NameError(where + " references variable '" + var + "' absent from the dataset");
    return col;
  };

  for (const auto& t : spec_.terms) {
    TermPlan plan;
    plan.column = column_of(t.variable, "term " + t.name);
    plan.alternative = t.alternative;
    plan.param = layout_.index_of(t.name);
    if (t.kind == TermKind::Random) {
      plan.draw_dim = draw_dim.at(t.name);
      for (const auto& s : spec_.mean_shifters)
        if (s.term == t.name)
          plan.shifters.emplace_back(layout_.index_of(s.term + ":" + s.variable),
                                     column_of(s.variable, "mean shifter " + s.term));
      auto row_it = block_row.find(t.name);
      if (row_it == block_row.end()) {
        plan.gamma.emplace_back(layout_.index_of("sd:" + t.name), plan.draw_dim);
      } else {
        const int row = row_it->second;
        for (int c = 0; c <= row; ++c)
          plan.gamma.emplace_back(
              layout_.index_of("chol:" + spec_.correlated_block[static_cast<std::size_t>(row)] +
                               ":" + spec_.correlated_block[static_cast<std::size_t>(c)]),
              draw_dim.at(spec_.correlated_block[static_cast<std::size_t>(c)]));
      }
    }
    plans_.push_back(std::move(plan));
  }
}

void Evaluator::check_shapes(const std::vector<double>& params, const DrawTensor& draws) const {
  if (static_cast<int>(params.size()) != layout_.size())
    throw ValueError("parameter vector has length " + std::to_string(params.size()) +
                     " but the layout needs " + std::to_string(layout_.size()));
  if (n_random_ > 0) {
    if (draws.n_terms != n_random_)
      throw ValueError("draw tensor carries " + std::to_string(draws.n_terms) +
                       " random terms, spec has " + std::to_string(n_random_));
    if (draws.n_obs != data_.n_obs())
      throw ValueError("draw tensor built for " + std::to_string(draws.n_obs) +
                       " observations, dataset has " + std::to_string(data_.n_obs()));
  }
}

double Evaluator::observation_loglik(const double* params, int obs, const DrawTensor& draws,
                                     Workspace& ws, double* grad_row, double* prob_row) const {
  const int n_alts = data_.n_alternatives;
  const int n_reps = n_random_ > 0 ? draws.n_draws : 1;
  const int chosen = data_.chosen[static_cast<std::size_t>(obs)];
  const std::size_t n_terms = plans_.size();
  const bool want_probs = grad_row != nullptr || prob_row != nullptr;

  ws.coef.resize(n_terms);
  ws.util.resize(static_cast<std::size_t>(n_alts));
  ws.lp.resize(static_cast<std::size_t>(n_reps));
  if (want_probs) ws.probs.resize(static_cast<std::size_t>(n_reps) * n_alts);

  for (int r = 0; r < n_reps; ++r) {
    const double* v = n_random_ > 0 ? draws.row(obs, r) : nullptr;
    for (std::size_t t = 0; t < n_terms; ++t) {
      const TermPlan& plan = plans_[t];
      double c = params[plan.param];
      for (const auto& [dp, col] : plan.shifters) c += params[dp] * data_.value(obs, col);
      for (const auto& [gp, dd] : plan.gamma) c += params[gp] * v[dd];
      ws.coef[t] = c;
    }
    std::fill(ws.util.begin(), ws.util.end(), 0.0);
    for (std::size_t t = 0; t < n_terms; ++t) {
      const TermPlan& plan = plans_[t];
      const double x = plan.column < 0 ? 1.0 : data_.value(obs, plan.column);
      if (x != 0.0) ws.util[static_cast<std::size_t>(plan.alternative)] += ws.coef[t] * x;
    }
    const double top = *std::max_element(ws.util.begin(), ws.util.end());
    double den = 0.0;
    for (int a = 0; a < n_alts; ++a) den += std::exp(ws.util[static_cast<std::size_t>(a)] - top);
    const double log_den = top + std::log(den);
    if (want_probs)
      for (int a = 0; a < n_alts; ++a)
        ws.probs[static_cast<std::size_t>(r) * n_alts + a] =
            std::exp(ws.util[static_cast<std::size_t>(a)] - log_den);
    ws.lp[static_cast<std::size_t>(r)] = ws.util[static_cast<std::size_t>(chosen)] - log_den;
  }

  const double top_lp = *std::max_element(ws.lp.begin(), ws.lp.end());
  double denom = 0.0;
  for (int r = 0; r < n_reps; ++r) denom += std::exp(ws.lp[static_cast<std::size_t>(r)] - top_lp);
  const double ll = top_lp + (std::log(denom) - std::log(static_cast<double>(n_reps)));

  if (grad_row) {
    for (int r = 0; r < n_reps; ++r) {
      const double w = std::exp(ws.lp[static_cast<std::size_t>(r)] - top_lp) / denom;
      const double* kernel = ws.probs.data() + static_cast<std::size_t>(r) * n_alts;
      const double* v = n_random_ > 0 ? draws.row(obs, r) : nullptr;
      for (const TermPlan& plan : plans_) {
        const double x = plan.column < 0 ? 1.0 : data_.value(obs, plan.column);
        if (x == 0.0) continue;
        const double diff =
            (plan.alternative == chosen ? 1.0 : 0.0) - kernel[plan.alternative];
        const double base = w * diff * x;
        grad_row[plan.param] += base;
        for (const auto& [dp, col] : plan.shifters)
          grad_row[dp] += base * data_.value(obs, col);
        for (const auto& [gp, dd] : plan.gamma) grad_row[gp] += base * v[dd];
      }
    }
  }
  if (prob_row) {
    for (int a = 0; a < n_alts; ++a) {
      double s = 0.0;
      for (int r = 0; r < n_reps; ++r) s += ws.probs[static_cast<std::size_t>(r) * n_alts + a];
      prob_row[a] = s / n_reps;
    }
  }
  return ll;
}

double Evaluator::log_likelihood(const std::vector<double>& params,
                                 const DrawTensor& draws) const {
  check_shapes(params, draws);
  const int n = data_.n_obs();
  std::vector<double> partial(static_cast<std::size_t>(chunk_count(n)), 0.0);
  for_each_chunk(n, n_threads_, [&](int c, int begin, int end) {
    Workspace ws;
    double s = 0.0;
    for (int i = begin; i < end; ++i)
      s += observation_loglik(params.data(), i, draws, ws, nullptr, nullptr);
    partial[static_cast<std::size_t>(c)] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

std::vector<double> Evaluator::gradient(const std::vector<double>& params,
                                        const DrawTensor& draws) const {
  check_shapes(params, draws);
  const int n = data_.n_obs();
  const int k = n_params();
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(chunk_count(n)));
  for_each_chunk(n, n_threads_, [&](int c, int begin, int end) {
    auto& acc = partial[static_cast<std::size_t>(c)];
    acc.assign(static_cast<std::size_t>(k), 0.0);
    Workspace ws;
    for (int i = begin; i < end; ++i)
      observation_loglik(params.data(), i, draws, ws, acc.data(), nullptr);
  });
  std::vector<double> grad(static_cast<std::size_t>(k), 0.0);
  for (const auto& acc : partial)
    for (int j = 0; j < k; ++j) grad[static_cast<std::size_t>(j)] += acc[static_cast<std::size_t>(j)];
  return grad;
}

std::vector<double> Evaluator::score_matrix(const std::vector<double>& params,
                                            const DrawTensor& draws) const {
  check_shapes(params, draws);
  const int n = data_.n_obs();
  const int k = n_params();
  std::vector<double> scores(static_cast<std::size_t>(n) * k, 0.0);
  for_each_chunk(n, n_threads_, [&](int, int begin, int end) {
    Workspace ws;
    for (int i = begin; i < end; ++i)
      observation_loglik(params.data(), i, draws, ws,
                         scores.data() + static_cast<std::size_t>(i) * k, nullptr);
  });
  return scores;
}

double Evaluator::simulated_probability(const std::vector<double>& params, int obs,
                                        const DrawTensor& draws) const {
  check_shapes(params, draws);
  Workspace ws;
  return std::exp(observation_loglik(params.data(), obs, draws, ws, nullptr, nullptr));
}

std::vector<double> Evaluator::probability_matrix(const std::vector<double>& params,
                                                  const DrawTensor& draws) const {
  check_shapes(params, draws);
  const int n = data_.n_obs();
  const int n_alts = data_.n_alternatives;
  std::vector<double> probs(static_cast<std::size_t>(n) * n_alts, 0.0);
  for_each_chunk(n, n_threads_, [&](int, int begin, int end) {
    Workspace ws;
    for (int i = begin; i < end; ++i)
      observation_loglik(params.data(), i, draws, ws, nullptr,
                         probs.data() + static_cast<std::size_t>(i) * n_alts);
  });
  return probs;
}

std::vector<double> Evaluator::realized_coefficients(const std::vector<double>& params, int obs,
                                                     const double* draw_row) const {
  if (static_cast<int>(params.size()) != layout_.size())
    throw ValueError("parameter vector length mismatch");
  std::vector<double> coef(plans_.size());
  for (std::size_t t = 0; t < plans_.size(); ++t) {
    const TermPlan& plan = plans_[t];
    double c = params[static_cast<std::size_t>(plan.param)];
    for (const auto& [dp, col] : plan.shifters)
      c += params[static_cast<std::size_t>(dp)] * data_.value(obs, col);
    for (const auto& [gp, dd] : plan.gamma)
      c += params[static_cast<std::size_t>(gp)] * draw_row[dd];
    coef[t] = c;
  }
  return coef;
}

DrawTensor Evaluator::make_model_draws() const {
  return make_draws(data_.n_obs(), n_random_, spec_.draws);
}

}  // namespace mixlogit
