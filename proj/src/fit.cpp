#include "mixlogit/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mixlogit/errors.hpp"

namespace mixlogit {

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

struct BfgsOutcome {
  Eigen::VectorXd x;
  double f = 0.0;  // minimized objective, -loglik
  int iterations = 0;
  bool converged = false;
  ConvergedBy by = ConvergedBy::None;
  bool stalled = false;
};

BfgsOutcome run_bfgs(const Evaluator& eval, const DrawTensor& draws, Eigen::VectorXd x,
                     const OptimizerSettings& opt) {
  const Eigen::Index k = x.size();
  const double bound = opt.box_bound;
  auto project = [bound](Eigen::VectorXd& p) {
    for (Eigen::Index j = 0; j < p.size(); ++j) p[j] = std::clamp(p[j], -bound, bound);
  };
  auto objective = [&](const Eigen::VectorXd& p) {
    return -eval.log_likelihood(to_std(p), draws);
  };
  auto objective_gradient = [&](const Eigen::VectorXd& p) {
    return Eigen::VectorXd(-to_eigen(eval.gradient(to_std(p), draws)));
  };

  project(x);
  double f = objective(x);
  if (!std::isfinite(f))
    throw InitializationError("log-likelihood is not finite at the starting point");
  Eigen::VectorXd g = objective_gradient(x);

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd H = identity;
  BfgsOutcome out;

  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < opt.tol_g) {
      out.converged = true;
      out.by = ConvergedBy::Gradient;
      break;
    }
    Eigen::VectorXd d = -(H * g);
    if (d.dot(g) >= 0.0) {
      H = identity;
      d = -g;
    }
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = f;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = 1.0;
      for (int bt = 0; bt < opt.max_backtracks; ++bt) {
        x_new = x + step * d;
        project(x_new);
        const Eigen::VectorXd s = x_new - x;
        if (s.lpNorm<Eigen::Infinity>() == 0.0) break;
        f_new = objective(x_new);
        const double slope = g.dot(s);
        const bool ok = slope < 0.0 ? f_new <= f + 1e-4 * slope : f_new < f;
        if (std::isfinite(f_new) && ok) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted && attempt == 0 && !H.isIdentity(0.0)) {
        H = identity;
        d = -g;
      } else if (!accepted) {
        break;
      }
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }

    Eigen::VectorXd g_new = objective_gradient(x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      H = (identity - rho * s * y.transpose()) * H * (identity - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    const double rel = std::fabs(f_new - f) / (std::fabs(f) + 1e-10);
    x = x_new;
    f = f_new;
    g = g_new;
    if (rel < opt.tol_f) {
      ++it;
      out.converged = true;
      out.by = ConvergedBy::FunctionChange;
      break;
    }
  }
  out.x = x;
  out.f = f;
  out.iterations = it;
  return out;
}

std::vector<std::string> bound_contacts(const ParamLayout& layout, const Eigen::VectorXd& x,
                                        double bound) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (std::fabs(x[j]) >= bound - 1e-8)
      names.push_back(layout.names[static_cast<std::size_t>(j)]);
  return names;
}

}  // namespace

double null_log_likelihood(const ChoiceDataset& data) {
  return -static_cast<double>(data.n_obs()) * std::log(static_cast<double>(data.n_alternatives));
}

std::vector<double> starting_point(const ModelSpec& spec, const ChoiceDataset& data,
                                   int n_threads) {
  const ParamLayout layout = parameter_layout(spec);
  std::vector<double> x(static_cast<std::size_t>(layout.size()), 0.0);
  if (!spec.has_random_terms()) return x;

  ModelSpec twin = spec;
  twin.mean_shifters.clear();
  twin.correlated_block.clear();
  for (auto& t : twin.terms) t.kind = TermKind::Fixed;
  twin.optimizer.start.reset();
  const FitResult pre = maximize(twin, data, n_threads);

  for (const auto& t : spec.terms)
    x[static_cast<std::size_t>(layout.index_of(t.name))] =
        pre.estimates[static_cast<std::size_t>(pre.layout.index_of(t.name))];
  for (const auto& t : spec.terms)
    if (t.kind == TermKind::Random && !spec.is_correlated(t.name))
      x[static_cast<std::size_t>(layout.index_of("sd:" + t.name))] = 0.5;
  for (const auto& name : spec.correlated_block)
    x[static_cast<std::size_t>(layout.index_of("chol:" + name + ":" + name))] = 0.5;
  return x;
}

std::vector<double> standard_errors(const Evaluator& eval, const std::vector<double>& estimates,
                                    const DrawTensor& draws, SeEstimator& used) {
  const int k = eval.n_params();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(k, k);

  Eigen::MatrixXd hess(k, k);
  for (int j = 0; j < k; ++j) {
    const double h = 1e-5 * std::max(1.0, std::fabs(estimates[static_cast<std::size_t>(j)]));
    std::vector<double> xp = estimates, xm = estimates;
    xp[static_cast<std::size_t>(j)] += h;
    xm[static_cast<std::size_t>(j)] -= h;
    const Eigen::VectorXd gp = to_eigen(eval.gradient(xp, draws));
    const Eigen::VectorXd gm = to_eigen(eval.gradient(xm, draws));
    hess.col(j) = -(gp - gm) / (2.0 * h);
  }
  hess = ((hess + hess.transpose()) / 2.0).eval();

  if (hess.allFinite()) {
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() == Eigen::Success) {
      const Eigen::MatrixXd cov = llt.solve(identity);
      if ((cov.diagonal().array() > 0.0).all()) {
        used = SeEstimator::Hessian;
        std::vector<double> se(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
          se[static_cast<std::size_t>(j)] = std::sqrt(cov.diagonal()[j]);
        return se;
      }
    }
  }

  const std::vector<double> score_rows = eval.score_matrix(estimates, draws);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      scores(score_rows.data(), eval.data().n_obs(), k);
  const Eigen::MatrixXd bhhh = scores.transpose() * scores;
  Eigen::LLT<Eigen::MatrixXd> llt(bhhh);
  if (llt.info() == Eigen::Success) {
    const Eigen::MatrixXd cov = llt.solve(identity);
    if ((cov.diagonal().array() > 0.0).all()) {
      used = SeEstimator::Bhhh;
      std::vector<double> se(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) se[static_cast<std::size_t>(j)] = std::sqrt(cov.diagonal()[j]);
      return se;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bhhh);
  const double lam_max = es.eigenvalues().cwiseAbs().maxCoeff();
  std::set<std::string> offending;
  for (int i = 0; i < k; ++i)
    if (es.eigenvalues()[i] <= 1e-10 * std::max(lam_max, 1.0)) {
      Eigen::Index worst;
      es.eigenvectors().col(i).cwiseAbs().maxCoeff(&worst);
      offending.insert(eval.layout().names[static_cast<std::size_t>(worst)]);
    }
  std::string msg = "information matrix is singular; parameters involved:";
  std::vector<std::string> names(offending.begin(), offending.end());
  for (const auto& n : names) msg += " " + n;
  throw InferenceError(msg, names);
}

FitResult maximize(const ModelSpec& spec, const ChoiceDataset& data, int n_threads) {
  return maximize(spec, data, spec.optimizer, n_threads);
}

FitResult maximize(const ModelSpec& spec, const ChoiceDataset& data,
                   const OptimizerSettings& options, int n_threads) {
  Evaluator eval(spec, data);
  eval.set_threads(n_threads);
  const DrawTensor draws = eval.make_model_draws();

  std::vector<double> x0;
  if (options.start) {
    x0 = *options.start;
    if (static_cast<int>(x0.size()) != eval.n_params())
      throw ArgumentError("optimizer start vector has length " + std::to_string(x0.size()) +
                          " but the layout needs " + std::to_string(eval.n_params()));
  } else {
    x0 = starting_point(spec, data, n_threads);
  }

  BfgsOutcome opt = run_bfgs(eval, draws, to_eigen(x0), options);
  if (opt.stalled) {
    const auto pinned = bound_contacts(eval.layout(), opt.x, options.box_bound);
    std::string msg = "line search stalled after " + std::to_string(options.max_backtracks) +
                      " backtracks at iteration " + std::to_string(opt.iterations);
    if (!pinned.empty()) {
      msg += "; parameters at the box bound:";
      for (const auto& n : pinned) msg += " " + n;
    }
    throw OptimizerStallError(msg, to_std(opt.x), -opt.f, opt.iterations);
  }

  FitResult result;
  result.spec = spec;
  result.layout = eval.layout();
  result.estimates = to_std(opt.x);
  result.ll_zero = null_log_likelihood(data);
  result.ll_convergence = -opt.f;
  result.n_obs = data.n_obs();
  result.n_params = eval.n_params();
  result.converged = opt.converged;
  result.criterion = opt.by;
  result.iterations = opt.iterations;
  result.at_bound = bound_contacts(eval.layout(), opt.x, options.box_bound);
  result.non_identified = !result.at_bound.empty();
  result.n_draws = eval.n_random_terms() > 0 ? draws.n_draws : 0;
  result.seed = spec.draws.seed;
  result.primes = draws.primes;
  result.n_threads = n_threads;

  result.std_errors = standard_errors(eval, result.estimates, draws, result.se_estimator);
  result.t_stats.resize(result.estimates.size());
  for (std::size_t j = 0; j < result.estimates.size(); ++j)
    result.t_stats[j] = result.std_errors[j] > 0.0
                            ? result.estimates[j] / result.std_errors[j]
                            : std::numeric_limits<double>::quiet_NaN();
  return result;
}

}  // namespace mixlogit
