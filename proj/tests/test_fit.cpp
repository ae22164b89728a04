#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mixlogit/errors.hpp"
#include "mixlogit/fit.hpp"
#include "mixlogit/synth.hpp"
#include "util.hpp"

using namespace mixlogit;
using testutil::make_dataset;
using testutil::make_spec;

namespace {

TruthConfig truth_for(const ModelSpec& spec, std::vector<double> params, int n_obs,
                      std::uint64_t seed) {
  TruthConfig cfg;
  cfg.spec = spec;
  cfg.true_params = std::move(params);
  cfg.n_obs = n_obs;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("null log-likelihood is -N log I") {
  std::vector<int> chosen(1078, 0);
  std::vector<double> x(1078, 0.0);
  const ChoiceDataset big = make_dataset({"z"}, 3, std::move(chosen), std::move(x));
  CHECK(std::fabs(null_log_likelihood(big) - (-1184.3040471842222)) < 0.01);

  std::vector<int> chosen2(1002, 0);
  std::vector<double> x2(1002, 0.0);
  const ChoiceDataset mid = make_dataset({"z"}, 3, std::move(chosen2), std::move(x2));
  CHECK(std::fabs(null_log_likelihood(mid) - (-1100.8095132454459)) < 0.01);

  const ChoiceDataset tiny = make_dataset({"z"}, 2, {0}, {0.0});
  CHECK(null_log_likelihood(tiny) == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("conditional-logit recovery lands within three standard errors") {
  const ModelSpec spec = make_spec({{"f1", "a", 1, false}, {"f2", "b", 2, false}});
  const std::vector<double> truth = {1.0, -0.5};
  const ChoiceDataset data = generate_dataset(truth_for(spec, truth, 5000, 31));

  const FitResult fit = maximize(spec, data);
  CHECK(fit.converged);
  CHECK(fit.criterion != ConvergedBy::None);
  CHECK(fit.n_obs == 5000);
  CHECK(fit.n_params == 2);
  CHECK(fit.ll_convergence >= fit.ll_zero);
  CHECK_FALSE(fit.non_identified);
  for (int j = 0; j < 2; ++j) {
    CHECK(fit.std_errors[static_cast<std::size_t>(j)] > 0.0);
    CHECK(std::fabs(fit.estimates[static_cast<std::size_t>(j)] -
                    truth[static_cast<std::size_t>(j)]) <
          3.0 * fit.std_errors[static_cast<std::size_t>(j)]);
    CHECK(fit.t_stats[static_cast<std::size_t>(j)] ==
          doctest::Approx(fit.estimates[static_cast<std::size_t>(j)] /
                          fit.std_errors[static_cast<std::size_t>(j)])
              .epsilon(1e-12));
  }
}

TEST_CASE("published coefficient and standard error imply the published t-statistic") {
  CHECK(-2.295 / 0.37075 == doctest::Approx(-6.19).epsilon(0.01));
}

TEST_CASE("refits are bitwise deterministic") {
  const ModelSpec spec =
      make_spec({{"f", "a", 1, false}, {"r", "b", 2, true}}, {}, {}, 60, 4);
  const ChoiceDataset data =
      generate_dataset(truth_for(spec, {0.6, -0.4, 0.5}, 600, 77));
  const FitResult first = maximize(spec, data);
  const FitResult second = maximize(spec, data);
  CHECK(first.estimates == second.estimates);
  CHECK(first.ll_convergence == second.ll_convergence);
  CHECK(first.std_errors == second.std_errors);
  CHECK(first.iterations == second.iterations);
}

TEST_CASE("thread count does not move the optimum") {
  const ModelSpec spec = make_spec({{"f", "a", 1, false}, {"c", kConstant, 2, false}});
  const ChoiceDataset data = generate_dataset(truth_for(spec, {0.8, -0.2}, 900, 5));
  const FitResult serial = maximize(spec, data, 1);
  const FitResult parallel = maximize(spec, data, 4);
  CHECK(serial.estimates == parallel.estimates);
  CHECK(serial.ll_convergence == parallel.ll_convergence);
}

TEST_CASE("a perfectly separating dummy is flagged or stalls") {
  const int n = 90;
  std::vector<int> chosen;
  std::vector<double> x;
  for (int i = 0; i < n; ++i) {
    const bool flag = i % 3 == 0;
    chosen.push_back(flag ? 1 : (i % 2 ? 0 : 2));
    x.push_back(flag ? 1.0 : 0.0);
  }
  const ChoiceDataset data = make_dataset({"sep"}, 3, std::move(chosen), std::move(x));
  ModelSpec spec = make_spec({{"s", "sep", 1, false}, {"c", kConstant, 2, false}});
  // A tight box makes the runaway coefficient hit the guard instead of
  // drifting until the function change fades out.
  spec.optimizer.box_bound = 4.0;

  try {
    const FitResult fit = maximize(spec, data);
    CHECK(fit.non_identified);
    CHECK(std::find(fit.at_bound.begin(), fit.at_bound.end(), "s") != fit.at_bound.end());
    CHECK(fit.estimates[0] == doctest::Approx(4.0).epsilon(1e-6));
  } catch (const OptimizerStallError& e) {
    CHECK(e.best_point.size() == 2);
    CHECK(std::isfinite(e.best_loglik));
    CHECK(std::fabs(e.best_point[0]) == doctest::Approx(4.0).epsilon(1e-6));
  } catch (const InferenceError& e) {
    CHECK_FALSE(e.parameters.empty());
  }
}

TEST_CASE("binary-logit standard error matches the closed form") {
  const int n = 400, k = 140;
  std::vector<int> chosen(n, 0);
  std::vector<double> x(n, 0.0);
  for (int i = 0; i < k; ++i) chosen[static_cast<std::size_t>(i)] = 1;

  ChoiceDataset data;
  data.variable_names = {"z"};
  data.n_alternatives = 2;
  data.chosen = std::move(chosen);
  data.x = std::move(x);
  data.crash_ids.assign(n, "c");
  data.check_invariants();

  ModelSpec spec;
  spec.name = "binary";
  spec.alternatives = {"no", "yes"};
  spec.terms.push_back({"c1", kConstant, 1, TermKind::Fixed});

  const FitResult fit = maximize(spec, data);
  const double p = static_cast<double>(k) / n;
  CHECK(fit.estimates[0] == doctest::Approx(std::log(p / (1.0 - p))).epsilon(1e-3));
  const double closed_form_se = 1.0 / std::sqrt(n * p * (1.0 - p));
  CHECK(std::fabs(fit.std_errors[0] - closed_form_se) / closed_form_se < 0.02);
  CHECK(fit.se_estimator == SeEstimator::Hessian);
}

TEST_CASE("an all-zero column makes inference impossible") {
  std::vector<int> chosen;
  std::vector<double> x;
  for (int i = 0; i < 120; ++i) {
    chosen.push_back(i % 3);
    x.push_back(i % 2 ? 1.0 : 0.0);
    x.push_back(0.0);
  }
  const ChoiceDataset data = make_dataset({"a", "dead"}, 3, std::move(chosen), std::move(x));
  const ModelSpec spec = make_spec({{"f", "a", 1, false}, {"d", "dead", 2, false}});
  try {
    maximize(spec, data);
    FAIL("expected an InferenceError");
  } catch (const InferenceError& e) {
    CHECK(std::find(e.parameters.begin(), e.parameters.end(), "d") != e.parameters.end());
  }
}

TEST_CASE("non-finite start raises InitializationError") {
  const ChoiceDataset data = make_dataset({"a"}, 3, {0, 1, 2}, {1, 0, 1});
  ModelSpec spec = make_spec({{"f", "a", 1, false}});
  spec.optimizer.start = std::vector<double>{std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(maximize(spec, data), InitializationError);

  spec.optimizer.start = std::vector<double>{0.0, 0.0};
  CHECK_THROWS_AS(maximize(spec, data), ArgumentError);
}

TEST_CASE("iteration cap exits without the converged flag") {
  const ModelSpec base = make_spec({{"f", "a", 1, false}, {"c", kConstant, 2, false}});
  const ChoiceDataset data = generate_dataset(truth_for(base, {0.9, 0.4}, 500, 8));
  ModelSpec spec = base;
  spec.optimizer.max_iterations = 1;
  const FitResult fit = maximize(spec, data);
  CHECK_FALSE(fit.converged);
  CHECK(fit.criterion == ConvergedBy::None);
  CHECK(fit.iterations == 1);
}

TEST_CASE("warm start comes from the fixed-coefficient pre-fit") {
  const ModelSpec mnl = make_spec({{"f", "a", 1, false}, {"r", "b", 2, false}});
  const ChoiceDataset data = generate_dataset(truth_for(mnl, {0.7, -0.6}, 800, 21));
  const FitResult pre = maximize(mnl, data);

  const ModelSpec mixed = make_spec({{"f", "a", 1, false}, {"r", "b", 2, true}},
                                    {{"r", "a"}}, {"r"}, 50);
  const std::vector<double> start = starting_point(mixed, data);
  const ParamLayout layout = parameter_layout(mixed);
  REQUIRE(start.size() == 4);
  CHECK(start[static_cast<std::size_t>(layout.index_of("f"))] ==
        doctest::Approx(pre.estimates[static_cast<std::size_t>(pre.layout.index_of("f"))])
            .epsilon(1e-12));
  CHECK(start[static_cast<std::size_t>(layout.index_of("r"))] ==
        doctest::Approx(pre.estimates[static_cast<std::size_t>(pre.layout.index_of("r"))])
            .epsilon(1e-12));
  CHECK(start[static_cast<std::size_t>(layout.index_of("r:a"))] == 0.0);
  CHECK(start[static_cast<std::size_t>(layout.index_of("chol:r:r"))] == 0.5);

  const ModelSpec plain = make_spec({{"f", "a", 1, false}});
  CHECK(starting_point(plain, data) == std::vector<double>{0.0});
}

TEST_CASE("relaxing the model never hurts the fitted likelihood") {
  const ModelSpec gen = make_spec({{"f", "a", 1, false}, {"g", "b", 2, false}});
  const ChoiceDataset data = generate_dataset(truth_for(gen, {0.8, -0.7}, 700, 44));

  const ModelSpec mnl = make_spec({{"f", "a", 1, false}, {"g", "b", 2, false}});
  const ModelSpec rpl =
      make_spec({{"f", "a", 1, false}, {"g", "b", 2, true}}, {}, {}, 50, 3);
  const FitResult fit_mnl = maximize(mnl, data);
  const FitResult fit_rpl = maximize(rpl, data);
  CHECK(fit_rpl.ll_convergence >= fit_mnl.ll_convergence - 1e-4);
}
