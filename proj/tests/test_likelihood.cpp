#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "mixlogit/errors.hpp"
#include "mixlogit/likelihood.hpp"
#include "mixlogit/rng.hpp"
#include "oracles.hpp"
#include "util.hpp"

using namespace mixlogit;
using testutil::make_dataset;
using testutil::make_spec;

namespace {

// Bernoulli 0/1 design matrix, deterministic in the seed.
ChoiceDataset random_dataset(int n_obs, const std::vector<std::string>& columns,
                             std::uint64_t seed, int n_alternatives = 3) {
  SplitMix64 rng(seed);
  std::vector<int> chosen(static_cast<std::size_t>(n_obs));
  std::vector<double> x;
  for (int n = 0; n < n_obs; ++n) {
    chosen[static_cast<std::size_t>(n)] =
        static_cast<int>(rng.below(static_cast<std::uint64_t>(n_alternatives)));
    for (std::size_t c = 0; c < columns.size(); ++c)
      x.push_back(rng.uniform() < 0.5 ? 1.0 : 0.0);
  }
  return make_dataset(columns, n_alternatives, std::move(chosen), std::move(x));
}

}  // namespace

TEST_CASE("mnl probabilities at reference utilities") {
  const std::vector<double> thirds = mnl_probability({0.0, 0.0, 0.0});
  for (double p : thirds) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-15));

  const std::vector<double> ramp = mnl_probability({0.0, 1.0, 2.0});
  CHECK(ramp[0] == doctest::Approx(0.090030573170380458).epsilon(1e-12));
  CHECK(ramp[1] == doctest::Approx(0.24472847105479765).epsilon(1e-12));
  CHECK(ramp[2] == doctest::Approx(0.66524095577482189).epsilon(1e-12));

  const std::vector<double> extreme = mnl_probability({0.0, 700.0, 0.0});
  CHECK(std::isfinite(extreme[1]));
  CHECK(extreme[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(extreme[0] < 1e-300);

  double total = 0.0;
  for (double p : ramp) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mnl probabilities are shift invariant") {
  const std::vector<double> base = mnl_probability({0.3, -1.2, 2.0});
  const std::vector<double> shifted = mnl_probability({0.3 + 37.0, -1.2 + 37.0, 2.0 + 37.0});
  for (std::size_t a = 0; a < base.size(); ++a)
    CHECK(base[a] == doctest::Approx(shifted[a]).epsilon(1e-12));
}

TEST_CASE("realized coefficients compose mean, shifter and draw pieces") {
  const ChoiceDataset data = make_dataset({"z"}, 3, {1, 1}, {1.0, 0.0});
  const ModelSpec spec = make_spec(
      {{"fix", kConstant, 1, false}, {"rnd", kConstant, 2, true}}, {{"rnd", "z"}});
  const Evaluator eval(spec, data);
  REQUIRE(eval.layout().names ==
          std::vector<std::string>{"fix", "rnd", "rnd:z", "sd:rnd"});

  const std::vector<double> params = {-2.295, -1.474, -0.531, 3.286};
  const double zero = 0.0;
  const double one = 1.0;

  const std::vector<double> at_zero = eval.realized_coefficients(params, 0, &zero);
  CHECK(at_zero[0] == -2.295);
  CHECK(at_zero[1] == doctest::Approx(-2.005).epsilon(1e-12));

  // Observation 1 has z = 0, so only the draw term moves the coefficient.
  const std::vector<double> no_shift = eval.realized_coefficients(params, 1, &zero);
  CHECK(no_shift[1] == doctest::Approx(-1.474).epsilon(1e-12));
  const std::vector<double> at_one = eval.realized_coefficients(params, 1, &one);
  CHECK(at_one[0] == -2.295);
  CHECK(at_one[1] == doctest::Approx(-1.474 + 3.286).epsilon(1e-12));

  CHECK_THROWS_AS(eval.realized_coefficients({0.0}, 0, &zero), ValueError);
}

TEST_CASE("zero parameters give exactly uniform simulated probabilities") {
  const ChoiceDataset data = make_dataset({"z"}, 3, {0, 1, 2}, {1, 0, 1});
  for (int n_draws : {1, 7, 500}) {
    const ModelSpec spec =
        make_spec({{"r", "z", 1, true}, {"f", kConstant, 2, false}}, {}, {}, n_draws);
    const Evaluator eval(spec, data);
    const DrawTensor draws = eval.make_model_draws();
    const std::vector<double> params(static_cast<std::size_t>(eval.n_params()), 0.0);
    for (int n = 0; n < data.n_obs(); ++n)
      CHECK(eval.simulated_probability(params, n, draws) ==
            doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(eval.log_likelihood(params, draws) ==
          doctest::Approx(3.0 * std::log(1.0 / 3)).epsilon(1e-14));
  }
}

TEST_CASE("null-sized log-likelihoods match the published base values") {
  auto flat_ll = [](int n_obs) {
    std::vector<int> chosen(static_cast<std::size_t>(n_obs), 0);
    std::vector<double> x(static_cast<std::size_t>(n_obs), 0.0);
    const ChoiceDataset data = make_dataset({"z"}, 3, std::move(chosen), std::move(x));
    const ModelSpec spec = make_spec({{"f", "z", 1, false}});
    const Evaluator eval(spec, data);
    DrawTensor draws;
    return eval.log_likelihood({0.0}, draws);
  };
  CHECK(std::fabs(flat_ll(1078) - (-1184.3040471842222)) < 0.01);
  CHECK(std::fabs(flat_ll(1002) - (-1100.8095132454459)) < 0.01);
}

TEST_CASE("single observation at probability one half") {
  const ChoiceDataset data = make_dataset({"z"}, 3, {1}, {0.0});
  const ModelSpec spec = make_spec({{"c1", kConstant, 1, false}});
  const Evaluator eval(spec, data);
  DrawTensor draws;
  CHECK(eval.log_likelihood({std::log(2.0)}, draws) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-14));
}

TEST_CASE("simulated probability agrees with quadrature and Monte Carlo oracles") {
  const ChoiceDataset data = make_dataset({"z"}, 3, {2}, {1.0});
  ModelSpec spec =
      make_spec({{"f", kConstant, 1, false}, {"r", "z", 2, true}}, {}, {}, 2000);
  spec.draws.seed = 13;
  const Evaluator eval(spec, data);
  REQUIRE(eval.layout().names == std::vector<std::string>{"f", "r", "sd:r"});
  const DrawTensor draws = eval.make_model_draws();

  SplitMix64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const double beta = -1.0 + 2.0 * rng.uniform();
    const double mean = -1.5 + 3.0 * rng.uniform();
    const double sd = 0.2 + 1.3 * rng.uniform();
    const std::vector<double> params = {beta, mean, sd};
    auto utilities = [&](double v) {
      return std::vector<double>{0.0, beta, mean + sd * v};
    };
    const double simulated = eval.simulated_probability(params, 0, draws);
    const double quadrature = oracles::gh_mixed_prob(64, 2, utilities);
    const double monte_carlo = oracles::mc_mixed_prob(200000, 1234 + trial, 2, utilities);
    CHECK(simulated > 0.0);
    CHECK(simulated < 1.0);
    CHECK(std::fabs(simulated - quadrature) < 1e-3);
    CHECK(std::fabs(simulated - monte_carlo) < 1e-3);
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  const ChoiceDataset data = random_dataset(40, {"a", "b", "z"}, 5);
  const ModelSpec spec = make_spec({{"f1", "a", 1, false},
                                    {"c2", kConstant, 2, false},
                                    {"r1", "a", 2, true},
                                    {"r2", "b", 1, true}},
                                   {{"r1", "z"}}, {"r1", "r2"}, 50);
  const Evaluator eval(spec, data);
  const DrawTensor draws = eval.make_model_draws();
  auto objective = [&](const std::vector<double>& p) {
    return eval.log_likelihood(p, draws);
  };

  SplitMix64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> point(static_cast<std::size_t>(eval.n_params()));
    for (double& v : point) v = -1.0 + 2.0 * rng.uniform();
    const std::vector<double> analytic = eval.gradient(point, draws);
    const std::vector<double> numeric = oracles::fd_gradient(objective, point, 1e-6);
    for (std::size_t j = 0; j < analytic.size(); ++j) {
      const double tol = std::max(1e-6, 1e-4 * std::fabs(analytic[j]));
      CHECK(std::fabs(analytic[j] - numeric[j]) < tol);
    }
  }
}

TEST_CASE("a variable that never fires has zero gradient") {
  ChoiceDataset data = random_dataset(30, {"a", "dead"}, 6);
  for (int n = 0; n < data.n_obs(); ++n)
    data.x[static_cast<std::size_t>(n) * 2 + 1] = 0.0;
  const ModelSpec spec =
      make_spec({{"f", "a", 1, false}, {"d", "dead", 2, false}}, {}, {}, 10);
  const Evaluator eval(spec, data);
  DrawTensor draws;
  const std::vector<double> grad = eval.gradient({0.4, 1.7}, draws);
  CHECK(grad[1] == 0.0);
  CHECK(grad[0] != 0.0);
}

TEST_CASE("probability matrix rows are simplex points consistent with the chosen probability") {
  const ChoiceDataset data = random_dataset(25, {"a", "b"}, 8);
  const ModelSpec spec = make_spec(
      {{"f", "a", 1, false}, {"r", "b", 2, true}, {"c", kConstant, 1, false}}, {}, {}, 60);
  const Evaluator eval(spec, data);
  const DrawTensor draws = eval.make_model_draws();
  std::vector<double> params(static_cast<std::size_t>(eval.n_params()));
  SplitMix64 rng(17);
  for (double& v : params) v = -1.0 + 2.0 * rng.uniform();

  const std::vector<double> probs = eval.probability_matrix(params, draws);
  for (int n = 0; n < data.n_obs(); ++n) {
    double total = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double p = probs[static_cast<std::size_t>(n) * 3 + a];
      CHECK(p > 0.0);
      CHECK(p < 1.0);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const double chosen_p = probs[static_cast<std::size_t>(n) * 3 + data.chosen[static_cast<std::size_t>(n)]];
    CHECK(chosen_p == doctest::Approx(eval.simulated_probability(params, n, draws))
                          .epsilon(1e-12));
  }
}

TEST_CASE("correlated evaluation with zero couplings reduces bitwise to the plain paths") {
  const ChoiceDataset data = random_dataset(50, {"a", "b", "z"}, 10);
  const int n_draws = 40;

  const ModelSpec rpl = make_spec(
      {{"f", "a", 1, false}, {"r1", "b", 2, true}, {"r2", kConstant, 1, true}}, {}, {},
      n_draws);
  const ModelSpec crplhm = make_spec(
      {{"f", "a", 1, false}, {"r1", "b", 2, true}, {"r2", kConstant, 1, true}},
      {{"r1", "z"}}, {"r1", "r2"}, n_draws);

  const Evaluator eval_rpl(rpl, data);
  const Evaluator eval_crplhm(crplhm, data);
  const DrawTensor draws = eval_rpl.make_model_draws();

  // rpl:    [f, r1, r2, sd:r1, sd:r2]
  // crplhm: [f, r1, r2, r1:z, chol:r1:r1, chol:r2:r1, chol:r2:r2]
  const std::vector<double> p_rpl = {0.3, -0.8, 0.5, 1.1, 0.7};
  const std::vector<double> p_crplhm = {0.3, -0.8, 0.5, 0.0, 1.1, 0.0, 0.7};
  CHECK(eval_crplhm.log_likelihood(p_crplhm, draws) ==
        eval_rpl.log_likelihood(p_rpl, draws));

  const ModelSpec mnl_fixed = make_spec(
      {{"f", "a", 1, false}, {"r1", "b", 2, false}, {"r2", kConstant, 1, false}});
  const Evaluator eval_mnl(mnl_fixed, data);
  DrawTensor no_draws;
  const std::vector<double> p_zero_sd = {0.3, -0.8, 0.5, 0.0, 0.0};
  CHECK(std::fabs(eval_rpl.log_likelihood(p_zero_sd, draws) -
                  eval_mnl.log_likelihood({0.3, -0.8, 0.5}, no_draws)) < 1e-12);
}

TEST_CASE("thread count never changes the result") {
  const ChoiceDataset data = random_dataset(300, {"a", "b"}, 12);
  const ModelSpec spec =
      make_spec({{"f", "a", 1, false}, {"r", "b", 2, true}}, {}, {}, 30);
  Evaluator eval(spec, data);
  const DrawTensor draws = eval.make_model_draws();
  const std::vector<double> params = {0.4, -0.6, 0.9};

  eval.set_threads(1);
  const double ll1 = eval.log_likelihood(params, draws);
  const std::vector<double> g1 = eval.gradient(params, draws);
  eval.set_threads(4);
  const double ll4 = eval.log_likelihood(params, draws);
  const std::vector<double> g4 = eval.gradient(params, draws);
  eval.set_threads(13);
  const double ll13 = eval.log_likelihood(params, draws);

  CHECK(ll1 == ll4);
  CHECK(ll1 == ll13);
  CHECK(g1 == g4);
}

TEST_CASE("observation order only reorders the sum") {
  const ChoiceDataset data = random_dataset(120, {"a"}, 14);
  ChoiceDataset reversed = data;
  for (int n = 0; n < data.n_obs(); ++n) {
    const int m = data.n_obs() - 1 - n;
    reversed.chosen[static_cast<std::size_t>(n)] = data.chosen[static_cast<std::size_t>(m)];
    reversed.crash_ids[static_cast<std::size_t>(n)] = data.crash_ids[static_cast<std::size_t>(m)];
    reversed.x[static_cast<std::size_t>(n)] = data.x[static_cast<std::size_t>(m)];
  }
  const ModelSpec spec = make_spec({{"f", "a", 1, false}, {"c", kConstant, 2, false}});
  const Evaluator eval_a(spec, data);
  const Evaluator eval_b(spec, reversed);
  DrawTensor draws;
  const std::vector<double> params = {0.8, -0.3};
  CHECK(eval_a.log_likelihood(params, draws) ==
        doctest::Approx(eval_b.log_likelihood(params, draws)).epsilon(1e-12));
}

TEST_CASE("score matrix rows add up to the gradient") {
  const ChoiceDataset data = random_dataset(70, {"a", "b"}, 15);
  const ModelSpec spec =
      make_spec({{"f", "a", 1, false}, {"r", "b", 2, true}}, {}, {"r"}, 25);
  const Evaluator eval(spec, data);
  const DrawTensor draws = eval.make_model_draws();
  const std::vector<double> params = {0.2, 0.5, 0.8};

  const std::vector<double> scores = eval.score_matrix(params, draws);
  const std::vector<double> grad = eval.gradient(params, draws);
  REQUIRE(scores.size() == static_cast<std::size_t>(70 * 3));
  for (int j = 0; j < 3; ++j) {
    double total = 0.0;
    for (int n = 0; n < 70; ++n) total += scores[static_cast<std::size_t>(n) * 3 + j];
    CHECK(total == doctest::Approx(grad[static_cast<std::size_t>(j)]).epsilon(1e-10));
  }
}

TEST_CASE("shape mismatches are rejected") {
  const ChoiceDataset data = random_dataset(10, {"a"}, 16);
  const ModelSpec spec = make_spec({{"r", "a", 1, true}}, {}, {}, 20);
  const Evaluator eval(spec, data);
  const DrawTensor draws = eval.make_model_draws();

  CHECK_THROWS_AS(eval.log_likelihood({0.1}, draws), ValueError);

  DrawTensor wrong_terms = make_draws(10, 2, spec.draws);
  CHECK_THROWS_AS(eval.log_likelihood({0.1, 0.2}, wrong_terms), ValueError);

  DrawTensor wrong_obs = make_draws(9, 1, spec.draws);
  CHECK_THROWS_AS(eval.log_likelihood({0.1, 0.2}, wrong_obs), ValueError);

  CHECK_THROWS_AS(Evaluator(make_spec({{"r", "ghost", 1, true}}), data), NameError);
}
