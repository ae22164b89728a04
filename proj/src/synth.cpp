#include "mixlogit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "mixlogit/draws.hpp"
#include "mixlogit/errors.hpp"
#include "mixlogit/likelihood.hpp"
#include "mixlogit/rng.hpp"

namespace mixlogit {

TruthConfig parse_truth_config(const nlohmann::json& config) {
  TruthConfig cfg;
  if (!config.contains("spec")) throw SpecError("truth config is missing a spec section");
  cfg.spec = parse_model_spec(config.at("spec"));
  cfg.n_obs = config.value("n_obs", 0);
  if (cfg.n_obs < 1) throw SpecError("truth config needs n_obs >= 1");
  cfg.seed = config.value("seed", cfg.seed);
  cfg.default_probability = config.value("default_probability", cfg.default_probability);
  const nlohmann::json covariates = config.value("covariates", nlohmann::json::object());
  for (const auto& [key, value] : covariates.items())
    cfg.covariate_probability[key] = value.get<double>();
  for (const auto& [key, p] : cfg.covariate_probability)
    if (p < 0.0 || p > 1.0)
      throw SpecError("covariate probability for '" + key + "' outside [0,1]");
  if (cfg.default_probability < 0.0 || cfg.default_probability > 1.0)
    throw SpecError("default_probability outside [0,1]");

  const ParamLayout layout = parameter_layout(cfg.spec);
  if (!config.contains("true_params"))
    throw SpecError("truth config is missing true_params");
  const auto& tp = config.at("true_params");
  cfg.true_params.assign(static_cast<std::size_t>(layout.size()), 0.0);
  if (tp.is_array()) {
    if (static_cast<int>(tp.size()) != layout.size())
      throw SpecError("true_params has length " + std::to_string(tp.size()) +
                      " but the layout needs " + std::to_string(layout.size()));
    cfg.true_params = tp.get<std::vector<double>>();
  } else {
    for (const auto& [key, value] : tp.items())
      cfg.true_params[static_cast<std::size_t>(layout.index_of(key))] = value.get<double>();
  }
  return cfg;
}

TruthConfig parse_truth_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open truth config file: " + path);
  nlohmann::json config;
  try {
    in >> config;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("invalid truth config JSON in " + path + ": " + e.what());
  }
  return parse_truth_config(config);
}

namespace {

struct SynthTerm {
  int variable = -1;  // index into the collected variable list, -1 for constant
  int alternative = 0;
  int param = 0;
  std::vector<std::pair<int, int>> shifters;  // (delta param, variable index)
  std::vector<std::pair<int, int>> gamma;     // (chol/sd param, normal index)
};

}  // namespace

ChoiceDataset generate_dataset(const TruthConfig& cfg) {
  const ModelSpec& spec = cfg.spec;
  const ParamLayout layout = parameter_layout(spec);
  if (static_cast<int>(cfg.true_params.size()) != layout.size())
    throw ArgumentError("true_params does not conform to the parameter layout");

  std::vector<std::string> variables;
  std::unordered_map<std::string, int> var_index;
  auto add_variable = [&](const std::string& v) {
    if (v == kConstant) return -1;
    auto it = var_index.find(v);
    if (it != var_index.end()) return it->second;
    const int idx = static_cast<int>(variables.size());
    variables.push_back(v);
    var_index.emplace(v, idx);
    return idx;
  };

  std::unordered_map<std::string, int> normal_index;
  int n_random = 0;
  for (const auto& t : spec.terms)
    if (t.kind == TermKind::Random) normal_index[t.name] = n_random++;

  std::vector<SynthTerm> plans;
  for (const auto& t : spec.terms) {
    SynthTerm plan;
    plan.variable = add_variable(t.variable);
    plan.alternative = t.alternative;
    plan.param = layout.index_of(t.name);
    if (t.kind == TermKind::Random) {
      for (const auto& s : spec.mean_shifters)
        if (s.term == t.name)
          plan.shifters.emplace_back(layout.index_of(s.term + ":" + s.variable),
                                     add_variable(s.variable));
      if (spec.is_correlated(t.name)) {
        const auto& block = spec.correlated_block;
        const int row = static_cast<int>(
            std::find(block.begin(), block.end(), t.name) - block.begin());
        for (int c = 0; c <= row; ++c)
          plan.gamma.emplace_back(
              layout.index_of("chol:" + block[static_cast<std::size_t>(row)] + ":" +
                              block[static_cast<std::size_t>(c)]),
              normal_index.at(block[static_cast<std::size_t>(c)]));
      } else {
        plan.gamma.emplace_back(layout.index_of("sd:" + t.name), normal_index.at(t.name));
      }
    }
    plans.push_back(std::move(plan));
  }
  for (const auto& s : spec.mean_shifters) add_variable(s.variable);

  ChoiceDataset data;
  data.variable_names = variables;
  data.n_alternatives = spec.n_alternatives();
  data.base_alternative = spec.base_alternative;
  data.chosen.resize(static_cast<std::size_t>(cfg.n_obs));
  data.x.assign(static_cast<std::size_t>(cfg.n_obs) * variables.size(), 0.0);
  data.crash_ids.resize(static_cast<std::size_t>(cfg.n_obs));

  const double* p = cfg.true_params.data();
  std::vector<double> x_row(variables.size());
  std::vector<double> normals(static_cast<std::size_t>(std::max(n_random, 1)));
  std::vector<double> util(static_cast<std::size_t>(spec.n_alternatives()));

  for (int n = 0; n < cfg.n_obs; ++n) {
    SplitMix64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(n)));
    for (std::size_t j = 0; j < variables.size(); ++j) {
      auto it = cfg.covariate_probability.find(variables[j]);
      const double prob = it != cfg.covariate_probability.end() ? it->second
                                                                : cfg.default_probability;
      x_row[j] = rng.uniform() < prob ? 1.0 : 0.0;
    }
    for (int t = 0; t < n_random; ++t)
      normals[static_cast<std::size_t>(t)] = inverse_normal_cdf(rng.uniform());

    std::fill(util.begin(), util.end(), 0.0);
    for (const SynthTerm& plan : plans) {
      double coef = p[plan.param];
      for (const auto& [dp, vi] : plan.shifters)
        coef += p[dp] * x_row[static_cast<std::size_t>(vi)];
      for (const auto& [gp, ni] : plan.gamma)
        coef += p[gp] * normals[static_cast<std::size_t>(ni)];
      const double x = plan.variable < 0 ? 1.0 : x_row[static_cast<std::size_t>(plan.variable)];
      util[static_cast<std::size_t>(plan.alternative)] += coef * x;
    }
    const std::vector<double> probs = mnl_probability(util);

    const double u = rng.uniform();
    double cum = 0.0;
    int chosen = spec.n_alternatives() - 1;
    for (int a = 0; a < spec.n_alternatives(); ++a) {
      cum += probs[static_cast<std::size_t>(a)];
      if (u < cum) {
        chosen = a;
        break;
      }
    }
    data.chosen[static_cast<std::size_t>(n)] = chosen;
    for (std::size_t j = 0; j < variables.size(); ++j)
      data.x[static_cast<std::size_t>(n) * variables.size() + j] = x_row[j];
    data.crash_ids[static_cast<std::size_t>(n)] = std::to_string(n);
  }
  data.check_invariants();
  return data;
}

std::vector<RecoveryRow> recovery_report(const std::vector<double>& truth,
                                         const FitResult& fit) {
  if (truth.size() != fit.estimates.size())
    throw ArgumentError("truth vector does not match the fitted layout");
  std::vector<RecoveryRow> rows;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    RecoveryRow row;
    row.name = fit.layout.names[j];
    row.truth = truth[j];
    row.estimate = fit.estimates[j];
    row.std_error = fit.std_errors[j];
    row.z = row.std_error > 0.0
                ? (row.estimate - row.truth) / row.std_error
                : (row.estimate == row.truth ? 0.0 : std::numeric_limits<double>::infinity());
    row.covered = std::fabs(row.z) < 1.96;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> canonical_cholesky(const std::vector<double>& params,
                                       const ModelSpec& spec) {
  const ParamLayout layout = parameter_layout(spec);
  if (static_cast<int>(params.size()) != layout.size())
    throw ArgumentError("parameter vector does not conform to the parameter layout");
  std::vector<double> out = params;
  for (const auto& t : spec.terms)
    if (t.kind == TermKind::Random && !spec.is_correlated(t.name)) {
      const auto idx = static_cast<std::size_t>(layout.index_of("sd:" + t.name));
      out[idx] = std::fabs(out[idx]);
    }
  const auto& block = spec.correlated_block;
  const int m = static_cast<int>(block.size());
  auto chol_index = [&](int r, int c) {
    return static_cast<std::size_t>(
        layout.index_of("chol:" + block[static_cast<std::size_t>(r)] + ":" +
                        block[static_cast<std::size_t>(c)]));
  };
  for (int c = 0; c < m; ++c)
    if (out[chol_index(c, c)] < 0.0)
      for (int r = c; r < m; ++r) out[chol_index(r, c)] = -out[chol_index(r, c)];
  return out;
}

}  // namespace mixlogit
