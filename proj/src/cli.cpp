#include "mixlogit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixlogit/compare.hpp"
#include "mixlogit/dataset.hpp"
#include "mixlogit/errors.hpp"
#include "mixlogit/fit.hpp"
#include "mixlogit/post.hpp"
#include "mixlogit/report.hpp"
#include "mixlogit/synth.hpp"

namespace mixlogit {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoConvergence = 2;

CodingSchema schema_for(const std::string& schema_path, const std::string& data_path) {
  if (!schema_path.empty()) return CodingSchema::from_file(schema_path);
  CodingSchema defaults;
  std::vector<std::string> columns;
  for (const auto& col : csv_header(data_path))
    if (col != defaults.severity_column && col != defaults.crash_id_column &&
        col != defaults.occupant_id_column)
      columns.push_back(col);
  return CodingSchema::binary_passthrough(columns);
}

ChoiceDataset load_or_fail(const std::string& data_path, const std::string& schema_path) {
  const LoadResult loaded = load_dataset(data_path, schema_for(schema_path, data_path));
  if (loaded.report.dropped > 0)
    std::cerr << "note: dropped " << loaded.report.dropped
              << " records with sentinel values, kept " << loaded.report.kept << "\n";
  return loaded.dataset;
}

int significant_count(const FitResult& fit) {
  int n = 0;
  for (double t : fit.t_stats)
    if (std::isfinite(t) && std::fabs(t) >= 1.645) ++n;
  return n;
}

nlohmann::json model_summary_json(const FitResult& fit) {
  return {{"name", fit.spec.name},
          {"n_obs", fit.n_obs},
          {"n_params", fit.n_params},
          {"ll_zero", fit.ll_zero},
          {"ll_convergence", fit.ll_convergence},
          {"aic", aic(fit.n_params, fit.ll_convergence)},
          {"pseudo_r2", pseudo_r2(fit.ll_zero, fit.ll_convergence)},
          {"converged", fit.converged}};
}

nlohmann::json test_json(const TestResult& t) {
  return {{"statistic", t.statistic},
          {"df", t.df},
          {"p_value", t.p_value},
          {"confidence", t.confidence},
          {"negative_statistic", t.negative_statistic}};
}

int run_fit(const std::string& data_path, const std::string& spec_path,
            const std::string& out_path, const std::string& schema_path,
            std::optional<std::uint64_t> seed, std::optional<int> n_draws, int threads) {
  ModelSpec spec = parse_model_spec_file(spec_path);
  if (seed) spec.draws.seed = *seed;
  if (n_draws) {
    if (*n_draws < 1) throw ArgumentError("--draws must be at least 1");
    spec.draws.n_draws = *n_draws;
  }
  const ChoiceDataset data = load_or_fail(data_path, schema_path);

  const ValidationReport validation = validate_spec(spec, data);
  for (const auto& w : validation.warnings()) std::cerr << "warning: " << w << "\n";
  if (!validation.ok()) {
    for (const auto& e : validation.errors()) std::cerr << "error: " << e << "\n";
    return kExitInput;
  }

  const FitResult fit = maximize(spec, data, threads);
  const EffectsReport effects = effects_report(fit, data, threads);
  const RunManifest manifest =
      make_manifest("fit", {data_path, spec_path}, spec_to_json(spec), spec.draws.seed);
  write_json_file(out_path, fit_to_json(fit, &effects, manifest));
  std::cout << render_fit_text(fit, &effects);
  return fit.converged ? kExitOk : kExitNoConvergence;
}

std::vector<int> parse_df_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

int run_compare(const std::vector<std::string>& report_paths, const std::string& df_text,
                const std::string& out_path) {
  std::vector<FitResult> fits;
  for (const auto& p : report_paths) fits.push_back(load_fit_report(p));
  const std::vector<int> df_overrides = df_text.empty() ? std::vector<int>{}
                                                        : parse_df_list(df_text);

  std::vector<TestResult> tests;
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i + 1 < fits.size(); ++i) {
    const FitResult& restricted = fits[i];
    const FitResult& full = fits[i + 1];
    if (restricted.n_obs != full.n_obs) {
      warnings.push_back("models '" + restricted.spec.name + "' and '" + full.spec.name +
                         "' were fitted on different observation counts; LR test skipped, "
                         "AIC comparison is still shown");
      continue;
    }
    int df = i < df_overrides.size() ? df_overrides[i] : full.n_params - restricted.n_params;
    if (df < 1) {
      warnings.push_back("no positive degrees of freedom between '" + restricted.spec.name +
                         "' and '" + full.spec.name + "'; pass --df to override");
      continue;
    }
    tests.push_back(lr_test(restricted.ll_convergence, full.ll_convergence, df));
    pairs.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  }

  std::cout << render_gof_text(fits, tests, pairs, warnings);
  if (!out_path.empty()) {
    const RunManifest manifest =
        make_manifest("compare", report_paths, spec_to_json(fits.front().spec), 0);
    nlohmann::json j;
    j["manifest"] = manifest_to_json(manifest);
    j["models"] = nlohmann::json::array();
    for (const auto& f : fits) j["models"].push_back(model_summary_json(f));
    j["lr_tests"] = nlohmann::json::array();
    for (std::size_t i = 0; i < tests.size(); ++i) {
      nlohmann::json t = test_json(tests[i]);
      t["restricted"] = fits[static_cast<std::size_t>(pairs[i].first)].spec.name;
      t["full"] = fits[static_cast<std::size_t>(pairs[i].second)].spec.name;
      j["lr_tests"].push_back(std::move(t));
    }
    j["warnings"] = warnings;
    write_json_file(out_path, j);
  }
  return kExitOk;
}

int run_transfer(const std::string& pooled_path, const std::string& g1_path,
                 const std::string& g2_path, std::optional<int> df_override,
                 const std::string& out_path) {
  const FitResult pooled = load_fit_report(pooled_path);
  const FitResult g1 = load_fit_report(g1_path);
  const FitResult g2 = load_fit_report(g2_path);

  int df;
  if (df_override) {
    df = *df_override;
  } else {
    df = significant_count(g1) + significant_count(g2) - significant_count(pooled);
    std::cerr << "note: df " << df << " from significant-parameter counts (|t| >= 1.645); "
              << "override with --df\n";
  }
  if (df < 1)
    throw ArgumentError("transferability test needs df >= 1, computed " + std::to_string(df));

  const TestResult test =
      transferability_test(pooled.ll_convergence, g1.ll_convergence, g2.ll_convergence, df);
  std::cout << render_transfer_text(pooled, g1, g2, test);
  if (!out_path.empty()) {
    const RunManifest manifest = make_manifest("transfer", {pooled_path, g1_path, g2_path},
                                               spec_to_json(pooled.spec), 0);
    nlohmann::json j;
    j["manifest"] = manifest_to_json(manifest);
    j["pooled"] = model_summary_json(pooled);
    j["groups"] = {model_summary_json(g1), model_summary_json(g2)};
    j["test"] = test_json(test);
    j["verdict"] = test.p_value < 0.05 ? "separate" : "poolable";
    write_json_file(out_path, j);
  }
  return kExitOk;
}

int run_simulate(const std::string& truth_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed) {
  TruthConfig cfg = parse_truth_config_file(truth_path);
  if (seed) cfg.seed = *seed;
  if (cfg.spec.n_alternatives() != 3)
    throw SpecError("dataset files carry three severity levels; the model declares " +
                    std::to_string(cfg.spec.n_alternatives()) + " alternatives");
  const ChoiceDataset data = generate_dataset(cfg);

  static const char* kSeverity[] = {"minor", "serious", "fatal"};
  std::ostringstream csv;
  csv << "crash_id,occupant_id,severity";
  for (const auto& v : data.variable_names) csv << "," << v;
  csv << "\n";
  for (int n = 0; n < data.n_obs(); ++n) {
    csv << data.crash_ids[static_cast<std::size_t>(n)] << "," << n << ","
        << kSeverity[data.chosen[static_cast<std::size_t>(n)]];
    for (int v = 0; v < data.n_vars(); ++v)
      csv << "," << static_cast<int>(data.value(n, v));
    csv << "\n";
  }
  write_text_file(out_path, csv.str());

  const ParamLayout layout = parameter_layout(cfg.spec);
  nlohmann::json truth;
  const RunManifest manifest =
      make_manifest("simulate", {truth_path}, spec_to_json(cfg.spec), cfg.seed);
  truth["manifest"] = manifest_to_json(manifest);
  truth["spec"] = spec_to_json(cfg.spec);
  truth["seed"] = cfg.seed;
  truth["n_obs"] = cfg.n_obs;
  nlohmann::json params = nlohmann::json::object();
  for (int j = 0; j < layout.size(); ++j)
    params[layout.names[static_cast<std::size_t>(j)]] =
        cfg.true_params[static_cast<std::size_t>(j)];
  truth["true_params"] = std::move(params);
  write_json_file(out_path + ".truth.json", truth);
  std::cout << "wrote " << data.n_obs() << " observations to " << out_path << "\n";
  return kExitOk;
}

int run_effects(const std::string& report_path, const std::string& data_path,
                const std::string& variable, const std::string& schema_path,
                const std::string& out_path, int threads) {
  const FitResult fit = load_fit_report(report_path);
  const ChoiceDataset data = load_or_fail(data_path, schema_path);
  const std::vector<double> effect = marginal_effect(fit, data, variable, threads);

  std::cout << "marginal effect of " << variable << "\n";
  for (std::size_t a = 0; a < effect.size(); ++a) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-20s %9.4f\n", fit.spec.alternatives[a].c_str(),
                  effect[a]);
    std::cout << line;
  }
  if (!out_path.empty()) {
    const RunManifest manifest =
        make_manifest("effects", {report_path, data_path}, spec_to_json(fit.spec), fit.seed);
    nlohmann::json j;
    j["manifest"] = manifest_to_json(manifest);
    j["variable"] = variable;
    j["alternatives"] = fit.spec.alternatives;
    j["effects"] = effect;
    write_json_file(out_path, j);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"correlated random parameter logit estimation toolkit"};
  app.require_subcommand(1);

  std::string data_path, spec_path, out_path, schema_path, df_text, truth_path;
  std::string report_path, variable;
  std::vector<std::string> report_paths;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_draws, df_override;
  int threads = 1;

  auto* fit_cmd = app.add_subcommand("fit", "estimate a model by maximum simulated likelihood");
  fit_cmd->add_option("--data", data_path, "dataset CSV")->required();
  fit_cmd->add_option("--spec", spec_path, "model spec JSON")->required();
  fit_cmd->add_option("--out", out_path, "output report JSON")->required();
  fit_cmd->add_option("--schema", schema_path, "coding schema JSON (default: 0/1 passthrough)");
  fit_cmd->add_option("--seed", seed, "override the configured draw seed");
  fit_cmd->add_option("--draws", n_draws, "override the configured draw count");
  fit_cmd->add_option("--threads", threads, "worker threads (results do not depend on this)");

  auto* compare_cmd = app.add_subcommand("compare", "goodness-of-fit table and LR tests");
  compare_cmd->add_option("reports", report_paths, "fit report JSON files, restricted first")
      ->required()
      ->expected(2, -1);
  compare_cmd->add_option("--df", df_text, "comma-separated df overrides per adjacent pair");
  compare_cmd->add_option("--out", out_path, "optional structured output JSON");

  auto* transfer_cmd = app.add_subcommand("transfer", "two-group transferability test");
  transfer_cmd->add_option("pooled", report_path, "pooled-fit report")->required();
  std::string g1_path, g2_path;
  transfer_cmd->add_option("group1", g1_path, "first group report")->required();
  transfer_cmd->add_option("group2", g2_path, "second group report")->required();
  transfer_cmd->add_option("--df", df_override, "degrees of freedom");
  transfer_cmd->add_option("--out", out_path, "optional structured output JSON");

  auto* simulate_cmd = app.add_subcommand("simulate", "generate a dataset from known truth");
  simulate_cmd->add_option("--truth", truth_path, "truth config JSON")->required();
  simulate_cmd->add_option("--out", out_path, "output dataset CSV")->required();
  simulate_cmd->add_option("--seed", seed, "override the truth config seed");

  auto* effects_cmd = app.add_subcommand("effects", "marginal effect of one dummy variable");
  effects_cmd->add_option("--report", report_path, "fit report JSON")->required();
  effects_cmd->add_option("--data", data_path, "dataset CSV")->required();
  effects_cmd->add_option("--variable", variable, "dummy variable name")->required();
  effects_cmd->add_option("--schema", schema_path, "coding schema JSON");
  effects_cmd->add_option("--out", out_path, "optional structured output JSON");
  effects_cmd->add_option("--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (fit_cmd->parsed())
      return run_fit(data_path, spec_path, out_path, schema_path, seed, n_draws, threads);
    if (compare_cmd->parsed()) return run_compare(report_paths, df_text, out_path);
    if (transfer_cmd->parsed())
      return run_transfer(report_path, g1_path, g2_path, df_override, out_path);
    if (simulate_cmd->parsed()) return run_simulate(truth_path, out_path, seed);
    if (effects_cmd->parsed())
      return run_effects(report_path, data_path, variable, schema_path, out_path, threads);
  } catch (const OptimizerStallError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "best log-likelihood reached: " << e.best_loglik << "\n";
    return kExitNoConvergence;
  } catch (const InitializationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const InferenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace mixlogit
