#include "mixlogit/report.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "mixlogit/errors.hpp"
#include "mixlogit/version.hpp"

namespace mixlogit {

namespace {

template <typename... Args>
std::string strf(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

const char* criterion_name(ConvergedBy by) {
  switch (by) {
    case ConvergedBy::Gradient: return "gradient";
    case ConvergedBy::FunctionChange: return "function_change";
    default: return "none";
  }
}

ConvergedBy criterion_from(const std::string& name) {
  if (name == "gradient") return ConvergedBy::Gradient;
  if (name == "function_change") return ConvergedBy::FunctionChange;
  return ConvergedBy::None;
}

}  // namespace

std::string fnv1a_hex(const std::string& payload) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return strf("%016llx", static_cast<unsigned long long>(h));
}

std::string iso_timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest make_manifest(const std::string& command, const std::vector<std::string>& inputs,
                          const nlohmann::json& spec_json, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.inputs = inputs;
  m.spec_hash = fnv1a_hex(spec_json.dump());
  m.seed = seed;
  m.version = kVersion;
  m.created = iso_timestamp_utc();
  return m;
}

nlohmann::json spec_to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["alternatives"] = spec.alternatives;
  j["base_alternative"] = spec.base_alternative;
  j["terms"] = nlohmann::json::array();
  for (const auto& t : spec.terms)
    j["terms"].push_back({{"name", t.name},
                          {"variable", t.variable},
                          {"alternative", t.alternative},
                          {"kind", t.kind == TermKind::Random ? "random" : "fixed"}});
  j["mean_shifters"] = nlohmann::json::array();
  for (const auto& s : spec.mean_shifters)
    j["mean_shifters"].push_back({{"term", s.term}, {"variable", s.variable}});
  j["correlated_block"] = spec.correlated_block;
  j["draws"] = {{"n_draws", spec.draws.n_draws},
                {"seed", spec.draws.seed},
                {"skip", spec.draws.skip},
                {"shuffle", spec.draws.shuffle}};
  j["optimizer"] = {{"tol_g", spec.optimizer.tol_g},
                    {"tol_f", spec.optimizer.tol_f},
                    {"max_iterations", spec.optimizer.max_iterations},
                    {"max_backtracks", spec.optimizer.max_backtracks},
                    {"box_bound", spec.optimizer.box_bound}};
  if (spec.optimizer.start) j["optimizer"]["start"] = *spec.optimizer.start;
  return j;
}

nlohmann::json manifest_to_json(const RunManifest& manifest) {
  return {{"command", manifest.command}, {"inputs", manifest.inputs},
          {"spec_hash", manifest.spec_hash}, {"seed", manifest.seed},
          {"version", manifest.version},   {"created", manifest.created}};
}

nlohmann::json effects_to_json(const EffectsReport& effects,
                               const std::vector<std::string>& alternative_labels) {
  nlohmann::json j;
  j["marginal"]["variables"] = effects.variables;
  j["marginal"]["alternatives"] = alternative_labels;
  auto& rows = j["marginal"]["values"];
  rows = nlohmann::json::array();
  for (std::size_t v = 0; v < effects.variables.size(); ++v) {
    nlohmann::json row = nlohmann::json::array();
    for (int a = 0; a < effects.n_alternatives; ++a)
      row.push_back(effects.effect(static_cast<int>(v), a));
    rows.push_back(std::move(row));
  }
  j["random_params"] = nlohmann::json::array();
  for (const auto& r : effects.random_params)
    j["random_params"].push_back({{"term", r.term},
                                  {"mean", r.mean},
                                  {"sd", r.sd},
                                  {"share_above_zero", r.share_above_zero},
                                  {"share_below_zero", r.share_below_zero}});
  if (!effects.block_terms.empty()) {
    const int m = effects.block.m;
    auto matrix = [&](const std::vector<double>& flat) {
      nlohmann::json rows_out = nlohmann::json::array();
      for (int r = 0; r < m; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < m; ++c) row.push_back(flat[static_cast<std::size_t>(r) * m + c]);
        rows_out.push_back(std::move(row));
      }
      return rows_out;
    };
    j["correlated_block"] = {{"terms", effects.block_terms},
                             {"covariance", matrix(effects.block.covariance)},
                             {"sd", effects.block.sd},
                             {"correlation", matrix(effects.block.correlation)}};
  }
  return j;
}

nlohmann::json fit_to_json(const FitResult& fit, const EffectsReport* effects,
                           const RunManifest& manifest) {
  nlohmann::json j;
  j["manifest"] = manifest_to_json(manifest);
  j["spec"] = spec_to_json(fit.spec);
  j["estimates"] = {{"names", fit.layout.names}, {"values", fit.estimates}};
  j["inference"] = {
      {"std_errors", fit.std_errors},
      {"t_stats", fit.t_stats},
      {"estimator", fit.se_estimator == SeEstimator::Bhhh ? "bhhh" : "hessian"},
      {"converged", fit.converged},
      {"criterion", criterion_name(fit.criterion)},
      {"iterations", fit.iterations},
      {"non_identified", fit.non_identified},
      {"at_bound", fit.at_bound}};
  j["gof"] = {{"ll_zero", fit.ll_zero},
              {"ll_convergence", fit.ll_convergence},
              {"n_obs", fit.n_obs},
              {"n_params", fit.n_params},
              {"aic", aic(fit.n_params, fit.ll_convergence)},
              {"pseudo_r2", pseudo_r2(fit.ll_zero, fit.ll_convergence)}};
  j["draws"] = {{"n_draws", fit.n_draws},
                {"seed", fit.seed},
                {"primes", fit.primes},
                {"threads", fit.n_threads}};
  if (effects) j["effects"] = effects_to_json(*effects, fit.spec.alternatives);
  return j;
}

FitResult fit_result_from_json(const nlohmann::json& report) {
  for (const char* section : {"spec", "estimates", "inference", "gof"})
    if (!report.contains(section))
      throw SchemaError(std::string("fit report is missing the ") + section + " section");
  FitResult fit;
  fit.spec = parse_model_spec(report.at("spec"));
  fit.layout = parameter_layout(fit.spec);
  fit.estimates = report.at("estimates").at("values").get<std::vector<double>>();
  if (static_cast<int>(fit.estimates.size()) != fit.layout.size())
    throw SchemaError("estimate vector does not match the parameter layout");
  const auto& inf = report.at("inference");
  fit.std_errors = inf.value("std_errors", std::vector<double>{});
  fit.t_stats = inf.value("t_stats", std::vector<double>{});
  fit.se_estimator = inf.value("estimator", "hessian") == std::string("bhhh")
                         ? SeEstimator::Bhhh
                         : SeEstimator::Hessian;
  fit.converged = inf.value("converged", false);
  fit.criterion = criterion_from(inf.value("criterion", "none"));
  fit.iterations = inf.value("iterations", 0);
  fit.non_identified = inf.value("non_identified", false);
  fit.at_bound = inf.value("at_bound", std::vector<std::string>{});
  const auto& gof = report.at("gof");
  fit.ll_zero = gof.at("ll_zero").get<double>();
  fit.ll_convergence = gof.at("ll_convergence").get<double>();
  fit.n_obs = gof.at("n_obs").get<int>();
  fit.n_params = gof.at("n_params").get<int>();
  if (report.contains("draws")) {
    const auto& d = report.at("draws");
    fit.n_draws = d.value("n_draws", 0);
    fit.seed = d.value("seed", std::uint64_t{0});
    fit.primes = d.value("primes", std::vector<int>{});
    fit.n_threads = d.value("threads", 1);
  }
  return fit;
}

FitResult load_fit_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open report file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("invalid report JSON in " + path + ": " + e.what());
  }
  return fit_result_from_json(j);
}

namespace {

std::string param_display_name(const FitResult& fit, int index) {
  const std::string& name = fit.layout.names[static_cast<std::size_t>(index)];
  if (index < fit.layout.offset_shifters()) {
    const UtilityTerm* t = fit.spec.find_term(name);
    if (t) return fit.spec.alternatives[static_cast<std::size_t>(t->alternative)] + ": " + name;
  }
  return name;
}

}  // namespace

std::string render_fit_text(const FitResult& fit, const EffectsReport* effects) {
  std::ostringstream out;
  out << "model " << fit.spec.name << "\n";
  out << "status: " << (fit.converged ? "converged" : "not converged") << " ("
      << criterion_name(fit.criterion) << ") after " << fit.iterations << " iterations\n";
  if (fit.non_identified) {
    out << "warning: parameters pinned at the box bound:";
    for (const auto& n : fit.at_bound) out << " " << n;
    out << "\n";
  }
  out << strf("observations %d   parameters %d   draws %d   seed %llu\n", fit.n_obs,
              fit.n_params, fit.n_draws, static_cast<unsigned long long>(fit.seed));
  out << strf("log-likelihood at zero        %12.4f\n", fit.ll_zero);
  out << strf("log-likelihood at convergence %12.4f\n", fit.ll_convergence);
  out << strf("AIC %.4f   pseudo R-squared %.4f\n", aic(fit.n_params, fit.ll_convergence),
              pseudo_r2(fit.ll_zero, fit.ll_convergence));
  out << strf("standard errors: %s\n", fit.se_estimator == SeEstimator::Bhhh ? "BHHH" : "Hessian");

  auto block = [&](const char* title, int begin, int end) {
    if (begin >= end) return;
    out << "\n" << title << "\n";
    out << strf("  %-40s %10s %9s\n", "name", "coeff.", "t-stat");
    for (int j = begin; j < end; ++j) {
      const double t = fit.t_stats[static_cast<std::size_t>(j)];
      out << strf("  %-40s %10.4f %9.2f%s\n", param_display_name(fit, j).c_str(),
                  fit.estimates[static_cast<std::size_t>(j)], t,
                  std::fabs(t) >= 1.645 ? " *" : "");
    }
  };
  block("coefficients", 0, fit.layout.offset_shifters());
  block("heterogeneity in means", fit.layout.offset_shifters(), fit.layout.offset_uncorrelated());
  block("standard deviations of random parameters", fit.layout.offset_uncorrelated(),
        fit.layout.offset_cholesky());
  block("cholesky factor (lower triangular)", fit.layout.offset_cholesky(), fit.layout.size());

  if (effects) {
    if (!effects->random_params.empty()) {
      out << "\ndistributional effect of the random parameters (%)\n";
      out << strf("  %-40s %9s %9s\n", "term", "above 0", "below 0");
      for (const auto& r : effects->random_params)
        out << strf("  %-40s %9.2f %9.2f\n", r.term.c_str(), 100.0 * r.share_above_zero,
                    100.0 * r.share_below_zero);
    }
    if (!effects->block_terms.empty()) {
      const int m = effects->block.m;
      out << "\ncorrelation of random parameters\n";
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < r; ++c)
          out << strf("  %s x %s: correlation %.3f, covariance %.3f\n",
                      effects->block_terms[static_cast<std::size_t>(r)].c_str(),
                      effects->block_terms[static_cast<std::size_t>(c)].c_str(),
                      effects->block.correlation[static_cast<std::size_t>(r) * m + c],
                      effects->block.covariance[static_cast<std::size_t>(r) * m + c]);
      out << "  standard deviations:";
      for (int r = 0; r < m; ++r)
        out << strf(" %s=%.3f", effects->block_terms[static_cast<std::size_t>(r)].c_str(),
                    effects->block.sd[static_cast<std::size_t>(r)]);
      out << "\n";
    }
    if (!effects->variables.empty()) {
      out << "\nmarginal effects\n";
      out << strf("  %-40s", "variable");
      for (const auto& alt : fit.spec.alternatives) out << strf(" %9s", alt.c_str());
      out << "\n";
      for (std::size_t v = 0; v < effects->variables.size(); ++v) {
        out << strf("  %-40s", effects->variables[v].c_str());
        for (int a = 0; a < effects->n_alternatives; ++a)
          out << strf(" %9.4f", effects->effect(static_cast<int>(v), a));
        out << "\n";
      }
    }
  }
  return out.str();
}

std::string render_gof_text(const std::vector<FitResult>& fits,
                            const std::vector<TestResult>& lr_tests,
                            const std::vector<std::pair<int, int>>& lr_pairs,
                            const std::vector<std::string>& warnings) {
  std::ostringstream out;
  out << "goodness of fit\n";
  auto row = [&](const char* label, auto getter) {
    out << strf("  %-30s", label);
    for (const auto& f : fits) out << getter(f);
    out << "\n";
  };
  row("model", [&](const FitResult& f) { return strf(" %12s", f.spec.name.c_str()); });
  row("observations", [&](const FitResult& f) { return strf(" %12d", f.n_obs); });
  row("parameters", [&](const FitResult& f) { return strf(" %12d", f.n_params); });
  row("log-likelihood at zero",
      [&](const FitResult& f) { return strf(" %12.4f", f.ll_zero); });
  row("log-likelihood at convergence",
      [&](const FitResult& f) { return strf(" %12.4f", f.ll_convergence); });
  row("AIC", [&](const FitResult& f) {
    return strf(" %12.4f", aic(f.n_params, f.ll_convergence));
  });
  row("pseudo R-squared", [&](const FitResult& f) {
    return strf(" %12.4f", pseudo_r2(f.ll_zero, f.ll_convergence));
  });
  if (!lr_tests.empty()) out << "likelihood ratio tests\n";
  for (std::size_t i = 0; i < lr_tests.size(); ++i) {
    const auto& t = lr_tests[i];
    const auto& [restricted, full] = lr_pairs[i];
    out << strf("  %s vs %s: statistic %.4f, df %d, p-value %.4f, confidence %.2f%%%s\n",
                fits[static_cast<std::size_t>(full)].spec.name.c_str(),
                fits[static_cast<std::size_t>(restricted)].spec.name.c_str(), t.statistic,
                t.df, t.p_value, 100.0 * t.confidence,
                t.negative_statistic ? "  [warning: negative statistic]" : "");
  }
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  return out.str();
}

std::string render_transfer_text(const FitResult& pooled, const FitResult& group1,
                                 const FitResult& group2, const TestResult& test) {
  std::ostringstream out;
  out << "transferability test\n";
  out << strf("  pooled   %-12s ll %12.4f  (n=%d)\n", pooled.spec.name.c_str(),
              pooled.ll_convergence, pooled.n_obs);
  out << strf("  group 1  %-12s ll %12.4f  (n=%d)\n", group1.spec.name.c_str(),
              group1.ll_convergence, group1.n_obs);
  out << strf("  group 2  %-12s ll %12.4f  (n=%d)\n", group2.spec.name.c_str(),
              group2.ll_convergence, group2.n_obs);
  const std::string confidence =
      test.confidence > 0.9999 ? std::string("> 99.99%") : strf("%.2f%%", 100.0 * test.confidence);
  out << strf("  statistic %.4f   df %d   p-value %.6f   confidence %s\n", test.statistic,
              test.df, test.p_value, confidence.c_str());
  if (test.negative_statistic)
    out << "  warning: negative statistic (optimizer noise); treated as 0\n";
  out << "  verdict: "
      << (test.p_value < 0.05
              ? "reject pooling; the groups warrant separate models"
              : "no significant difference between the groups; pooling is acceptable")
      << "\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

void write_json_file(const std::string& path, const nlohmann::json& payload) {
  write_text_file(path, payload.dump(2) + "\n");
}

}  // namespace mixlogit
