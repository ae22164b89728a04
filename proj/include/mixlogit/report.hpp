#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixlogit/compare.hpp"
#include "mixlogit/fit.hpp"
#include "mixlogit/post.hpp"

namespace mixlogit {

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::string spec_hash;
  std::uint64_t seed = 0;
  std::string version;
  std::string created;  // UTC timestamp; the only non-reproducible field
};

std::string fnv1a_hex(const std::string& payload);
std::string iso_timestamp_utc();
RunManifest make_manifest(const std::string& command, const std::vector<std::string>& inputs,
                          const nlohmann::json& spec_json, std::uint64_t seed);

nlohmann::json spec_to_json(const ModelSpec& spec);
nlohmann::json manifest_to_json(const RunManifest& manifest);
nlohmann::json effects_to_json(const EffectsReport& effects,
                               const std::vector<std::string>& alternative_labels);
nlohmann::json fit_to_json(const FitResult& fit, const EffectsReport* effects,
                           const RunManifest& manifest);

FitResult fit_result_from_json(const nlohmann::json& report);
FitResult load_fit_report(const std::string& path);

std::string render_fit_text(const FitResult& fit, const EffectsReport* effects);
std::string render_gof_text(const std::vector<FitResult>& fits,
                            const std::vector<TestResult>& lr_tests,
                            const std::vector<std::pair<int, int>>& lr_pairs,
                            const std::vector<std::string>& warnings);
std::string render_transfer_text(const FitResult& pooled, const FitResult& group1,
                                 const FitResult& group2, const TestResult& test);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& payload);

}  // namespace mixlogit
