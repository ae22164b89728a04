#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mixlogit/dataset.hpp"
#include "mixlogit/model_spec.hpp"

namespace testutil {

// Scratch directory removed when the test finishes.
class TempDir {
 public:
  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      auto candidate = base / ("mixlogit_test_" + std::to_string(::getpid()) + "_" +
                               std::to_string(counter_++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = std::move(candidate);
        return;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline mixlogit::ChoiceDataset make_dataset(std::vector<std::string> names, int n_alternatives,
                                            std::vector<int> chosen, std::vector<double> x) {
  mixlogit::ChoiceDataset data;
  data.variable_names = std::move(names);
  data.n_alternatives = n_alternatives;
  data.chosen = std::move(chosen);
  data.x = std::move(x);
  data.crash_ids.resize(data.chosen.size());
  for (std::size_t i = 0; i < data.chosen.size(); ++i) data.crash_ids[i] = std::to_string(i);
  data.check_invariants();
  return data;
}

struct TermDef {
  std::string name;
  std::string variable;
  int alternative = 1;
  bool random = false;
};

inline mixlogit::ModelSpec make_spec(
    const std::vector<TermDef>& terms,
    const std::vector<std::pair<std::string, std::string>>& shifters = {},
    const std::vector<std::string>& block = {}, int n_draws = 200, std::uint64_t seed = 7) {
  mixlogit::ModelSpec spec;
  spec.name = "test";
  spec.alternatives = {"minor", "serious", "fatal"};
  spec.base_alternative = 0;
  for (const auto& t : terms) {
    mixlogit::UtilityTerm term;
    term.name = t.name;
    term.variable = t.variable;
    term.alternative = t.alternative;
    term.kind = t.random ? mixlogit::TermKind::Random : mixlogit::TermKind::Fixed;
    spec.terms.push_back(std::move(term));
  }
  for (const auto& [term, variable] : shifters) spec.mean_shifters.push_back({term, variable});
  spec.correlated_block = block;
  spec.draws.n_draws = n_draws;
  spec.draws.seed = seed;
  return spec;
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

// Runs the installed command-line binary and captures its combined output.
inline CliResult run_cli(const std::string& args, const std::string& capture_path) {
  const std::string cmd = std::string(CLI_BIN) + " " + args + " > " + capture_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.output = read_file(capture_path);
  return result;
}

}  // namespace testutil
