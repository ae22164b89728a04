#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mixlogit/model_spec.hpp"

namespace mixlogit {

// Elements skip+1 .. skip+count of the radical-inverse sequence in the base.
std::vector<double> halton_sequence(int base, int count, int skip);

double inverse_normal_cdf(double p);
double normal_cdf(double z);

struct DrawTensor {
  std::vector<double> values;  // [observation][draw][random term]
  int n_obs = 0;
  int n_draws = 0;
  int n_terms = 0;
  std::uint64_t seed = 0;
  std::vector<int> primes;

  double at(int obs, int draw, int term) const {
    return values[(static_cast<std::size_t>(obs) * n_draws + draw) * n_terms + term];
  }
  const double* row(int obs, int draw) const {
    return values.data() + (static_cast<std::size_t>(obs) * n_draws + draw) * n_terms;
  }
};

DrawTensor make_draws(int n_obs, int n_random_terms, const DrawSettings& settings);
DrawTensor make_draws(int n_obs, const ModelSpec& spec, int n_draws, std::uint64_t seed);

}  // namespace mixlogit
