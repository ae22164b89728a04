#include "mixlogit/draws.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "mixlogit/errors.hpp"
#include "mixlogit/rng.hpp"

namespace mixlogit {

namespace {

constexpr std::array<int, 64> kPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,
    59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

double radical_inverse(int base, long long index) {
  double fraction = 1.0, value = 0.0;
  while (index > 0) {
    fraction /= base;
    value += fraction * static_cast<double>(index % base);
    index /= base;
  }
  return value;
}

}  // namespace

std::vector<double> halton_sequence(int base, int count, int skip) {
  if (!is_prime(base)) throw ArgumentError("Halton base must be prime, got " + std::to_string(base));
  if (count < 1) throw ArgumentError("Halton count must be at least 1");
  if (skip < 0) throw ArgumentError("Halton skip must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] = radical_inverse(base, static_cast<long long>(skip) + 1 + i);
  return out;
}

// Wichura's PPND16 rational approximations; abs error below 1e-15 over (0,1).
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ArgumentError("inverse_normal_cdf needs p in (0,1), got " + std::to_string(p));
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) *
                    r +
                4.5921953931549871457e4) *
                   r +
               1.3731693765509461125e4) *
                  r +
              1.9715909503065514427e3) *
                 r +
             1.3314166789178437745e2) *
                r +
            3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) *
                    r +
                2.1213794301586595867e4) *
                   r +
               5.3941960214247511077e3) *
                  r +
              6.8718700749205790830e2) *
                 r +
             4.2313330701600911252e1) *
                r +
            1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) *
                     r +
                 1.27045825245236838258e0) *
                    r +
                3.64784832476320460504e0) *
                   r +
               5.76949722146069140550e0) *
                  r +
              4.63033784615654529590e0) *
                 r +
             1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) *
                     r +
                 1.48103976427480074590e-1) *
                    r +
                6.89767334985100004550e-1) *
                   r +
               1.67638483018380384940e0) *
                  r +
              2.05319162663775882187e0) *
                 r +
             1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) *
                     r +
                 2.65321895265761230930e-2) *
                    r +
                2.96560571828504891230e-1) *
                   r +
               1.78482653991729133580e0) *
                  r +
              5.46378491116411436990e0) *
                 r +
             6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) *
                     r +
                 7.86869131145613259100e-4) *
                    r +
                1.48753612908506148525e-2) *
                   r +
               1.36929880922735805310e-1) *
                  r +
              5.99832206555887937690e-1) *
                 r +
             1.0);
  }
  return q < 0.0 ? -value : value;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

DrawTensor make_draws(int n_obs, int n_random_terms, const DrawSettings& settings) {
  if (n_obs < 1) throw ArgumentError("make_draws needs at least one observation");
  if (n_random_terms < 0) throw ArgumentError("negative random-term count");
  if (n_random_terms > static_cast<int>(kPrimes.size()))
    throw CapacityError("at most " + std::to_string(kPrimes.size()) +
                        " random terms supported, got " + std::to_string(n_random_terms));

  DrawTensor tensor;
  tensor.n_obs = n_obs;
  tensor.n_draws = settings.n_draws;
  tensor.n_terms = n_random_terms;
  tensor.seed = settings.seed;
  tensor.values.assign(static_cast<std::size_t>(n_obs) * settings.n_draws *
                           std::max(n_random_terms, 1),
                       0.0);
  if (n_random_terms == 0) {
    tensor.values.clear();
    return tensor;
  }

  std::vector<double> slice(static_cast<std::size_t>(settings.n_draws));
  for (int t = 0; t < n_random_terms; ++t) {
    const int base = kPrimes[static_cast<std::size_t>(t)];
    tensor.primes.push_back(base);
    const std::vector<double> seq =
        halton_sequence(base, n_obs * settings.n_draws, settings.skip);
    for (int n = 0; n < n_obs; ++n) {
      const double* src = seq.data() + static_cast<std::size_t>(n) * settings.n_draws;
      std::copy(src, src + settings.n_draws, slice.begin());
      if (settings.shuffle) {
        SplitMix64 rng(mix_seed(mix_seed(settings.seed, static_cast<std::uint64_t>(n)),
                                static_cast<std::uint64_t>(t)));
        for (int i = settings.n_draws - 1; i > 0; --i) {
          const auto j = rng.below(static_cast<std::uint64_t>(i) + 1);
          std::swap(slice[static_cast<std::size_t>(i)], slice[j]);
        }
      }
      for (int r = 0; r < settings.n_draws; ++r)
        tensor.values[(static_cast<std::size_t>(n) * settings.n_draws + r) * n_random_terms +
                      t] = inverse_normal_cdf(slice[static_cast<std::size_t>(r)]);
    }
  }
  return tensor;
}

DrawTensor make_draws(int n_obs, const ModelSpec& spec, int n_draws, std::uint64_t seed) {
  DrawSettings settings = spec.draws;
  settings.n_draws = n_draws;
  settings.seed = seed;
  const int n_random = static_cast<int>(spec.random_term_names().size());
  return make_draws(n_obs, n_random, settings);
}

}  // namespace mixlogit
