#include "mixlogit/compare.hpp"

#include <algorithm>
#include <cmath>

#include "mixlogit/errors.hpp"

namespace mixlogit {

namespace {

// Regularized lower incomplete gamma P(a,x) by power series; valid for x < a+1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by modified Lentz continued
// fraction; valid for x >= a+1.
double gamma_q_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double aic(int n_params, double ll) {
  if (n_params < 0) throw ArgumentError("aic needs a nonnegative parameter count");
  return 2.0 * n_params - 2.0 * ll;
}

double pseudo_r2(double ll_zero, double ll_convergence) {
  if (ll_zero >= 0.0) throw ArgumentError("pseudo_r2 needs a negative null log-likelihood");
  return 1.0 - ll_convergence / ll_zero;
}

double chi2_survival(double x, int df) {
  if (df < 1) throw ArgumentError("chi2_survival needs df >= 1");
  if (x < 0.0) throw ArgumentError("chi2_survival needs x >= 0");
  if (x == 0.0) return 1.0;
  const double a = df / 2.0;
  const double xx = x / 2.0;
  return xx < a + 1.0 ? 1.0 - gamma_p_series(a, xx) : gamma_q_cf(a, xx);
}

TestResult lr_test(double ll_restricted, double ll_full, int df) {
  if (df < 1) throw ArgumentError("lr_test needs df >= 1");
  TestResult r;
  r.statistic = -2.0 * (ll_restricted - ll_full);
  r.df = df;
  r.negative_statistic = r.statistic < 0.0;
  r.p_value = chi2_survival(std::max(r.statistic, 0.0), df);
  r.confidence = 1.0 - r.p_value;
  return r;
}

TestResult transferability_test(double ll_pooled, double ll_group1, double ll_group2, int df) {
  if (df < 1) throw ArgumentError("transferability_test needs df >= 1");
  TestResult r;
  r.statistic = -2.0 * (ll_pooled - ll_group1 - ll_group2);
  r.df = df;
  r.negative_statistic = r.statistic < 0.0;
  r.p_value = chi2_survival(std::max(r.statistic, 0.0), df);
  r.confidence = 1.0 - r.p_value;
  return r;
}

}  // namespace mixlogit
