#pragma once

namespace mixlogit {

struct TestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  double confidence = 0.0;
  bool negative_statistic = false;  // restricted model beat the full one (optimizer noise)
};

double aic(int n_params, double ll);
double pseudo_r2(double ll_zero, double ll_convergence);
double chi2_survival(double x, int df);
TestResult lr_test(double ll_restricted, double ll_full, int df);
TestResult transferability_test(double ll_pooled, double ll_group1, double ll_group2, int df);

}  // namespace mixlogit
