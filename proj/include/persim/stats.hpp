#pragma once

#include <vector>

namespace persim {

struct MeanVar {
  double mean = 0, var = 0, se = 0;
  int n = 0;
};

MeanVar mean_var(const std::vector<double>& xs);

/// OLS slope/intercept of y against x.
struct LineFit {
  double slope = 0, intercept = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sample Kolmogorov–Smirnov p-value (asymptotic with the usual
/// small-sample correction).
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

double quantile(std::vector<double> xs, double q);

}  // namespace persim
