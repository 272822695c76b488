#include "persim/stats.hpp"

#include <algorithm>
#include <cmath>

#include "persim/error.hpp"

namespace persim {

MeanVar mean_var(const std::vector<double>& xs) {
  MeanVar out;
  out.n = static_cast<int>(xs.size());
  if (out.n == 0) return out;
  double s = 0;
  for (double x : xs) s += x;
  out.mean = s / out.n;
  double v = 0;
  for (double x : xs) v += (x - out.mean) * (x - out.mean);
  out.var = out.n > 1 ? v / (out.n - 1) : 0.0;
  out.se = std::sqrt(out.var / out.n);
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvariantError("fit_line: need matching samples, at least two");
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit fit;
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw InvariantError("ks test: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const size_t n = a.size(), m = b.size();
  size_t i = 0, j = 0;
  double d = 0;
  while (i < n && j < m) {
    const double x = std::min(a[i], b[j]);
    while (i < n && a[i] <= x) ++i;
    while (j < m && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n -
                             static_cast<double>(j) / m));
  }
  const double ne = static_cast<double>(n) * m / (n + m);
  const double sq = std::sqrt(ne);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;
  double p = 0;
  double sign = 1;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    p += sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * p, 0.0, 1.0);
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw InvariantError("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * (xs.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - lo;
  return xs[lo] * (1 - frac) + xs[hi] * frac;
}

}  // namespace persim
