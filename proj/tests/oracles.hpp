// Test-only oracles, independent of the implementation paths they check.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Classic RK4 on a scalar ODE x' = f(t, x).
inline double rk4(const std::function<double(double, double)>& f, double x0,
                  double t0, double t1, int steps) {
  double x = x0, t = t0;
  const double h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(t, x);
    const double k2 = f(t + h / 2, x + h / 2 * k1);
    const double k3 = f(t + h / 2, x + h / 2 * k2);
    const double k4 = f(t + h, x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  return x;
}

// Vector RK4 for small systems.
inline std::vector<double> rk4_system(
    const std::function<std::vector<double>(double, const std::vector<double>&)>& f,
    std::vector<double> x, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  double t = t0;
  const size_t n = x.size();
  auto axpy = [n](const std::vector<double>& base, double a,
                  const std::vector<double>& d) {
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = base[i] + a * d[i];
    return out;
  };
  for (int s = 0; s < steps; ++s) {
    const auto k1 = f(t, x);
    const auto k2 = f(t + h / 2, axpy(x, h / 2, k1));
    const auto k3 = f(t + h / 2, axpy(x, h / 2, k2));
    const auto k4 = f(t + h, axpy(x, h, k3));
    for (size_t i = 0; i < n; ++i)
      x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t += h;
  }
  return x;
}

// Composite Simpson quadrature on [a, b].
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int intervals) {
  if (intervals % 2 == 1) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i)
    s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Midpoint-rule quadrature of sampled grid values (the discrete measure the
// solver itself uses, computed independently).
inline double grid_quadrature(const std::vector<double>& vals, double cell) {
  double s = 0;
  for (double v : vals) s += v;
  return s * cell;
}

}  // namespace oracles
