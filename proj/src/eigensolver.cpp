#include "persim/eigensolver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace persim {

double rayleigh(const OperatorSpectrum& spec,
                const std::vector<double>& potential, const double* field) {
  const auto& dom = spec.domain();
  const int n = dom.size();
  const double l2 = dom.l2(field);
  if (!(l2 > 0)) throw InvariantError("rayleigh: zero field");
  std::vector<double> modes(n);
  spec.to_modes(field, modes.data());
  double quad = 0;
  for (int k = 0; k < n; ++k) quad += spec.eigenvalue(k) * modes[k] * modes[k];
  const auto& w = dom.weight();
  double pot = 0;
  for (int i = 0; i < n; ++i) pot += potential[i] * field[i] * field[i] * w[i];
  pot *= dom.cell_volume();
  return (quad + pot) / (l2 * l2);
}

namespace {

double residual_norm(const OperatorSpectrum& spec,
                     const std::vector<double>& potential,
                     const std::vector<double>& y, double lambda) {
  const auto& dom = spec.domain();
  const int n = dom.size();
  std::vector<double> modes(n), resid(n);
  spec.to_modes(y.data(), modes.data());
  for (int k = 0; k < n; ++k) modes[k] *= spec.eigenvalue(k);
  spec.from_modes(modes.data(), resid.data());
  for (int i = 0; i < n; ++i) resid[i] += potential[i] * y[i] - lambda * y[i];
  return dom.l2(resid.data()) / dom.l2(y.data());
}

// Shifted inverse iteration on the dense grid operator, polishing the
// candidate the splitting iteration selected. The splitting stage is what
// guarantees we sit in the positive principal branch; this stage only drives
// the residual down.
bool polish(const OperatorSpectrum& spec, const std::vector<double>& potential,
            std::vector<double>& y, double& lambda, double tol, int rounds) {
  const auto& dom = spec.domain();
  const int n = dom.size();
  Eigen::MatrixXd L(n, n);
  std::vector<double> unit(n, 0.0), col(n);
  for (int j = 0; j < n; ++j) {
    unit[j] = 1.0;
    spec.apply_operator(unit.data(), col.data());
    unit[j] = 0.0;
    for (int i = 0; i < n; ++i) L(i, j) = col[i];
    L(j, j) += potential[j];
  }
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  for (int round = 0; round < rounds; ++round) {
    Eigen::MatrixXd shifted = L;
    for (int i = 0; i < n; ++i) shifted(i, i) -= lambda;
    Eigen::VectorXd next = shifted.partialPivLu().solve(v);
    if (!next.allFinite()) break;
    if (next.dot(v) < 0) next = -next;
    next /= next.norm();
    v = next;
    std::copy(v.data(), v.data() + n, y.begin());
    lambda = rayleigh(spec, potential, y.data());
    if (residual_norm(spec, potential, y, lambda) < tol) return true;
  }
  return residual_norm(spec, potential, y, lambda) < tol;
}

}  // namespace

EigenResult principal_eig(std::shared_ptr<const OperatorSpectrum> spec,
                          const std::vector<double>& potential, double tol,
                          int max_iterations, double tau0) {
  if (!(tol > 0)) throw InvariantError("principal_eig: tol must be positive");
  const auto& dom = spec->domain();
  const int n = dom.size();
  if (static_cast<int>(potential.size()) != n)
    throw InvariantError("principal_eig: potential size mismatch");

  double pot_sup = 0;
  for (double c : potential) pot_sup = std::max(pot_sup, std::abs(c));
  const double tau = tau0 > 0 ? tau0 : 0.05 / std::max(1.0, pot_sup);

  std::vector<double> y(n, 1.0), half(n);
  double l1 = dom.l1(y.data());
  for (double& v : y) v /= l1;

  double lambda = rayleigh(*spec, potential, y.data());
  double lambda_prev = 1e300;
  int iters = 0;
  while (iters < max_iterations) {
    // Strang step: e^{τc/2} S(τ) e^{τc/2}; stays positive by construction
    for (int i = 0; i < n; ++i) half[i] = y[i] * std::exp(0.5 * tau * potential[i]);
    spec->apply_semigroup(tau, half.data(), half.data());
    for (int i = 0; i < n; ++i) y[i] = half[i] * std::exp(0.5 * tau * potential[i]);
    clip_negative(y.data(), n, 1e-12, false);
    l1 = dom.l1(y.data());
    if (!(l1 > 0) || !std::isfinite(l1))
      throw Error("principal_eig: iteration degenerated");
    for (double& v : y) v /= l1;
    ++iters;

    if (iters % 8 != 0) continue;
    lambda = rayleigh(*spec, potential, y.data());
    const bool stalled =
        std::abs(lambda - lambda_prev) <=
        std::max(0.01 * tol, 1e-13) * std::max(1.0, std::abs(lambda));
    lambda_prev = lambda;
    if (!stalled) continue;
    if (residual_norm(*spec, potential, y, lambda) < tol) break;
    if (polish(*spec, potential, y, lambda, tol, 12)) break;
    throw Error("principal_eig: no convergence to the requested residual");
  }
  if (iters >= max_iterations)
    throw Error("principal_eig: no convergence after max iterations");

  // nonnegative eigenfield, unit L¹ mass
  clip_negative(y.data(), n, 1e-9, false);
  l1 = dom.l1(y.data());
  for (double& v : y) v /= l1;
  lambda = rayleigh(*spec, potential, y.data());

  EigenResult out;
  out.lambda = lambda;
  out.eigenfield = Field(spec->domain_ptr(), 1);
  std::copy(y.begin(), y.end(), out.eigenfield.comp(0));
  out.residual = residual_norm(*spec, potential, y, lambda);
  out.iterations = iters;
  out.tau = tau;
  return out;
}

}  // namespace persim
