#include "persim/elliptic_op.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace persim {

std::shared_ptr<const OperatorSpectrum> OperatorSpectrum::make(
    std::shared_ptr<const SpectralDomain> dom, EllipticOp op) {
  if (!(op.diffusion > 0))
    throw InvariantError("elliptic op: diffusion constant must be positive");
  auto spec = std::shared_ptr<OperatorSpectrum>(new OperatorSpectrum());
  spec->dom_ = dom;
  spec->op_ = std::move(op);
  const int N = dom->size();

  if (spec->op_.conj_weight.empty()) {
    spec->use_domain_basis_ = true;
    spec->laplacian_eigenvalue_.resize(N);
    for (int k = 0; k < N; ++k)
      spec->laplacian_eigenvalue_[k] = dom->eigenvalue(k);
  } else {
    const auto& K = spec->op_.conj_weight;
    if (static_cast<int>(K.size()) != N)
      throw InvariantError("elliptic op: conjugation weight size mismatch");
    for (int i = 0; i < N; ++i) {
      if (!(K[i] > 0))
        throw InvariantError("elliptic op: conjugation weight must be positive");
      if (std::abs(dom->weight()[i] * K[i] - 1.0) > 1e-10)
        throw InvariantError(
            "elliptic op: domain weight must equal 1/K for a K-conjugated "
            "operator");
    }
    spec->use_domain_basis_ = false;

    // Generalized problem Δφ = λ K φ. Operator eigenfunctions are e = K·φ,
    // orthonormal in L²(w·dx) with w = 1/K, and A e = (dλ − c) e.
    std::vector<double> extents, weights;
    std::vector<int> sizes;
    for (int a = 0; a < dom->dim(); ++a) {
      extents.push_back(dom->extent(a));
      sizes.push_back(dom->grid_size(a));
    }
    auto plain = SpectralDomain::build(dom->kind(), dom->dim(), extents, sizes);
    const double dx = dom->cell_volume();
    Eigen::MatrixXd P(N, N);
    Eigen::VectorXd lam0(N);
    for (int k = 0; k < N; ++k) {
      lam0(k) = plain->eigenvalue(k);
      const auto& ef = plain->eigenfunction(k);
      for (int gi = 0; gi < N; ++gi) P(gi, k) = ef[gi];
    }
    Eigen::MatrixXd A = (dx * dx) * (P * lam0.asDiagonal() * P.transpose());
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i) B(i, i) = dx * K[i];
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, B);
    if (solver.info() != Eigen::Success)
      throw Error("elliptic op: conjugated eigenproblem failed");

    spec->laplacian_eigenvalue_.resize(N);
    spec->synth_.assign(static_cast<size_t>(N) * N, 0.0);
    spec->analysis_.assign(static_cast<size_t>(N) * N, 0.0);
    spec->eigenfields_.resize(N);
    spec->eigen_sup_.resize(N);
    for (int k = 0; k < N; ++k) {
      const int src = N - 1 - k;  // ascending -> nonincreasing
      spec->laplacian_eigenvalue_[k] = solver.eigenvalues()(src);
      Eigen::VectorXd phi = solver.eigenvectors().col(src);
      double mean = phi.sum();
      if (std::abs(mean) < 1e-12) mean = phi(0);
      if (mean < 0) phi = -phi;
      auto& e = spec->eigenfields_[k];
      e.resize(N);
      double sup = 0;
      for (int gi = 0; gi < N; ++gi) {
        e[gi] = K[gi] * phi(gi);
        sup = std::max(sup, std::abs(e[gi]));
        spec->synth_[static_cast<size_t>(gi) * N + k] = e[gi];
        // ⟨u, e_k⟩_w with w = 1/K reduces to the plain pairing with φ_k
        spec->analysis_[static_cast<size_t>(k) * N + gi] = phi(gi) * dx;
      }
      spec->eigen_sup_[k] = sup;
    }
    const double scale = std::abs(spec->laplacian_eigenvalue_.back()) + 1.0;
    if (std::abs(spec->laplacian_eigenvalue_[0]) > 1e-9 * scale)
      throw Error("elliptic op: conjugated basis lost the K mode");
    spec->laplacian_eigenvalue_[0] = 0.0;
  }

  spec->a_one_.resize(N);
  std::vector<double> ones(N, 1.0);
  spec->apply_operator(ones.data(), spec->a_one_.data());
  return spec;
}

const std::vector<double>& OperatorSpectrum::eigenfunction(int k) const {
  return use_domain_basis_ ? dom_->eigenfunction(k) : eigenfields_[k];
}

double OperatorSpectrum::eigenfunction_sup(int k) const {
  return use_domain_basis_ ? dom_->eigenfunction_sup(k) : eigen_sup_[k];
}

void OperatorSpectrum::to_modes(const double* grid, double* modes) const {
  if (use_domain_basis_) {
    dom_->to_modes(grid, modes);
    return;
  }
  const int N = dom_->size();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      A(analysis_.data(), N, N);
  Eigen::Map<const Eigen::VectorXd> g(grid, N);
  Eigen::Map<Eigen::VectorXd> m(modes, N);
  m = A * g;
}

void OperatorSpectrum::from_modes(const double* modes, double* grid) const {
  if (use_domain_basis_) {
    dom_->from_modes(modes, grid);
    return;
  }
  const int N = dom_->size();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      S(synth_.data(), N, N);
  Eigen::Map<const Eigen::VectorXd> m(modes, N);
  Eigen::Map<Eigen::VectorXd> g(grid, N);
  g = S * m;
}

void OperatorSpectrum::scale_modes(const double* in, double* out,
                                   const std::vector<double>& factors) const {
  const int N = dom_->size();
  std::vector<double> modes(N);
  to_modes(in, modes.data());
  for (int k = 0; k < N; ++k) modes[k] *= factors[k];
  from_modes(modes.data(), out);
}

void OperatorSpectrum::apply_semigroup(double t, const double* in,
                                       double* out) const {
  if (t < 0) throw InvariantError("apply_semigroup: negative time");
  const int N = dom_->size();
  std::vector<double> factors(N);
  for (int k = 0; k < N; ++k) factors[k] = std::exp(eigenvalue(k) * t);
  scale_modes(in, out, factors);
}

void OperatorSpectrum::apply_resolvent(double dt, const double* in,
                                       double* out) const {
  const int N = dom_->size();
  std::vector<double> factors(N);
  for (int k = 0; k < N; ++k) {
    const double den = 1.0 - dt * eigenvalue(k);
    if (!(den > 0))
      throw InvariantError("apply_resolvent: dt too large for operator growth");
    factors[k] = 1.0 / den;
  }
  scale_modes(in, out, factors);
}

void OperatorSpectrum::apply_operator(const double* in, double* out) const {
  const int N = dom_->size();
  std::vector<double> factors(N);
  for (int k = 0; k < N; ++k) factors[k] = eigenvalue(k);
  scale_modes(in, out, factors);
}

Field apply_semigroup(const OperatorSpectrum& spec, const Field& f, double t) {
  if (!f.finite()) throw BlowupError("apply_semigroup: non-finite field");
  Field out = f;
  const int N = f.dom->size();
  bool nonneg = true;
  for (double v : f.data) nonneg = nonneg && v >= 0;
  for (int c = 0; c < f.m; ++c) spec.apply_semigroup(t, f.comp(c), out.comp(c));
  if (nonneg)
    for (int c = 0; c < f.m; ++c) clip_negative(out.comp(c), N, 1e-12, true);
  return out;
}

double fractional_norm(const OperatorSpectrum& spec, const double* comp,
                       double beta) {
  if (beta < -1.0 || beta > 1.0)
    throw InvariantError("fractional_norm: beta outside [-1, 1]");
  if (!(spec.gap(0) > 0))
    throw InvariantError(
        "fractional_norm: operator must be negative definite (c - d*lambda_0 "
        "> 0); shift c");
  const int N = spec.mode_count();
  std::vector<double> modes(N);
  spec.to_modes(comp, modes.data());
  double s = 0;
  for (int k = 0; k < N; ++k)
    s += std::pow(spec.gap(k), 2.0 * beta) * modes[k] * modes[k];
  return std::sqrt(s);
}

double fractional_norm_shifted(const OperatorSpectrum& spec, const double* comp,
                               double beta) {
  const int N = spec.mode_count();
  const double shift = 1.0 + std::abs(spec.op().shift);
  std::vector<double> modes(N);
  spec.to_modes(comp, modes.data());
  double s = 0;
  for (int k = 0; k < N; ++k) {
    const double g =
        shift - spec.op().diffusion * spec.laplacian_eigenvalue(k);
    s += std::pow(g, 2.0 * beta) * modes[k] * modes[k];
  }
  return std::sqrt(s);
}

double clip_negative(double* f, int n, double rel_tol, bool strict) {
  double sup = 0;
  for (int i = 0; i < n; ++i) sup = std::max(sup, std::abs(f[i]));
  const double floor = -rel_tol * std::max(sup, 1e-300);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    if (f[i] < 0) {
      if (f[i] < floor && strict)
        throw BlowupError("positivity violated beyond clip tolerance");
      worst = std::max(worst, -f[i]);
      f[i] = 0;
    }
  }
  return sup > 0 ? worst / sup : 0.0;
}

}  // namespace persim
