#pragma once

#include <memory>
#include <vector>

#include "persim/spectral_domain.hpp"

namespace persim {

/// Constant-coefficient elliptic operator per component:
///   A u = d·Δu − c·u                      (no conjugation weight)
///   A u = d·Δ(u/K) − c·u                  (with conjugation weight K > 0)
/// The K-form is self-adjoint in L²(D, w·dx) with w = 1/K; the domain the
/// operator is built on must carry that weight.
struct EllipticOp {
  double diffusion = 1.0;            // d > 0
  double shift = 0.0;                // c (real)
  std::vector<double> conj_weight;   // K on the grid; empty = none
};

/// Spectral realization of an EllipticOp on a given domain: eigenpairs,
/// transforms in the operator's own eigenbasis, semigroup/resolvent action.
/// Immutable after construction and safe to share across threads.
class OperatorSpectrum {
 public:
  static std::shared_ptr<const OperatorSpectrum> make(
      std::shared_ptr<const SpectralDomain> dom, EllipticOp op);

  const SpectralDomain& domain() const { return *dom_; }
  std::shared_ptr<const SpectralDomain> domain_ptr() const { return dom_; }
  const EllipticOp& op() const { return op_; }

  /// Eigenvalue of A for mode k: d·λ_k − c, nonincreasing in k.
  double eigenvalue(int k) const {
    return op_.diffusion * laplacian_eigenvalue_[k] - op_.shift;
  }
  /// Laplacian-part eigenvalue λ_k ≤ 0.
  double laplacian_eigenvalue(int k) const { return laplacian_eigenvalue_[k]; }
  /// Spectral gap weight c − d·λ_k used by fractional norms / sobolev noise.
  double gap(int k) const { return -eigenvalue(k); }
  int mode_count() const { return dom_->size(); }

  /// Operator eigenfunction on the grid (orthonormal in L²(w·dx)).
  const std::vector<double>& eigenfunction(int k) const;
  double eigenfunction_sup(int k) const;

  // Transforms in the operator eigenbasis (single component).
  void to_modes(const double* grid, double* modes) const;
  void from_modes(const double* modes, double* grid) const;

  /// out = e^{tA} in  (modes scaled by exp((d λ_k − c) t)); in == out allowed.
  void apply_semigroup(double t, const double* in, double* out) const;
  /// out = (I − dt·A)^{-1} in  (semi-implicit step kernel).
  void apply_resolvent(double dt, const double* in, double* out) const;
  /// out = A in, spectrally.
  void apply_operator(const double* in, double* out) const;

  /// Cached field ẽ = A(1), the distributional pairing ⟨Av,1⟩ = ⟨v,ẽ⟩.
  const std::vector<double>& a_one() const { return a_one_; }

 private:
  OperatorSpectrum() = default;
  void scale_modes(const double* in, double* out,
                   const std::vector<double>& factors) const;

  std::shared_ptr<const SpectralDomain> dom_;
  EllipticOp op_;
  bool use_domain_basis_ = true;
  std::vector<double> laplacian_eigenvalue_;
  std::vector<double> a_one_;
  // dense path (conjugation weight): columns of synth are K·φ_k
  std::vector<double> synth_, analysis_;  // size N×N row-major
  std::vector<std::vector<double>> eigenfields_;
  std::vector<double> eigen_sup_;
};

/// Semigroup applied to every component; nonnegative input stays nonnegative
/// up to a relative −1e-12 clip, beyond which this throws BlowupError.
Field apply_semigroup(const OperatorSpectrum& spec, const Field& f, double t);

/// ‖(−A)^β u‖_{L²(w)} computed spectrally, β ∈ [−1, 1]; requires c − dλ_0 > 0.
double fractional_norm(const OperatorSpectrum& spec, const double* comp,
                       double beta);

/// Equivalent-norm variant with spectral weight (1 + |c| − dλ_k), defined for
/// operators of any sign; used by Lyapunov monitors.
double fractional_norm_shifted(const OperatorSpectrum& spec, const double* comp,
                               double beta);

/// Clip small negative grid values (relative tolerance vs ‖f‖_∞). Values more
/// negative than the tolerance throw BlowupError when `strict`, otherwise they
/// are clipped too. Returns the largest clipped magnitude relative to ‖f‖_∞.
double clip_negative(double* f, int n, double rel_tol = 1e-12,
                     bool strict = true);

}  // namespace persim
