#pragma once

#include <memory>
#include <vector>

#include "persim/elliptic_op.hpp"

namespace persim {

struct EigenResult {
  double lambda = 0;
  Field eigenfield;     // nonnegative, ‖·‖_{L1} = 1
  double residual = 0;  // ‖L e − λ e‖_{L2} / ‖e‖_{L2}
  int iterations = 0;
  double tau = 0;       // final splitting step
};

/// Principal eigenvalue and positive eigenfunction of L u = A u + c(ξ) u by
/// power iteration on exp(τL), realized with Strang splitting of the
/// semigroup and the pointwise potential; λ extracted as a Rayleigh quotient.
/// τ is refined until the residual meets tol.
EigenResult principal_eig(std::shared_ptr<const OperatorSpectrum> spec,
                          const std::vector<double>& potential, double tol,
                          int max_iterations = 20000, double tau0 = 0);

/// Rayleigh quotient (⟨u, Au⟩ + ⟨c·u, u⟩)/⟨u, u⟩ in L²(w·dx).
double rayleigh(const OperatorSpectrum& spec,
                const std::vector<double>& potential, const double* field);

}  // namespace persim
