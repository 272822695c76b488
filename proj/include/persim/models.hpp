#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "persim/lyapunov.hpp"
#include "persim/projective.hpp"
#include "persim/spde_engine.hpp"

namespace persim {

std::vector<double> constant_grid(const SpectralDomain& dom, double value);
std::vector<double> profile_grid(const SpectralDomain& dom,
                                 const std::function<double(double)>& f,
                                 int axis = 0);

/// du = [dΔ(u/K) + r·u(1 − u/K) − E·u]dt + ε σ(u) K dw (scalar BM).
struct LogisticParams {
  double diffusion = 1.0;
  std::vector<double> K;  // > 0
  std::vector<double> r;  // ≥ 0
  std::vector<double> E;  // ≥ 0
  double eps = 0.0;       // ε ∈ [0, 1]
  std::function<double(double)> sigma_fn;  // σ(0) = 0; default identity
  double sigma_prime0 = 1.0;
};

/// Builds the weighted domain (w = 1/K) the logistic construction needs.
std::shared_ptr<const SpectralDomain> make_logistic_domain(
    DomainKind kind, double extent, int n, const std::vector<double>& K);

ModelSpec build_logistic(const LogisticParams& p,
                         std::shared_ptr<const SpectralDomain> dom);

/// du = [u_xx + u − u²]dt + ε σ(u) dW, space-time white noise on the torus.
struct KppParams {
  double eps = 0.0;
  std::function<double(double)> sigma_fn;
  double sigma_prime0 = 1.0;
};

ModelSpec build_kpp(const KppParams& p,
                    std::shared_ptr<const SpectralDomain> dom);

/// Scalar geometric-growth channel du = [d·u_xx + a·u]dt + σ₀ u dw used by
/// diagnostics and oracles (a enters through the operator shift).
struct GbmParams {
  double drift = 0.0;  // a
  double sigma0 = 0.0;
  double diffusion = 1.0;
};

ModelSpec build_gbm(const GbmParams& p,
                    std::shared_ptr<const SpectralDomain> dom);

/// SIR with saturated incidence; components ordered (I, S), I tracked.
struct SirParams {
  double lambda = 1, eta = 1, delta = 0.1, sigma = 0.2;  // rates
  double beta = 4, c1 = 1, c2 = 0, c3 = 0;
  double d1 = 1, d2 = 1;       // S and I diffusions
  double alpha1 = 0, alpha2 = 0;  // noise strengths on S and I
};

ModelSpec build_sir(const SirParams& p,
                    std::shared_ptr<const SpectralDomain> dom);

/// Endemic threshold λ̃ = [βλ − (η+δ+σ)(c₁λ+η)] / (c₁λ+η).
double sir_tilde_lambda(const SirParams& p);

/// Competitive Lotka–Volterra; all species tracked in the full model.
struct LvParams {
  int m = 2;
  std::vector<std::vector<double>> growth;  // m_i grids
  std::vector<std::vector<double>> self;    // a_ii grids, > 0
  std::vector<std::vector<std::vector<double>>> cross;  // a_ij grids (i≠j)
  std::vector<double> diffusion;
  std::vector<ChannelSpec> noise;
  bool independent = true;
  std::vector<double> sigma_prime0;  // per species; default 1
};

LvParams lv_constants(const SpectralDomain& dom, int m,
                      const std::vector<double>& growth,
                      const std::vector<double>& self,
                      const std::vector<std::vector<double>>& cross,
                      const std::vector<double>& diffusion);

ModelSpec build_lv(const LvParams& p,
                   std::shared_ptr<const SpectralDomain> dom);

/// LV restricted to the `present` species (a boundary face).
LvParams lv_face(const LvParams& p, const std::vector<int>& present);

/// Invasion model for species k against the face `present`: components are
/// ordered [k, present...] with d = 1, so linearization drops the self term.
ModelSpec build_lv_invasion(const LvParams& p, int k,
                            const std::vector<int>& present,
                            std::shared_ptr<const SpectralDomain> dom);

struct InvasionConfig {
  StepperConfig stepper;
  double burn_in = 5;
  double T = 50;
  int replicas = 8;
  uint64_t seed = 1;
  int jobs = 0;
  double pilot_T = 50;     // boundary stationarity pilot
  double delta = 0.05;     // pilot persistence level
  bool check_boundary = true;
};

struct InvasionEstimate {
  double r_hat = 0;  // inf over replicas of the invasion-rate time average
  double stderr_hat = 0;
  std::vector<double> per_replica;
  double spread = 0;  // max − min across replicas
  bool multimodal = false;
  bool nonstationary = false;
};

InvasionEstimate invasion_rate(const LvParams& p, int k,
                               std::shared_ptr<const SpectralDomain> dom,
                               const InvasionConfig& cfg);

struct FaceResult {
  std::vector<int> present;
  bool reachable = true;  // face subsystem passed the stationarity pilot
  std::vector<int> invaders;
  std::vector<double> rates;
  double max_rate = 0;
};

struct CoexistenceReport {
  bool coexistence = false;
  double min_max_rate = 0;
  std::vector<FaceResult> faces;
};

/// Verdict over the 2^m − 2 nonempty proper boundary faces: coexistence iff
/// every reachable face has a positive maximal invasion rate.
CoexistenceReport coexistence_check(const LvParams& p,
                                    std::shared_ptr<const SpectralDomain> dom,
                                    const InvasionConfig& cfg);

}  // namespace persim
