#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "persim/error.hpp"
#include "persim/lyapunov.hpp"
#include "persim/rng.hpp"

namespace persim {

/// Path segment φ: [−r, 0] → [0,∞)ⁿ on a uniform grid with q·Δt = r exactly;
/// ring-buffered so the shift is index arithmetic.
class PathSegment {
 public:
  PathSegment(int n_species, double delay, double dt);

  int species() const { return n_; }
  double delay() const { return r_; }
  double dt() const { return dt_; }
  int samples() const { return q_ + 1; }

  double head(int i) const { return at(q_, i); }
  /// Grid sample j ∈ [0, q], j = 0 the oldest (time −r).
  double at(int j, int i) const;
  /// φᵢ(s) for s ∈ [−r, 0], linear interpolation between grid samples.
  double value(int i, double s) const;

  void fill(const std::function<double(int i, double s)>& init);
  void push(const std::vector<double>& new_head);
  bool nonnegative() const;

 private:
  int n_ = 1, q_ = 0;
  double dt_ = 0, r_ = 0;
  int newest_ = 0;  // ring frame of the head
  std::vector<double> buf_;  // (q+1) frames × n
};

using SegmentFn = std::function<double(const PathSegment&)>;

struct PsiParams {
  std::vector<double> c;   // per species, > 0
  double gamma = 1.0;      // exponential tilt rate
  double A2 = 0.0;
  std::function<double(const std::vector<double>&)> h;  // ≥ 1 weight
  std::vector<std::pair<double, double>> mu;  // discrete measure: (offset ≤ 0, weight)
};

/// dXᵢ = Xᵢ fᵢ(Φ)dt + Xᵢ gᵢ(Φ)dEᵢ with Cov(Eᵢ(1),Eⱼ(1)) = σᵢⱼ.
struct SfdeModel {
  int n = 1;
  double delay = 0;
  std::vector<SegmentFn> f;
  std::vector<SegmentFn> g;
  std::vector<std::vector<double>> covariance;  // n×n symmetric psd
  PsiParams psi;

  void finalize();  // validates and caches the covariance factor
  std::vector<std::vector<double>> chol;  // lower factor
};

/// Euler–Maruyama head update with exact segment shift; Δt must equal the
/// segment grid spacing.
void sfde_step(const SfdeModel& model, PathSegment& seg, double dt,
               const TrajectoryRng& rng, uint64_t step);

struct BoundaryInvasionConfig {
  double dt = 1e-3;
  double burn_in = 10;
  double T = 100;
  uint64_t seed = 1;
  int blocks = 16;
};

struct BoundaryInvasionResult {
  double lambda_hat = 0;  // time average of fᵢ − σᵢᵢ gᵢ²/2 on the boundary
  double stderr_hat = 0;
  bool nonstationary = false;
};

/// λ̂ᵢ(μ) with species i pinned to zero and the rest simulated to
/// stationarity.
BoundaryInvasionResult boundary_invasion(const SfdeModel& model, int i,
                                         const std::function<double(int, double)>& init,
                                         const BoundaryInvasionConfig& cfg);

/// Ψ(φ) = ln(1 + Σcᵢxᵢ) + A₂∫∫ e^{γ(u−s)} h(φ(u)) du dμ(s), trapezoid on the
/// segment grid.
double psi_monitor(const SfdeModel& model, const PathSegment& seg);

struct DelayPersistenceResult {
  PersistenceVerdict verdict;     // band of min_i Xᵢ occupation
  double joint_fraction = 0;      // time with b ≤ min ≤ max ≤ B
};

/// Simulates the SFDE and reports the band occupation of the min/max
/// components (time fraction with b ≤ min_i X_i ≤ max_i X_i ≤ B).
DelayPersistenceResult delay_persistence(
    const SfdeModel& model, const std::function<double(int, double)>& init,
    double dt, double burn_in, double T, double delta, uint64_t seed);

}  // namespace persim
