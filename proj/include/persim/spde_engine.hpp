#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "persim/noise.hpp"

namespace persim {

/// Whole-field pointwise map: out gets one value per component per grid point.
using FieldMap = std::function<void(const Field& x, Field& out)>;

/// Reaction–diffusion system dx = (Ax + F(x))dt + G(x)dW with the structural
/// decomposition F = x·f1 + f2 and multiplicative diffusion amplitude σ
/// (σ_i = 0 whenever x_i = 0). Components 0..d-1 are the tracked block.
struct ModelSpec {
  std::string name;
  std::shared_ptr<const SpectralDomain> domain;
  int m = 1;
  int d = 1;
  std::vector<EllipticOp> ops;
  FieldMap f1;         // null means zero
  FieldMap f2;
  FieldMap sigma;      // diffusion amplitude per component
  FieldMap sigma_lin;  // tracked-block diffusion coefficient at u = 0 (d comps)
  NoiseSpec noise;
  std::vector<double> theta;
  int drift_degree = 1;  // declared polynomial bound degree of f
  Field default_init;

  std::vector<std::shared_ptr<const OperatorSpectrum>> spectra;
  std::shared_ptr<const NoiseSampler> sampler;

  /// Builds spectra and the noise sampler; must be called after filling in
  /// the fields above. Model builders do this for you.
  void finalize();
};

/// Structural SPDE checks (f2 sign, tracked-block vanishing, σ at axes),
/// probed numerically on random nonnegative states. Throws InvariantError.
void validate_model(const ModelSpec& model, uint64_t seed = 7);

enum class Scheme { ExponentialEuler, SemiImplicit };
enum class PositivityMode { Clip, Reject };

struct StepperConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::ExponentialEuler;
  double taming = 0.0;  // τ; drift tamed as F/(1 + τ·dt·|F|)
  PositivityMode positivity = PositivityMode::Clip;
  std::optional<double> max_stable_dt;  // pilot-run stability bound
};

void validate_stepper(const StepperConfig& cfg);

struct StepStats {
  double clip_rel = 0;  // largest clipped magnitude / ‖x‖∞ this step
};

/// One step x ← S(Δt)[x + Δt·F̂(x) + σ(x)·ΔW] in place.
StepStats step(const ModelSpec& model, const StepperConfig& cfg, Field& x,
               const NoiseIncrement& inc);
StepStats step(const ModelSpec& model, const StepperConfig& cfg, Field& x,
               const TrajectoryRng& rng, uint64_t step_index);

using Observer = std::function<void(int step, double t, const Field& x)>;

struct TrajectoryStats {
  int steps = 0;
  double time = 0;
  double max_clip_rel = 0;
  Field final_state;
};

/// Drives `steps = round(T/dt)` steps, invoking observers after each one.
/// Deterministic given the trajectory stream.
TrajectoryStats simulate(const ModelSpec& model, const StepperConfig& cfg,
                         const Field& x0, double T,
                         const std::vector<Observer>& observers,
                         const TrajectoryRng& rng);

struct ConvergenceRow {
  double dt = 0;
  double strong_error = 0;  // mean L² gap to the finest level at time T
  double observed_order = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
};

/// Strong-convergence probe over a decreasing dyadic Δt list; all levels share
/// one Brownian path via bridge refinement of the coarsest increments.
ConvergenceTable convergence_probe(const ModelSpec& model, const Field& x0,
                                   double T, std::vector<double> dt_list,
                                   int paths, uint64_t seed,
                                   const StepperConfig& base_cfg = {});

/// One Brownian path held consistently across dyadic refinement levels:
/// level 0 draws increments at dt0, each finer level splits the coarse
/// increments with conditional bridge midpoints.
class BridgeNoise {
 public:
  BridgeNoise(const NoiseSampler& sampler, double dt0, int steps0, int levels,
              const TrajectoryRng& rng);
  const NoiseIncrement& increment(int level, int step) const {
    return levels_[level][step];
  }

 private:
  void split(const NoiseIncrement& tot, NoiseIncrement& left,
             NoiseIncrement& right, double h, const TrajectoryRng& rng,
             uint64_t counter) const;
  const NoiseSampler& sampler_;
  std::vector<std::vector<NoiseIncrement>> levels_;
};

}  // namespace persim
