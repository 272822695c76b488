#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "persim/elliptic_op.hpp"
#include "persim/rng.hpp"

namespace persim {

// Q-Wiener coefficient rules per species channel.
enum class NoiseRule { White, Sobolev, Finite, ScalarBM };

struct ChannelSpec {
  NoiseRule rule = NoiseRule::White;
  double alpha = 1.0;            // sobolev: a_n = (c − dλ_n)^{−α/2}
  std::vector<double> coeffs;    // finite: explicit a_n list
  double strength = 1.0;         // ε ≥ 0 multiplier
};

struct NoiseSpec {
  std::vector<ChannelSpec> species;  // one per model component
  bool independent = true;           // independent BMs across species
};

// Mode coefficients of ΔW over one step, per species, in the operator
// eigenbasis. Sparse channels carry (mode, coefficient) pairs.
struct SpeciesIncrement {
  bool sparse = false;
  std::vector<std::pair<int, double>> entries;  // sparse form
  std::vector<double> dense;                    // dense form
};

struct NoiseIncrement {
  double dt = 0;
  std::vector<SpeciesIncrement> species;
};

struct AdmissibilityReport {
  bool valid = false;
  double best_p = 0;  // smallest convergent p; infinity() for the N=1 sup rule
  std::string detail;
};

/// Binds a NoiseSpec to the per-species operator spectra. Stateless given a
/// trajectory stream; construction validates the admissibility condition.
class NoiseSampler {
 public:
  NoiseSampler(NoiseSpec spec,
               std::vector<std::shared_ptr<const OperatorSpectrum>> spectra);

  const NoiseSpec& spec() const { return spec_; }
  int species_count() const { return static_cast<int>(amps_.size()); }
  /// Per-mode amplitude ε·a_n for one species.
  const std::vector<double>& amplitudes(int species) const {
    return amps_[species];
  }

  /// Gaussian mode coefficients with Var = (ε a_n)² Δt. When the spec is not
  /// independent all species draw from the same underlying Brownian lanes.
  void sample(double dt, const TrajectoryRng& rng, uint64_t step,
              NoiseIncrement& out) const;

  /// ΔW grid field for one species (overwrites `grid`).
  void synthesize(const NoiseIncrement& inc, int species, double* grid) const;

  AdmissibilityReport admissibility(int species) const;

 private:
  NoiseSpec spec_;
  std::vector<std::shared_ptr<const OperatorSpectrum>> spectra_;
  std::vector<std::vector<double>> amps_;  // dense per-mode amplitudes
  std::vector<std::vector<int>> sparse_modes_;  // nonzero modes when few
  std::vector<char> sparse_flag_;
};

/// Spec-level admissibility check against the truncated basis: smallest p in
/// [2, 2N/(N−2)) with numerically Cauchy partial sums, the sup rule for N=1.
AdmissibilityReport check_admissibility(
    const NoiseSpec& spec,
    const std::vector<std::shared_ptr<const OperatorSpectrum>>& spectra);

/// Convenience one-species overload used by tests.
AdmissibilityReport check_admissibility(
    const ChannelSpec& channel, const std::shared_ptr<const OperatorSpectrum>& spectrum);

}  // namespace persim
