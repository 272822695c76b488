#include "persim/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace persim {

namespace {

constexpr int kSparseLimit = 8;
// log–log slope of the partial sums above which the series is called
// divergent; the condition is asymptotic and can only be probed on
// truncations, so the heuristic is deterministic and conservative.
constexpr double kDivergenceSlope = 0.05;

std::vector<double> rule_amplitudes(const ChannelSpec& ch,
                                    const OperatorSpectrum& spec) {
  const int N = spec.mode_count();
  std::vector<double> a(N, 0.0);
  switch (ch.rule) {
    case NoiseRule::White:
      std::fill(a.begin(), a.end(), 1.0);
      break;
    case NoiseRule::Sobolev:
      for (int k = 0; k < N; ++k) {
        const double gap = spec.gap(k);
        if (!(gap > 0))
          throw InvariantError(
              "noise: sobolev rule needs a negative-definite operator (c - "
              "d*lambda > 0)");
        a[k] = std::pow(gap, -0.5 * ch.alpha);
      }
      break;
    case NoiseRule::Finite:
      for (size_t k = 0; k < ch.coeffs.size() && k < a.size(); ++k)
        a[k] = ch.coeffs[k];
      break;
    case NoiseRule::ScalarBM:
      a[0] = 1.0;
      break;
  }
  if (!(ch.strength >= 0))
    throw InvariantError("noise: strength must be nonnegative");
  for (double& v : a) v *= ch.strength;
  return a;
}

// Partial sums S_M = Σ_{n≤M} a_n^p ‖e_n‖∞², judged Cauchy by the power-law
// slope of log S against log M on the upper half of the truncation.
bool partial_sums_converge(const std::vector<double>& a,
                           const OperatorSpectrum& spec, double p) {
  const int N = static_cast<int>(a.size());
  std::vector<double> S(N);
  double run = 0;
  for (int k = 0; k < N; ++k) {
    const double sup = spec.eigenfunction_sup(k);
    run += std::pow(std::abs(a[k]), p) * sup * sup;
    S[k] = run;
  }
  if (!(run > 0)) return true;  // identically zero channel
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int k = N / 2; k < N; ++k) {
    if (S[k] <= 0) continue;
    const double x = std::log(static_cast<double>(k + 1));
    const double y = std::log(S[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) return true;
  const double denom = cnt * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) return true;
  const double slope = (cnt * sxy - sx * sy) / denom;
  return slope <= kDivergenceSlope;
}

AdmissibilityReport channel_admissibility(const ChannelSpec& ch,
                                          const OperatorSpectrum& spec) {
  AdmissibilityReport rep;
  const int N = spec.domain().dim();
  const auto a = rule_amplitudes(ch, spec);

  if (ch.rule == NoiseRule::Finite || ch.rule == NoiseRule::ScalarBM) {
    rep.valid = true;
    rep.best_p = 2.0;
    rep.detail = "finitely many channels";
    return rep;
  }

  std::vector<double> p_grid;
  if (N == 1)
    p_grid = {2.0, 3.0, 4.0};
  else
    p_grid = {2.0, 2.5, 3.0, 4.0, 6.0, 8.0};  // N = 2: interval is [2, ∞)
  for (double p : p_grid) {
    if (partial_sums_converge(a, spec, p)) {
      rep.valid = true;
      rep.best_p = p;
      rep.detail = "partial sums Cauchy";
      return rep;
    }
  }
  if (N == 1) {
    double sup = 0;
    for (double v : a) sup = std::max(sup, std::abs(v));
    if (std::isfinite(sup)) {
      rep.valid = true;
      rep.best_p = std::numeric_limits<double>::infinity();
      rep.detail = "N=1 sup rule, sup|a_n| = " + std::to_string(sup);
      return rep;
    }
  }
  rep.valid = false;
  rep.detail = "partial sums diverge for all tested p";
  return rep;
}

}  // namespace

NoiseSampler::NoiseSampler(
    NoiseSpec spec, std::vector<std::shared_ptr<const OperatorSpectrum>> spectra)
    : spec_(std::move(spec)), spectra_(std::move(spectra)) {
  if (spec_.species.size() != spectra_.size())
    throw InvariantError("noise: one channel spec per species required");
  const int m = static_cast<int>(spec_.species.size());
  amps_.resize(m);
  sparse_modes_.resize(m);
  for (int s = 0; s < m; ++s) {
    const auto rep = channel_admissibility(spec_.species[s], *spectra_[s]);
    if (!rep.valid)
      throw InvariantError("noise: inadmissible spec for species " +
                           std::to_string(s) + " (" + rep.detail + ")");
    amps_[s] = rule_amplitudes(spec_.species[s], *spectra_[s]);
    int nz = 0;
    for (size_t k = 0; k < amps_[s].size(); ++k)
      if (amps_[s][k] != 0.0) ++nz;
    sparse_flag_.push_back(nz <= kSparseLimit);
    if (nz <= kSparseLimit) {
      for (size_t k = 0; k < amps_[s].size(); ++k)
        if (amps_[s][k] != 0.0) sparse_modes_[s].push_back(static_cast<int>(k));
    }
  }
}

void NoiseSampler::sample(double dt, const TrajectoryRng& rng, uint64_t step,
                          NoiseIncrement& out) const {
  if (!(dt > 0)) throw InvariantError("noise: dt must be positive");
  const int m = species_count();
  out.dt = dt;
  out.species.resize(m);
  const double sq = std::sqrt(dt);
  for (int s = 0; s < m; ++s) {
    const uint32_t lane = spec_.independent ? static_cast<uint32_t>(s) : 0u;
    auto& inc = out.species[s];
    const auto& a = amps_[s];
    if (sparse_flag_[s]) {
      inc.sparse = true;
      inc.entries.clear();
      inc.dense.clear();
      for (int k : sparse_modes_[s])
        inc.entries.emplace_back(
            k, a[k] * sq * rng.normal(step, lane, static_cast<uint32_t>(k)));
    } else {
      inc.sparse = false;
      inc.entries.clear();
      inc.dense.resize(a.size());
      for (size_t k = 0; k < a.size(); ++k)
        inc.dense[k] =
            a[k] == 0.0
                ? 0.0
                : a[k] * sq * rng.normal(step, lane, static_cast<uint32_t>(k));
    }
  }
}

void NoiseSampler::synthesize(const NoiseIncrement& inc, int species,
                              double* grid) const {
  const auto& spec = *spectra_[species];
  const int n = spec.domain().size();
  const auto& si = inc.species[species];
  if (si.sparse) {
    std::memset(grid, 0, sizeof(double) * n);
    for (const auto& [k, c] : si.entries) {
      const auto& ef = spec.eigenfunction(k);
      for (int i = 0; i < n; ++i) grid[i] += c * ef[i];
    }
  } else {
    spec.from_modes(si.dense.data(), grid);
  }
}

AdmissibilityReport NoiseSampler::admissibility(int species) const {
  return channel_admissibility(spec_.species[species], *spectra_[species]);
}

AdmissibilityReport check_admissibility(
    const NoiseSpec& spec,
    const std::vector<std::shared_ptr<const OperatorSpectrum>>& spectra) {
  AdmissibilityReport out;
  out.valid = true;
  out.best_p = 2.0;
  bool any_inf = false;
  for (size_t s = 0; s < spec.species.size(); ++s) {
    const auto rep = channel_admissibility(spec.species[s], *spectra[s]);
    if (!rep.valid) {
      out.valid = false;
      out.detail = "species " + std::to_string(s) + ": " + rep.detail;
      out.best_p = 0;
      return out;
    }
    if (std::isinf(rep.best_p))
      any_inf = true;
    else
      out.best_p = std::max(out.best_p, rep.best_p);
    out.detail = rep.detail;
  }
  if (any_inf) out.best_p = std::numeric_limits<double>::infinity();
  return out;
}

AdmissibilityReport check_admissibility(
    const ChannelSpec& channel,
    const std::shared_ptr<const OperatorSpectrum>& spectrum) {
  return channel_admissibility(channel, *spectrum);
}

}  // namespace persim
