#include "persim/spde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace persim {

void ModelSpec::finalize() {
  if (m < 1 || d < 1 || d > m)
    throw InvariantError("model: need 1 <= d <= m components");
  if (static_cast<int>(ops.size()) != m)
    throw InvariantError("model: one elliptic operator per component");
  if (!domain) throw InvariantError("model: missing domain");
  spectra.clear();
  for (int c = 0; c < m; ++c) spectra.push_back(OperatorSpectrum::make(domain, ops[c]));
  if (noise.species.empty())
    noise.species.assign(m, ChannelSpec{NoiseRule::ScalarBM, 1.0, {}, 0.0});
  if (static_cast<int>(noise.species.size()) != m)
    throw InvariantError("model: one noise channel spec per component");
  sampler = std::make_shared<NoiseSampler>(noise, spectra);
  if (default_init.dom == nullptr) default_init = Field(domain, m, 0.0);
}

void validate_model(const ModelSpec& model, uint64_t seed) {
  const int n = model.domain->size();
  SequentialRng rng(seed, 0x5eed);
  Field x(model.domain, model.m), out(model.domain, model.m);
  for (int trial = 0; trial < 8; ++trial) {
    for (double& v : x.data) v = std::abs(rng.normal());
    const int zeroed = trial % (model.m + 1);  // one component forced to 0
    if (zeroed < model.m)
      std::fill(x.comp(zeroed), x.comp(zeroed) + n, 0.0);
    if (model.f2) {
      model.f2(x, out);
      for (int c = 0; c < model.m; ++c)
        for (int i = 0; i < n; ++i) {
          if (out.comp(c)[i] < -1e-12)
            throw InvariantError("model: f2 negative on nonnegative state");
          if (c < model.d && zeroed < model.d && c == zeroed &&
              std::abs(out.comp(c)[i]) > 1e-12)
            throw InvariantError(
                "model: tracked f2 component must vanish when that component "
                "is zero");
        }
    }
    if (model.sigma) {
      model.sigma(x, out);
      if (zeroed < model.m)
        for (int i = 0; i < n; ++i)
          if (std::abs(out.comp(zeroed)[i]) > 1e-12)
            throw InvariantError("model: sigma_i must vanish where x_i = 0");
    }
  }
}

void validate_stepper(const StepperConfig& cfg) {
  if (!(cfg.dt > 0)) throw InvariantError("stepper: dt must be positive");
  if (cfg.taming < 0) throw InvariantError("stepper: taming must be >= 0");
  if (cfg.max_stable_dt && cfg.dt > *cfg.max_stable_dt + 1e-15)
    throw InvariantError("stepper: dt exceeds the pilot stability bound");
}

namespace {

struct StepScratch {
  Field f1v, f2v, sig, drift;
  std::vector<double> wfield;
};

thread_local StepScratch g_scratch;

void ensure_scratch(const ModelSpec& model) {
  auto& s = g_scratch;
  if (s.drift.dom != model.domain || s.drift.m != model.m) {
    s.f1v = Field(model.domain, model.m);
    s.f2v = Field(model.domain, model.m);
    s.sig = Field(model.domain, model.m);
    s.drift = Field(model.domain, model.m);
    s.wfield.assign(model.domain->size(), 0.0);
  }
}

}  // namespace

StepStats step(const ModelSpec& model, const StepperConfig& cfg, Field& x,
               const NoiseIncrement& inc) {
  const int n = model.domain->size();
  const double dt = cfg.dt;
  ensure_scratch(model);
  auto& scr = g_scratch;

  // drift F = x·f1 + f2, tamed
  const bool has_drift = static_cast<bool>(model.f1) || static_cast<bool>(model.f2);
  if (has_drift) {
    if (model.f1) model.f1(x, scr.f1v);
    if (model.f2) model.f2(x, scr.f2v);
    for (int c = 0; c < model.m; ++c) {
      double* drift = scr.drift.comp(c);
      const double* xv = x.comp(c);
      const double* f1v = scr.f1v.comp(c);
      const double* f2v = scr.f2v.comp(c);
      for (int i = 0; i < n; ++i) {
        double F = 0;
        if (model.f1) F += xv[i] * f1v[i];
        if (model.f2) F += f2v[i];
        if (cfg.taming > 0) F /= 1.0 + cfg.taming * dt * std::abs(F);
        drift[i] = F;
      }
    }
  }
  if (model.sigma) model.sigma(x, scr.sig);

  StepStats stats;
  for (int c = 0; c < model.m; ++c) {
    double* xv = x.comp(c);
    if (has_drift) {
      const double* drift = scr.drift.comp(c);
      for (int i = 0; i < n; ++i) xv[i] += dt * drift[i];
    }
    if (model.sigma) {
      model.sampler->synthesize(inc, c, scr.wfield.data());
      const double* sig = scr.sig.comp(c);
      for (int i = 0; i < n; ++i) xv[i] += sig[i] * scr.wfield[i];
    }
    if (cfg.scheme == Scheme::ExponentialEuler)
      model.spectra[c]->apply_semigroup(dt, xv, xv);
    else
      model.spectra[c]->apply_resolvent(dt, xv, xv);

    // positivity: clip logs the excursion, reject tolerates only roundoff
    double sup = 0;
    for (int i = 0; i < n; ++i) sup = std::max(sup, std::abs(xv[i]));
    if (cfg.positivity == PositivityMode::Reject) {
      clip_negative(xv, n, 1e-12, true);
    } else {
      double worst = 0;
      for (int i = 0; i < n; ++i)
        if (xv[i] < 0) {
          worst = std::max(worst, -xv[i]);
          xv[i] = 0;
        }
      if (sup > 0) stats.clip_rel = std::max(stats.clip_rel, worst / sup);
    }
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(xv[i]))
        throw BlowupError("step: non-finite state (blow-up)");
  }
  return stats;
}

StepStats step(const ModelSpec& model, const StepperConfig& cfg, Field& x,
               const TrajectoryRng& rng, uint64_t step_index) {
  thread_local NoiseIncrement inc;
  model.sampler->sample(cfg.dt, rng, step_index, inc);
  return step(model, cfg, x, inc);
}

TrajectoryStats simulate(const ModelSpec& model, const StepperConfig& cfg,
                         const Field& x0, double T,
                         const std::vector<Observer>& observers,
                         const TrajectoryRng& rng) {
  if (!(T > 0)) throw InvariantError("simulate: T must be positive");
  validate_stepper(cfg);
  if (!x0.finite()) throw BlowupError("simulate: non-finite initial state");
  const int steps = std::max(1, static_cast<int>(std::llround(T / cfg.dt)));
  TrajectoryStats stats;
  stats.final_state = x0;
  for (int k = 0; k < steps; ++k) {
    const StepStats st =
        step(model, cfg, stats.final_state, rng, static_cast<uint64_t>(k));
    stats.max_clip_rel = std::max(stats.max_clip_rel, st.clip_rel);
    stats.steps = k + 1;
    stats.time = (k + 1) * cfg.dt;
    for (const auto& obs : observers) obs(k + 1, stats.time, stats.final_state);
  }
  return stats;
}

namespace {
uint64_t bridge_counter(int level, uint64_t s) {
  return (static_cast<uint64_t>(level) << 48) | s;
}
}  // namespace

BridgeNoise::BridgeNoise(const NoiseSampler& sampler, double dt0, int steps0,
                         int levels, const TrajectoryRng& rng)
    : sampler_(sampler) {
  levels_.resize(levels + 1);
  auto& base = levels_[0];
  base.resize(steps0);
  for (int s = 0; s < steps0; ++s)
    sampler.sample(dt0, rng, bridge_counter(0, s), base[s]);
  for (int j = 0; j < levels; ++j) {
    const auto& coarse = levels_[j];
    auto& fine = levels_[j + 1];
    fine.resize(coarse.size() * 2);
    const double hf = dt0 / std::pow(2.0, j + 1);
    for (size_t s = 0; s < coarse.size(); ++s)
      split(coarse[s], fine[2 * s], fine[2 * s + 1], hf, rng,
            bridge_counter(j + 1, static_cast<uint64_t>(s)));
  }
}

// midpoint | total ~ N(total/2, a²h/2) for each mode, h the half width
void BridgeNoise::split(const NoiseIncrement& tot, NoiseIncrement& left,
                        NoiseIncrement& right, double h,
                        const TrajectoryRng& rng, uint64_t counter) const {
  left = tot;
  right = tot;
  left.dt = right.dt = h;
  const double sd = std::sqrt(h / 2.0);
  for (size_t sp = 0; sp < tot.species.size(); ++sp) {
    const auto& a = sampler_.amplitudes(static_cast<int>(sp));
    const uint32_t lane =
        sampler_.spec().independent ? static_cast<uint32_t>(sp) : 0u;
    auto bridge = [&](int mode, double total, double& l, double& r) {
      const double xi = rng.normal(counter, lane, static_cast<uint32_t>(mode));
      l = 0.5 * total + a[mode] * sd * xi;
      r = total - l;
    };
    if (tot.species[sp].sparse) {
      for (size_t e = 0; e < tot.species[sp].entries.size(); ++e) {
        const auto& [mode, total] = tot.species[sp].entries[e];
        bridge(mode, total, left.species[sp].entries[e].second,
               right.species[sp].entries[e].second);
      }
    } else {
      for (size_t mode = 0; mode < tot.species[sp].dense.size(); ++mode) {
        if (a[mode] == 0.0) continue;
        bridge(static_cast<int>(mode), tot.species[sp].dense[mode],
               left.species[sp].dense[mode], right.species[sp].dense[mode]);
      }
    }
  }
}

ConvergenceTable convergence_probe(const ModelSpec& model, const Field& x0,
                                   double T, std::vector<double> dt_list,
                                   int paths, uint64_t seed,
                                   const StepperConfig& base_cfg) {
  if (dt_list.size() < 2)
    throw InvariantError("convergence probe: need at least two dt values");
  std::sort(dt_list.begin(), dt_list.end(), std::greater<>());
  const double dt0 = dt_list.front();
  std::vector<int> level_of;
  for (double dt : dt_list) {
    const double ratio = dt0 / dt;
    const int lvl = static_cast<int>(std::llround(std::log2(ratio)));
    if (std::abs(ratio - std::pow(2.0, lvl)) > 1e-9)
      throw InvariantError("convergence probe: dt list must be dyadic");
    level_of.push_back(lvl);
  }
  const int max_level = level_of.back();
  const int steps0 = std::max(1, static_cast<int>(std::llround(T / dt0)));

  std::vector<double> err(dt_list.size() - 1, 0.0);
  for (int p = 0; p < paths; ++p) {
    TrajectoryRng rng{seed, static_cast<uint64_t>(p)};
    BridgeNoise noise(*model.sampler, dt0, steps0, max_level, rng);
    std::vector<Field> finals;
    for (size_t j = 0; j < dt_list.size(); ++j) {
      StepperConfig cfg = base_cfg;
      cfg.dt = dt_list[j];
      const int lvl = level_of[j];
      const int steps = steps0 << lvl;
      Field x = x0;
      for (int s = 0; s < steps; ++s) step(model, cfg, x, noise.increment(lvl, s));
      finals.push_back(std::move(x));
    }
    const Field& ref = finals.back();
    for (size_t j = 0; j + 1 < dt_list.size(); ++j) {
      double gap = 0;
      for (size_t i = 0; i < ref.data.size(); ++i) {
        const double dv = finals[j].data[i] - ref.data[i];
        gap += dv * dv;
      }
      err[j] += std::sqrt(gap * model.domain->cell_volume());
    }
  }
  for (double& e : err) e /= paths;

  ConvergenceTable table;
  for (size_t j = 0; j + 1 < dt_list.size(); ++j) {
    ConvergenceRow row;
    row.dt = dt_list[j];
    row.strong_error = err[j];
    if (j > 0 && err[j] > 0 && err[j - 1] > 0)
      row.observed_order = std::log2(err[j - 1] / err[j]);
    table.rows.push_back(row);
  }
  if (table.rows.size() >= 2) table.rows.front().observed_order = table.rows[1].observed_order;
  return table;
}

}  // namespace persim
