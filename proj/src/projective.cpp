#include "persim/projective.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "persim/ensemble.hpp"

namespace persim {

ProjectiveState polar(const Field& x, int d) {
  if (d < 1 || d > x.m) throw InvariantError("polar: bad tracked count");
  ProjectiveState s;
  s.r = 0;
  for (int c = 0; c < d; ++c) s.r += x.dom->l1(x.comp(c));
  if (!(s.r > 0)) throw InvariantError("polar: tracked block is zero");
  s.v = Field(x.dom, d);
  const int n = x.dom->size();
  for (int c = 0; c < d; ++c)
    for (int i = 0; i < n; ++i) s.v.comp(c)[i] = x.comp(c)[i] / s.r;
  s.z = Field(x.dom, x.m - d);
  for (int c = d; c < x.m; ++c)
    std::memcpy(s.z.comp(c - d), x.comp(c), sizeof(double) * n);
  return s;
}

Field reconstruct(const ProjectiveState& s) {
  Field x(s.v.dom, s.v.m + s.z.m);
  const int n = x.dom->size();
  for (int c = 0; c < s.v.m; ++c)
    for (int i = 0; i < n; ++i) x.comp(c)[i] = s.r * s.v.comp(c)[i];
  for (int c = 0; c < s.z.m; ++c)
    std::memcpy(x.comp(s.v.m + c), s.z.comp(c), sizeof(double) * n);
  return x;
}

namespace {

struct LinScratch {
  Field state, out;
};
thread_local LinScratch g_lin;

void ensure_lin(const ModelSpec& base) {
  if (g_lin.state.dom != base.domain || g_lin.state.m != base.m) {
    g_lin.state = Field(base.domain, base.m);
    g_lin.out = Field(base.domain, base.m);
  }
}

}  // namespace

LinearizedModel::LinearizedModel(ModelSpec base) : base_(std::move(base)) {
  if (base_.spectra.empty())
    throw InvariantError("linearize: model must be finalized");
}

void LinearizedModel::assemble(const Field& z) const {
  ensure_lin(base_);
  const int n = base_.domain->size();
  for (int c = 0; c < base_.d; ++c)
    std::fill(g_lin.state.comp(c), g_lin.state.comp(c) + n, 0.0);
  for (int c = 0; c < z.m; ++c)
    std::memcpy(g_lin.state.comp(base_.d + c), z.comp(c), sizeof(double) * n);
}

void LinearizedModel::eval_fhat(const Field& z, Field& out) const {
  assemble(z);
  const int n = base_.domain->size();
  if (base_.f1) {
    base_.f1(g_lin.state, g_lin.out);
    for (int c = 0; c < base_.d; ++c)
      std::memcpy(out.comp(c), g_lin.out.comp(c), sizeof(double) * n);
  } else {
    for (int c = 0; c < base_.d; ++c)
      std::fill(out.comp(c), out.comp(c) + n, 0.0);
  }
}

void LinearizedModel::eval_sigma_hat(const Field& z, Field& out) const {
  assemble(z);
  const int n = base_.domain->size();
  if (base_.sigma_lin) {
    base_.sigma_lin(g_lin.state, g_lin.out);
    for (int c = 0; c < base_.d; ++c)
      std::memcpy(out.comp(c), g_lin.out.comp(c), sizeof(double) * n);
  } else {
    for (int c = 0; c < base_.d; ++c)
      std::fill(out.comp(c), out.comp(c) + n, 0.0);
  }
}

void LinearizedModel::eval_z_drift(const Field& z, Field& zf1, Field& zf2) const {
  assemble(z);
  const int n = base_.domain->size();
  const int mz = base_.m - base_.d;
  if (base_.f1) {
    base_.f1(g_lin.state, g_lin.out);
    for (int c = 0; c < mz; ++c)
      std::memcpy(zf1.comp(c), g_lin.out.comp(base_.d + c), sizeof(double) * n);
  } else {
    for (int c = 0; c < mz; ++c) std::fill(zf1.comp(c), zf1.comp(c) + n, 0.0);
  }
  if (base_.f2) {
    base_.f2(g_lin.state, g_lin.out);
    for (int c = 0; c < mz; ++c)
      std::memcpy(zf2.comp(c), g_lin.out.comp(base_.d + c), sizeof(double) * n);
  } else {
    for (int c = 0; c < mz; ++c) std::fill(zf2.comp(c), zf2.comp(c) + n, 0.0);
  }
}

void LinearizedModel::eval_z_sigma(const Field& z, Field& out) const {
  assemble(z);
  const int n = base_.domain->size();
  const int mz = base_.m - base_.d;
  if (base_.sigma) {
    base_.sigma(g_lin.state, g_lin.out);
    for (int c = 0; c < mz; ++c)
      std::memcpy(out.comp(c), g_lin.out.comp(base_.d + c), sizeof(double) * n);
  } else {
    for (int c = 0; c < mz; ++c) std::fill(out.comp(c), out.comp(c) + n, 0.0);
  }
}

Field LinearizedModel::default_z() const {
  Field z(base_.domain, base_.m - base_.d);
  const int n = base_.domain->size();
  if (base_.default_init.dom)
    for (int c = 0; c < z.m; ++c)
      std::memcpy(z.comp(c), base_.default_init.comp(base_.d + c),
                  sizeof(double) * n);
  return z;
}

double evaluate_H(const LinearizedModel& lin, const Field& v, const Field& z) {
  const ModelSpec& base = lin.model();
  const auto& dom = *base.domain;
  const int d = base.d;
  const int n = dom.size();

  double vmass = 0;
  for (int c = 0; c < d; ++c) vmass += dom.l1(v.comp(c));
  if (std::abs(vmass - 1.0) > 1e-8)
    throw InvariantError("evaluate_H: v is not L1-normalized");

  Field fhat(base.domain, d), sighat(base.domain, d);
  lin.eval_fhat(z, fhat);
  lin.eval_sigma_hat(z, sighat);

  // −⟨v, ẽ_u⟩ − ⟨f̂·v, 1⟩, with ⟨Av,1⟩ evaluated as ⟨v, A1⟩
  double lin_part = 0;
  for (int c = 0; c < d; ++c) {
    lin_part += dom.inner(v.comp(c), base.spectra[c]->a_one().data());
    double s = 0;
    const double* vv = v.comp(c);
    const double* fh = fhat.comp(c);
    const auto& w = dom.weight();
    for (int i = 0; i < n; ++i) s += fh[i] * vv[i] * w[i];
    lin_part += s * dom.cell_volume();
  }

  // Itô part: ½ Σ_channels (⟨σ̂·v, amp_n e_n⟩)², channels shared across
  // species when the spec is not independent.
  std::vector<double> prod(n), modes(n);
  double ito = 0;
  if (base.sampler->spec().independent) {
    for (int c = 0; c < d; ++c) {
      const double* vv = v.comp(c);
      const double* sh = sighat.comp(c);
      for (int i = 0; i < n; ++i) prod[i] = sh[i] * vv[i];
      base.spectra[c]->to_modes(prod.data(), modes.data());
      const auto& amp = base.sampler->amplitudes(c);
      for (int k = 0; k < n; ++k) {
        const double g = amp[k] * modes[k];
        ito += g * g;
      }
    }
  } else {
    std::vector<double> channel(n, 0.0);
    for (int c = 0; c < d; ++c) {
      const double* vv = v.comp(c);
      const double* sh = sighat.comp(c);
      for (int i = 0; i < n; ++i) prod[i] = sh[i] * vv[i];
      base.spectra[c]->to_modes(prod.data(), modes.data());
      const auto& amp = base.sampler->amplitudes(c);
      for (int k = 0; k < n; ++k) channel[k] += amp[k] * modes[k];
    }
    for (int k = 0; k < n; ++k) ito += channel[k] * channel[k];
  }

  return -lin_part + 0.5 * ito;
}

namespace {

struct BatchStats {
  double avg = 0, se = 0;
  bool monotone = false;
};

BatchStats batch_stats(const std::vector<double>& blocks) {
  BatchStats out;
  const int B = static_cast<int>(blocks.size());
  if (B == 0) return out;
  double s = 0;
  for (double b : blocks) s += b;
  out.avg = s / B;
  double v = 0;
  for (double b : blocks) v += (b - out.avg) * (b - out.avg);
  out.se = (B > 1) ? std::sqrt(v / (B - 1) / B) : 0.0;
  if (B >= 6) {
    const double tiny = 1e-12 * (std::abs(out.avg) + 1e-12);
    bool up = true, down = true;
    for (int i = 1; i < B; ++i) {
      up = up && blocks[i] - blocks[i - 1] > tiny;
      down = down && blocks[i - 1] - blocks[i] > tiny;
    }
    out.monotone = up || down;
  }
  return out;
}

}  // namespace

ProjectivePathResult run_projective_path(const LinearizedModel& lin,
                                         const ProjectiveRunConfig& cfg,
                                         const Field& v0, const Field& z0,
                                         const TrajectoryRng& rng) {
  const ModelSpec& base = lin.model();
  const auto& dom = *base.domain;
  const int n = dom.size();
  const int d = base.d;
  const int mz = base.m - d;
  const double dt = cfg.stepper.dt;
  validate_stepper(cfg.stepper);

  Field v = v0, z = z0;
  Field fhat(base.domain, d), sighat(base.domain, d);
  Field zf1(base.domain, mz), zf2(base.domain, mz), zsig(base.domain, mz);
  std::vector<double> wfield(n);

  const int steps = std::max(1, static_cast<int>(std::llround(cfg.T / dt)));
  const int burn = std::min(
      steps - 1, static_cast<int>(std::llround(cfg.burn_in / dt)));
  const int navg = steps - burn;
  const int nblocks = std::max(1, std::min(cfg.blocks, navg));
  std::vector<double> h_blocks(nblocks, 0.0), g_blocks(nblocks, 0.0);
  std::vector<int> counts(nblocks, 0);

  NoiseIncrement inc;
  for (int k = 0; k < steps; ++k) {
    base.sampler->sample(dt, rng, static_cast<uint64_t>(k), inc);
    lin.eval_fhat(z, fhat);
    lin.eval_sigma_hat(z, sighat);

    // tracked block: linear step then renormalize
    for (int c = 0; c < d; ++c) {
      double* vv = v.comp(c);
      const double* fh = fhat.comp(c);
      const double* sh = sighat.comp(c);
      if (base.sigma_lin) {
        base.sampler->synthesize(inc, c, wfield.data());
        for (int i = 0; i < n; ++i)
          vv[i] += dt * fh[i] * vv[i] + sh[i] * vv[i] * wfield[i];
      } else {
        for (int i = 0; i < n; ++i) vv[i] += dt * fh[i] * vv[i];
      }
      if (cfg.stepper.scheme == Scheme::ExponentialEuler)
        base.spectra[c]->apply_semigroup(dt, vv, vv);
      else
        base.spectra[c]->apply_resolvent(dt, vv, vv);
      for (int i = 0; i < n; ++i) vv[i] = std::max(vv[i], 0.0);
    }

    // z block: full dynamics at u = 0
    if (mz > 0) {
      lin.eval_z_drift(z, zf1, zf2);
      lin.eval_z_sigma(z, zsig);
      for (int c = 0; c < mz; ++c) {
        double* zz = z.comp(c);
        const double* a = zf1.comp(c);
        const double* b = zf2.comp(c);
        const double* sg = zsig.comp(c);
        base.sampler->synthesize(inc, d + c, wfield.data());
        for (int i = 0; i < n; ++i) {
          double F = zz[i] * a[i] + b[i];
          if (cfg.stepper.taming > 0)
            F /= 1.0 + cfg.stepper.taming * dt * std::abs(F);
          zz[i] += dt * F + sg[i] * wfield[i];
        }
        if (cfg.stepper.scheme == Scheme::ExponentialEuler)
          base.spectra[d + c]->apply_semigroup(dt, zz, zz);
        else
          base.spectra[d + c]->apply_resolvent(dt, zz, zz);
        for (int i = 0; i < n; ++i) zz[i] = std::max(zz[i], 0.0);
      }
    }

    double rho = 0;
    for (int c = 0; c < d; ++c) rho += dom.l1(v.comp(c));
    if (!(rho > 0) || !std::isfinite(rho))
      throw BlowupError("projective path: tracked block collapsed");
    for (int c = 0; c < d; ++c) {
      double* vv = v.comp(c);
      for (int i = 0; i < n; ++i) vv[i] /= rho;
    }

    if (k >= burn) {
      const int b = std::min(nblocks - 1, (k - burn) * nblocks / navg);
      h_blocks[b] += evaluate_H(lin, v, z);
      g_blocks[b] += -std::log(rho) / dt;
      counts[b] += 1;
    }
    if (cfg.observer)
      cfg.observer(k + 1, (k + 1) * dt, evaluate_H(lin, v, z), std::log(rho), v,
                   z);
  }

  for (int b = 0; b < nblocks; ++b)
    if (counts[b] > 0) {
      h_blocks[b] /= counts[b];
      g_blocks[b] /= counts[b];
    }

  ProjectivePathResult res;
  const BatchStats hs = batch_stats(h_blocks);
  const BatchStats gs = batch_stats(g_blocks);
  res.h_avg = hs.avg;
  res.h_se = hs.se;
  res.log_growth_avg = gs.avg;
  res.log_growth_se = gs.se;
  res.nonstationary = hs.monotone;
  res.v_final = std::move(v);
  res.z_final = std::move(z);
  return res;
}

std::vector<Field> make_v_inits(std::shared_ptr<const SpectralDomain> dom,
                                int d, int count) {
  std::vector<Field> out;
  const int n = dom->size();
  auto normalize = [&](Field& f) {
    double mass = 0;
    for (int c = 0; c < d; ++c) mass += dom->l1(f.comp(c));
    for (double& v : f.data) v /= mass;
  };
  for (int idx = 0; idx < count; ++idx) {
    Field f(dom, d, 0.0);
    if (idx == 0) {
      std::fill(f.data.begin(), f.data.end(), 1.0);
    } else if (idx % 4 == 3) {
      // eigenfunction magnitudes, cycling through the low modes
      const int k = 1 + (idx / 4) % std::max(1, dom->mode_count() - 1);
      const auto& ef = dom->eigenfunction(k);
      for (int c = 0; c < d; ++c) {
        double* vv = f.comp(c);
        for (int i = 0; i < n; ++i) vv[i] = std::abs(ef[i]) + 1e-3;
      }
    } else {
      // bump profiles at staggered centers and widths
      const double frac = (idx % 4 + 0.5) / 4.0;
      const double width = 0.05 + 0.1 * ((idx / 4) % 3);
      for (int c = 0; c < d; ++c) {
        double* vv = f.comp(c);
        for (int i = 0; i < n; ++i) {
          double q = 0;
          for (int a = 0; a < dom->dim(); ++a) {
            const double x = dom->coord(i, a) / dom->extent(a);
            double dist = std::abs(x - frac);
            if (dom->kind() == DomainKind::Torus) dist = std::min(dist, 1.0 - dist);
            q += dist * dist;
          }
          vv[i] = 1e-6 + std::exp(-q / (2 * width * width));
        }
      }
    }
    normalize(f);
    out.push_back(std::move(f));
  }
  return out;
}

LambdaEstimate estimate_lambda(const LinearizedModel& lin,
                               const LambdaConfig& cfg) {
  if (!(cfg.burn_in < cfg.T))
    throw InvariantError("estimate_lambda: burn_in must be below T");
  const ModelSpec& base = lin.model();

  std::vector<Field> v_inits = cfg.v_inits;
  if (v_inits.empty())
    v_inits = make_v_inits(base.domain, base.d, std::max(1, cfg.paths));
  Field z0 = cfg.z_init.dom ? cfg.z_init : lin.default_z();

  ProjectiveRunConfig run;
  run.stepper = cfg.stepper;
  run.burn_in = cfg.burn_in;
  run.T = cfg.T;

  LambdaEstimate est;
  est.per_path.resize(cfg.paths);
  parallel_for(cfg.paths, cfg.jobs, [&](int p) {
    TrajectoryRng rng{cfg.seed, static_cast<uint64_t>(cfg.antithetic ? p / 2 : p),
                      cfg.antithetic && (p % 2 == 1)};
    // antithetic twins share an initial profile so odd moments cancel
    const size_t init_idx =
        (cfg.antithetic ? p / 2 : p) % v_inits.size();
    est.per_path[p] = run_projective_path(lin, run, v_inits[init_idx], z0, rng);
  });

  int argmax = 0;
  for (int p = 1; p < cfg.paths; ++p)
    if (est.per_path[p].h_avg > est.per_path[argmax].h_avg) argmax = p;
  const auto& best = est.per_path[argmax];
  est.lambda_hat = best.h_avg;
  est.stderr_hat = best.h_se;
  est.log_growth_hat = best.log_growth_avg;
  est.agreement_gap = std::abs(best.h_avg - best.log_growth_avg);
  const double tol = 3.0 * std::sqrt(best.h_se * best.h_se +
                                     best.log_growth_se * best.log_growth_se) +
                     2.0 * cfg.stepper.dt * (1.0 + std::abs(est.lambda_hat));
  est.estimators_agree = est.agreement_gap <= tol;
  for (int p = 0; p < cfg.paths; ++p) {
    est.nonstationary = est.nonstationary || est.per_path[p].nonstationary;
    for (int q = p + 1; q < cfg.paths; ++q) {
      const double gap =
          std::abs(est.per_path[p].h_avg - est.per_path[q].h_avg);
      const double se = std::sqrt(est.per_path[p].h_se * est.per_path[p].h_se +
                                  est.per_path[q].h_se * est.per_path[q].h_se);
      if (gap > 5.0 * se + 1e-9) est.multimodal = true;
    }
  }
  return est;
}

namespace {

ResidualReport run_consistency(
    const ModelSpec& model, const StepperConfig& cfg, const Field& x0,
    int steps, const std::function<const NoiseIncrement&(int)>& increments) {
  const auto& dom = *model.domain;
  const int n = dom.size();
  const int d = model.d;
  const double dt = cfg.dt;

  Field x = x0;
  Field fbuf1(model.domain, model.m), fbuf2(model.domain, model.m);
  Field sig(model.domain, model.m);
  std::vector<double> modes(n), wfield(n), av(n), gsum(n);

  ResidualReport rep;
  double sum_r = 0, sum_v = 0;
  for (int k = 0; k < steps; ++k) {
    const NoiseIncrement& inc = increments(k);
    // state before the step
    ProjectiveState ps = polar(x, d);
    const double r0 = ps.r;

    // drift pairing ⟨F_u(x), 1⟩ and per-mode σ_u coefficients
    if (model.f1) model.f1(x, fbuf1);
    if (model.f2) model.f2(x, fbuf2);
    if (model.sigma) model.sigma(x, sig);
    double Fu1 = 0;
    for (int c = 0; c < d; ++c) {
      const double* xv = x.comp(c);
      const double* a = model.f1 ? fbuf1.comp(c) : nullptr;
      const double* b = model.f2 ? fbuf2.comp(c) : nullptr;
      std::vector<double> F(n, 0.0);
      for (int i = 0; i < n; ++i) {
        if (a) F[i] += xv[i] * a[i];
        if (b) F[i] += b[i];
      }
      Fu1 += dom.integral(F.data());
    }
    // ⟨v, ẽ_u⟩ and A_u v
    double v_e = 0;
    for (int c = 0; c < d; ++c)
      v_e += dom.inner(ps.v.comp(c), model.spectra[c]->a_one().data());

    // noise pairing ⟨G_u(x)*1, ΔW⟩ = Σ m_n c_n and ‖G_u(x)*1‖²; with a
    // shared Brownian basis the channel sums across tracked species before
    // squaring
    double g_pair = 0, g_norm2 = 0;
    std::vector<std::vector<double>> sig_modes(d);
    std::vector<double> shared_channel;
    if (!model.sampler->spec().independent) shared_channel.assign(n, 0.0);
    for (int c = 0; c < d; ++c) {
      sig_modes[c].resize(n);
      if (model.sigma)
        model.spectra[c]->to_modes(sig.comp(c), sig_modes[c].data());
      else
        std::fill(sig_modes[c].begin(), sig_modes[c].end(), 0.0);
      const auto& amp = model.sampler->amplitudes(c);
      const auto& si = inc.species[c];
      if (si.sparse) {
        for (const auto& [mode, cval] : si.entries)
          g_pair += sig_modes[c][mode] * cval;
      } else {
        for (int kk = 0; kk < n; ++kk)
          g_pair += sig_modes[c][kk] * si.dense[kk];
      }
      for (int kk = 0; kk < n; ++kk) {
        const double g = amp[kk] * sig_modes[c][kk];
        if (shared_channel.empty())
          g_norm2 += g * g;
        else
          shared_channel[kk] += g;
      }
    }
    if (!shared_channel.empty())
      for (int kk = 0; kk < n; ++kk)
        g_norm2 += shared_channel[kk] * shared_channel[kk];

    const double pred_dr = (r0 * v_e + Fu1) * dt + g_pair;

    // predicted dv per component (see the projective equations)
    std::vector<std::vector<double>> pred_dv(d, std::vector<double>(n, 0.0));
    const double scal = -v_e - Fu1 / r0 + g_norm2 / (r0 * r0);
    for (int c = 0; c < d; ++c) {
      model.spectra[c]->apply_operator(ps.v.comp(c), av.data());
      // G̃(G̃*1): (σ_u/r²)·Σ_n amp_n (amp_n m_n) e_n
      for (int kk = 0; kk < n; ++kk) {
        const double amp = model.sampler->amplitudes(c)[kk];
        modes[kk] = amp * amp * sig_modes[c][kk];
      }
      model.spectra[c]->from_modes(modes.data(), gsum.data());
      model.sampler->synthesize(inc, c, wfield.data());
      const double* vv = ps.v.comp(c);
      const double* xv = x.comp(c);
      const double* a = model.f1 ? fbuf1.comp(c) : nullptr;
      const double* b = model.f2 ? fbuf2.comp(c) : nullptr;
      const double* sg = model.sigma ? sig.comp(c) : nullptr;
      for (int i = 0; i < n; ++i) {
        double F = 0;
        if (a) F += xv[i] * a[i];
        if (b) F += b[i];
        double val = av[i] + vv[i] * scal + F / r0;
        if (sg) val -= sg[i] * gsum[i] / (r0 * r0);
        pred_dv[c][i] = val * dt;
        if (sg) pred_dv[c][i] += sg[i] * wfield[i] / r0 - g_pair / r0 * vv[i];
      }
    }

    step(model, cfg, x, inc);
    ProjectiveState ps1 = polar(x, d);

    const double res_r = (ps1.r - r0 - pred_dr) / (r0 * dt);
    sum_r += res_r;
    rep.max_r = std::max(rep.max_r, std::abs(res_r));

    double res_v = 0;
    for (int c = 0; c < d; ++c) {
      std::vector<double> diff(n);
      for (int i = 0; i < n; ++i)
        diff[i] = ps1.v.comp(c)[i] - ps.v.comp(c)[i] - pred_dv[c][i];
      res_v += dom.l1(diff.data());
    }
    res_v /= dt;
    sum_v += res_v;
    rep.max_v = std::max(rep.max_v, res_v);
  }
  rep.steps = steps;
  rep.mean_r = sum_r / steps;
  rep.mean_v = sum_v / steps;
  return rep;
}

}  // namespace

ResidualReport project_step_consistency(const ModelSpec& model,
                                        const StepperConfig& cfg,
                                        const Field& x0, double T,
                                        uint64_t seed) {
  const int steps = std::max(1, static_cast<int>(std::llround(T / cfg.dt)));
  TrajectoryRng rng{seed, 0};
  NoiseIncrement inc;
  auto provider = [&](int k) -> const NoiseIncrement& {
    model.sampler->sample(cfg.dt, rng, static_cast<uint64_t>(k), inc);
    return inc;
  };
  return run_consistency(model, cfg, x0, steps, provider);
}

std::vector<ResidualReport> project_step_consistency_scan(
    const ModelSpec& model, const Field& x0, double T,
    std::vector<double> dt_list, uint64_t seed,
    const StepperConfig& base_cfg) {
  std::sort(dt_list.begin(), dt_list.end(), std::greater<>());
  const double dt0 = dt_list.front();
  const int steps0 = std::max(1, static_cast<int>(std::llround(T / dt0)));
  std::vector<int> level_of;
  for (double dt : dt_list) {
    const int lvl = static_cast<int>(std::llround(std::log2(dt0 / dt)));
    if (std::abs(dt0 / dt - std::pow(2.0, lvl)) > 1e-9)
      throw InvariantError("consistency scan: dt list must be dyadic");
    level_of.push_back(lvl);
  }
  BridgeNoise noise(*model.sampler, dt0, steps0, level_of.back(),
                    TrajectoryRng{seed, 0});
  std::vector<ResidualReport> out;
  for (size_t j = 0; j < dt_list.size(); ++j) {
    StepperConfig cfg = base_cfg;
    cfg.dt = dt_list[j];
    const int lvl = level_of[j];
    auto provider = [&noise, lvl](int k) -> const NoiseIncrement& {
      return noise.increment(lvl, k);
    };
    out.push_back(run_consistency(model, cfg, x0, steps0 << lvl, provider));
  }
  return out;
}

}  // namespace persim
