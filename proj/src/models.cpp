#include "persim/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace persim {

std::vector<double> constant_grid(const SpectralDomain& dom, double value) {
  return std::vector<double>(dom.size(), value);
}

std::vector<double> profile_grid(const SpectralDomain& dom,
                                 const std::function<double(double)>& f,
                                 int axis) {
  std::vector<double> out(dom.size());
  for (int i = 0; i < dom.size(); ++i) out[i] = f(dom.coord(i, axis));
  return out;
}

namespace {

std::function<double(double)> sigma_or_identity(
    const std::function<double(double)>& fn) {
  if (fn) return fn;
  return [](double u) { return u; };
}

void check_grid(const SpectralDomain& dom, const std::vector<double>& g,
                const char* name, double lower, bool strict) {
  if (static_cast<int>(g.size()) != dom.size())
    throw InvariantError(std::string("model: ") + name + " grid size mismatch");
  for (double v : g) {
    if (!std::isfinite(v) || v < lower || (strict && v <= lower))
      throw InvariantError(std::string("model: ") + name +
                           " violates its positivity constraint");
  }
}

}  // namespace

std::shared_ptr<const SpectralDomain> make_logistic_domain(
    DomainKind kind, double extent, int n, const std::vector<double>& K) {
  std::vector<double> w(K.size());
  for (size_t i = 0; i < K.size(); ++i) {
    if (!(K[i] > 0))
      throw InvariantError("logistic: carrying capacity must be positive");
    w[i] = 1.0 / K[i];
  }
  return SpectralDomain::build(kind, 1, {extent}, {n}, w);
}

ModelSpec build_logistic(const LogisticParams& p,
                         std::shared_ptr<const SpectralDomain> dom) {
  check_grid(*dom, p.K, "K", 0.0, true);
  check_grid(*dom, p.r, "r", 0.0, false);
  check_grid(*dom, p.E, "E", 0.0, false);
  if (p.eps < 0 || p.eps > 1)
    throw InvariantError("logistic: eps must lie in [0, 1]");

  ModelSpec model;
  model.name = "logistic";
  model.domain = dom;
  model.m = model.d = 1;
  EllipticOp op;
  op.diffusion = p.diffusion;
  op.shift = 0.0;
  op.conj_weight = p.K;
  model.ops = {op};

  auto K = p.K;
  auto r = p.r;
  auto E = p.E;
  model.f1 = [K, r, E](const Field& x, Field& out) {
    const int n = x.dom->size();
    const double* u = x.comp(0);
    double* o = out.comp(0);
    for (int i = 0; i < n; ++i) o[i] = r[i] * (1.0 - u[i] / K[i]) - E[i];
  };

  // mode-0 of the conjugated operator is K/‖K‖_{L²(μ)}; rescaling the
  // amplitude by ‖K‖ makes the noise term ε σ(u) K dw exactly
  const double knorm = dom->l2(p.K.data());
  auto sig = sigma_or_identity(p.sigma_fn);
  model.sigma = [sig, knorm](const Field& x, Field& out) {
    const int n = x.dom->size();
    const double* u = x.comp(0);
    double* o = out.comp(0);
    for (int i = 0; i < n; ++i) o[i] = sig(u[i]) * knorm;
  };
  const double slope = p.sigma_prime0 * knorm;
  model.sigma_lin = [slope](const Field& x, Field& out) {
    std::fill(out.comp(0), out.comp(0) + x.dom->size(), slope);
  };
  model.noise.species = {ChannelSpec{NoiseRule::ScalarBM, 1.0, {}, p.eps}};
  model.theta = {p.eps};
  model.drift_degree = 2;
  model.finalize();
  model.default_init = Field(dom, 1, 0.1);
  return model;
}

ModelSpec build_kpp(const KppParams& p,
                    std::shared_ptr<const SpectralDomain> dom) {
  if (dom->kind() != DomainKind::Torus || dom->dim() != 1)
    throw InvariantError("kpp: expects the one-dimensional torus");
  if (p.eps < 0) throw InvariantError("kpp: eps must be nonnegative");

  ModelSpec model;
  model.name = "kpp";
  model.domain = dom;
  model.m = model.d = 1;
  model.ops = {EllipticOp{1.0, 0.0, {}}};
  model.f1 = [](const Field& x, Field& out) {
    const int n = x.dom->size();
    const double* u = x.comp(0);
    double* o = out.comp(0);
    for (int i = 0; i < n; ++i) o[i] = 1.0 - u[i];
  };
  auto sig = sigma_or_identity(p.sigma_fn);
  model.sigma = [sig](const Field& x, Field& out) {
    const int n = x.dom->size();
    const double* u = x.comp(0);
    double* o = out.comp(0);
    for (int i = 0; i < n; ++i) o[i] = sig(u[i]);
  };
  const double slope = p.sigma_prime0;
  model.sigma_lin = [slope](const Field& x, Field& out) {
    std::fill(out.comp(0), out.comp(0) + x.dom->size(), slope);
  };
  model.noise.species = {ChannelSpec{NoiseRule::White, 1.0, {}, p.eps}};
  model.theta = {p.eps};
  model.drift_degree = 2;
  model.finalize();
  model.default_init = Field(dom, 1, 0.1);
  return model;
}

ModelSpec build_gbm(const GbmParams& p,
                    std::shared_ptr<const SpectralDomain> dom) {
  ModelSpec model;
  model.name = "gbm";
  model.domain = dom;
  model.m = model.d = 1;
  model.ops = {EllipticOp{p.diffusion, -p.drift, {}}};
  const double amp = p.sigma0 * std::sqrt(dom->weighted_volume());
  model.sigma = [amp](const Field& x, Field& out) {
    const int n = x.dom->size();
    const double* u = x.comp(0);
    double* o = out.comp(0);
    for (int i = 0; i < n; ++i) o[i] = amp * u[i];
  };
  model.sigma_lin = [amp](const Field& x, Field& out) {
    std::fill(out.comp(0), out.comp(0) + x.dom->size(), amp);
  };
  model.noise.species = {ChannelSpec{NoiseRule::ScalarBM, 1.0, {}, 1.0}};
  model.drift_degree = 1;
  model.finalize();
  model.default_init = Field(dom, 1, 1.0);
  return model;
}

double sir_tilde_lambda(const SirParams& p) {
  return (p.beta * p.lambda -
          (p.eta + p.delta + p.sigma) * (p.c1 * p.lambda + p.eta)) /
         (p.c1 * p.lambda + p.eta);
}

ModelSpec build_sir(const SirParams& p,
                    std::shared_ptr<const SpectralDomain> dom) {
  for (double v : {p.lambda, p.eta, p.delta, p.sigma, p.beta, p.c1, p.c2})
    if (!(v >= 0))
      throw InvariantError("sir: rates must be nonnegative");
  if (!(p.lambda > 0 && p.eta > 0))
    throw InvariantError("sir: recruitment and death rates must be positive");
  if (p.c3 < 0 || p.alpha1 < 0 || p.alpha2 < 0)
    throw InvariantError("sir: c3, alpha1, alpha2 must be nonnegative");

  ModelSpec model;
  model.name = "sir";
  model.domain = dom;
  model.m = 2;
  model.d = 1;  // components (I, S); the infected block is tracked
  model.ops = {EllipticOp{p.d2, 0.0, {}}, EllipticOp{p.d1, 0.0, {}}};

  const SirParams q = p;
  model.f1 = [q](const Field& x, Field& out) {
    const int n = x.dom->size();
    const double* I = x.comp(0);
    const double* S = x.comp(1);
    double* oI = out.comp(0);
    double* oS = out.comp(1);
    for (int i = 0; i < n; ++i) {
      const double den =
          1.0 + q.c1 * S[i] + q.c2 * I[i] + q.c3 * S[i] * I[i];
      oI[i] = -(q.eta + q.delta + q.sigma) + q.beta * S[i] / den;
      oS[i] = -q.eta - q.beta * I[i] / den;
    }
  };
  model.f2 = [q](const Field& x, Field& out) {
    const int n = x.dom->size();
    std::fill(out.comp(0), out.comp(0) + n, 0.0);
    std::fill(out.comp(1), out.comp(1) + n, q.lambda);
  };
  const double root = std::sqrt(dom->weighted_volume());
  model.sigma = [root](const Field& x, Field& out) {
    const int n = x.dom->size();
    for (int c = 0; c < 2; ++c) {
      const double* v = x.comp(c);
      double* o = out.comp(c);
      for (int i = 0; i < n; ++i) o[i] = root * v[i];
    }
  };
  model.sigma_lin = [root](const Field& x, Field& out) {
    std::fill(out.comp(0), out.comp(0) + x.dom->size(), root);
  };
  model.noise.species = {ChannelSpec{NoiseRule::ScalarBM, 1.0, {}, p.alpha2},
                         ChannelSpec{NoiseRule::ScalarBM, 1.0, {}, p.alpha1}};
  model.noise.independent = true;
  model.theta = {p.alpha1, p.alpha2};
  model.drift_degree = 1;
  model.finalize();
  model.default_init = Field(dom, 2, 0.0);
  const int n = dom->size();
  std::fill(model.default_init.comp(0), model.default_init.comp(0) + n, 0.1);
  std::fill(model.default_init.comp(1), model.default_init.comp(1) + n,
            p.lambda / p.eta);
  return model;
}

LvParams lv_constants(const SpectralDomain& dom, int m,
                      const std::vector<double>& growth,
                      const std::vector<double>& self,
                      const std::vector<std::vector<double>>& cross,
                      const std::vector<double>& diffusion) {
  LvParams p;
  p.m = m;
  for (int i = 0; i < m; ++i) {
    p.growth.push_back(constant_grid(dom, growth[i]));
    p.self.push_back(constant_grid(dom, self[i]));
    p.diffusion.push_back(diffusion[i]);
  }
  p.cross.resize(m);
  for (int i = 0; i < m; ++i) {
    p.cross[i].resize(m);
    for (int j = 0; j < m; ++j)
      p.cross[i][j] =
          (i == j) ? std::vector<double>() : constant_grid(dom, cross[i][j]);
  }
  p.noise.assign(m, ChannelSpec{NoiseRule::ScalarBM, 1.0, {}, 0.0});
  p.sigma_prime0.assign(m, 1.0);
  return p;
}

namespace {

// LV model over an arbitrary ordered species list; the first `tracked` of
// them form the u block.
ModelSpec build_lv_ordered(const LvParams& p,
                           const std::vector<int>& order, int tracked,
                           std::shared_ptr<const SpectralDomain> dom) {
  const int m = static_cast<int>(order.size());
  ModelSpec model;
  model.name = "lotka-volterra";
  model.domain = dom;
  model.m = m;
  model.d = tracked;
  for (int idx : order) {
    check_grid(*dom, p.growth[idx], "m_i", -1e18, false);
    check_grid(*dom, p.self[idx], "a_ii", 0.0, true);
    model.ops.push_back(EllipticOp{p.diffusion[idx], 0.0, {}});
  }
  const auto growth = p.growth;
  const auto self = p.self;
  const auto cross = p.cross;
  const auto ord = order;
  model.f1 = [growth, self, cross, ord](const Field& x, Field& out) {
    const int n = x.dom->size();
    const int mm = static_cast<int>(ord.size());
    for (int c = 0; c < mm; ++c) {
      const int i = ord[c];
      double* o = out.comp(c);
      const double* xi = x.comp(c);
      for (int g = 0; g < n; ++g) o[g] = growth[i][g] - self[i][g] * xi[g];
      for (int cj = 0; cj < mm; ++cj) {
        if (cj == c) continue;
        const int j = ord[cj];
        const auto& a = cross[i][j];
        if (a.empty()) continue;
        const double* xj = x.comp(cj);
        for (int g = 0; g < n; ++g) o[g] -= a[g] * xj[g];
      }
    }
  };
  std::vector<double> scalar_scale(m, 1.0);
  std::vector<char> is_scalar(m, 0);
  for (int c = 0; c < m; ++c) {
    const auto& ch = p.noise[order[c]];
    if (ch.rule == NoiseRule::ScalarBM) {
      is_scalar[c] = 1;
      scalar_scale[c] = std::sqrt(dom->weighted_volume());
    }
  }
  model.sigma = [scalar_scale](const Field& x, Field& out) {
    const int n = x.dom->size();
    for (int c = 0; c < x.m; ++c) {
      const double* v = x.comp(c);
      double* o = out.comp(c);
      const double s = scalar_scale[c];
      for (int i = 0; i < n; ++i) o[i] = s * v[i];
    }
  };
  std::vector<double> slopes(tracked);
  for (int c = 0; c < tracked; ++c) {
    const int i = order[c];
    const double sp = p.sigma_prime0.empty() ? 1.0 : p.sigma_prime0[i];
    slopes[c] = sp * scalar_scale[c];
  }
  model.sigma_lin = [slopes](const Field& x, Field& out) {
    const int n = x.dom->size();
    for (size_t c = 0; c < slopes.size(); ++c)
      std::fill(out.comp(static_cast<int>(c)),
                out.comp(static_cast<int>(c)) + n, slopes[c]);
  };
  model.noise.independent = p.independent;
  for (int idx : order) model.noise.species.push_back(p.noise[idx]);
  model.drift_degree = 2;
  model.finalize();
  model.default_init = Field(dom, m, 0.0);
  const int n = dom->size();
  for (int c = 0; c < m; ++c) {
    const int i = order[c];
    double acc = 0;
    for (int g = 0; g < n; ++g)
      acc += std::max(0.05, p.growth[i][g] / p.self[i][g]);
    std::fill(model.default_init.comp(c), model.default_init.comp(c) + n,
              acc / n);
  }
  return model;
}

}  // namespace

ModelSpec build_lv(const LvParams& p,
                   std::shared_ptr<const SpectralDomain> dom) {
  std::vector<int> order(p.m);
  for (int i = 0; i < p.m; ++i) order[i] = i;
  return build_lv_ordered(p, order, p.m, dom);
}

LvParams lv_face(const LvParams& p, const std::vector<int>& present) {
  LvParams q;
  q.m = static_cast<int>(present.size());
  q.independent = p.independent;
  for (int i : present) {
    q.growth.push_back(p.growth[i]);
    q.self.push_back(p.self[i]);
    q.diffusion.push_back(p.diffusion[i]);
    q.noise.push_back(p.noise[i]);
    q.sigma_prime0.push_back(p.sigma_prime0.empty() ? 1.0 : p.sigma_prime0[i]);
  }
  q.cross.resize(q.m);
  for (int a = 0; a < q.m; ++a) {
    q.cross[a].resize(q.m);
    for (int b = 0; b < q.m; ++b)
      if (a != b) q.cross[a][b] = p.cross[present[a]][present[b]];
  }
  return q;
}

ModelSpec build_lv_invasion(const LvParams& p, int k,
                            const std::vector<int>& present,
                            std::shared_ptr<const SpectralDomain> dom) {
  std::vector<int> order = {k};
  for (int i : present) {
    if (i == k) throw InvariantError("invasion: species k cannot be present");
    order.push_back(i);
  }
  return build_lv_ordered(p, order, 1, dom);
}

namespace {

Field face_equilibrium_guess(const LvParams& p, const std::vector<int>& present,
                             std::shared_ptr<const SpectralDomain> dom) {
  Field z(dom, static_cast<int>(present.size()), 0.0);
  const int n = dom->size();
  for (size_t c = 0; c < present.size(); ++c) {
    const int i = present[c];
    double acc = 0;
    for (int g = 0; g < n; ++g)
      acc += std::max(0.05, p.growth[i][g] / p.self[i][g]);
    std::fill(z.comp(static_cast<int>(c)), z.comp(static_cast<int>(c)) + n,
              acc / n);
  }
  return z;
}

bool face_stationary(const LvParams& p, const std::vector<int>& present,
                     std::shared_ptr<const SpectralDomain> dom,
                     const InvasionConfig& cfg) {
  if (present.empty()) return true;  // the origin face is trivially invariant
  LvParams q = lv_face(p, present);
  ModelSpec face = build_lv(q, dom);
  StepperConfig st = cfg.stepper;
  st.taming = std::max(st.taming, 1.0);
  OccupationMeasure occ(0.2 * cfg.pilot_T);
  LyapunovMonitor mon(&face);
  std::vector<Observer> obs = {make_monitor_observer(mon, occ, face, st.dt)};
  simulate(face, st, face.default_init, cfg.pilot_T, obs,
           TrajectoryRng{cfg.seed ^ 0xfaceu, 0});
  const auto verdict = persistence_verdict(occ, cfg.delta);
  return verdict.persistent;
}

InvasionEstimate invade_face(const LvParams& p, int k,
                             const std::vector<int>& present,
                             std::shared_ptr<const SpectralDomain> dom,
                             const InvasionConfig& cfg) {
  if (cfg.check_boundary && !face_stationary(p, present, dom, cfg))
    throw Error("invasion: boundary system is not stationary");
  ModelSpec inv = build_lv_invasion(p, k, present, dom);
  LinearizedModel lin(std::move(inv));

  LambdaConfig lc;
  lc.stepper = cfg.stepper;
  lc.stepper.taming = std::max(lc.stepper.taming, 1.0);
  lc.burn_in = cfg.burn_in;
  lc.T = cfg.T;
  lc.paths = std::max(cfg.replicas, 2);
  lc.seed = cfg.seed;
  lc.jobs = cfg.jobs;
  lc.z_init = face_equilibrium_guess(p, present, dom);
  const LambdaEstimate est = estimate_lambda(lin, lc);

  InvasionEstimate out;
  out.multimodal = est.multimodal;
  out.nonstationary = est.nonstationary;
  double lo = 1e300, hi = -1e300;
  int argmin = 0;
  for (size_t i = 0; i < est.per_path.size(); ++i) {
    const double rate = -est.per_path[i].h_avg;
    out.per_replica.push_back(rate);
    if (rate < lo) {
      lo = rate;
      argmin = static_cast<int>(i);
    }
    hi = std::max(hi, rate);
  }
  out.r_hat = lo;
  out.spread = hi - lo;
  out.stderr_hat = est.per_path[argmin].h_se;
  return out;
}

}  // namespace

InvasionEstimate invasion_rate(const LvParams& p, int k,
                               std::shared_ptr<const SpectralDomain> dom,
                               const InvasionConfig& cfg) {
  if (k < 0 || k >= p.m) throw InvariantError("invasion: bad species index");
  std::vector<int> present;
  for (int i = 0; i < p.m; ++i)
    if (i != k) present.push_back(i);
  return invade_face(p, k, present, dom, cfg);
}

CoexistenceReport coexistence_check(const LvParams& p,
                                    std::shared_ptr<const SpectralDomain> dom,
                                    const InvasionConfig& cfg) {
  CoexistenceReport report;
  if (p.m > 4)
    throw InvariantError("coexistence: face enumeration supported for m <= 4");
  if (p.m == 1) {
    // single species: the verdict reduces to its persistence diagnostic
    ModelSpec model = build_lv(p, dom);
    StepperConfig st = cfg.stepper;
    st.taming = std::max(st.taming, 1.0);
    OccupationMeasure occ(0.2 * cfg.pilot_T);
    LyapunovMonitor mon(&model);
    std::vector<Observer> obs = {make_monitor_observer(mon, occ, model, st.dt)};
    simulate(model, st, model.default_init, cfg.pilot_T, obs,
             TrajectoryRng{cfg.seed, 0});
    const auto verdict = persistence_verdict(occ, cfg.delta);
    report.coexistence = verdict.persistent;
    report.min_max_rate = verdict.persistent ? 1.0 : -1.0;
    return report;
  }

  report.min_max_rate = 1e300;
  for (unsigned mask = 1; mask + 1 < (1u << p.m); ++mask) {
    FaceResult face;
    for (int i = 0; i < p.m; ++i)
      if (mask & (1u << i)) face.present.push_back(i);
    face.reachable = face_stationary(p, face.present, dom, cfg);
    if (face.reachable) {
      face.max_rate = -1e300;
      for (int k = 0; k < p.m; ++k) {
        if (mask & (1u << k)) continue;
        InvasionConfig sub = cfg;
        sub.check_boundary = false;  // already verified
        const InvasionEstimate est = invade_face(p, k, face.present, dom, sub);
        face.invaders.push_back(k);
        face.rates.push_back(est.r_hat);
        face.max_rate = std::max(face.max_rate, est.r_hat);
      }
      report.min_max_rate = std::min(report.min_max_rate, face.max_rate);
    }
    report.faces.push_back(std::move(face));
  }
  report.coexistence = report.min_max_rate > 0 && report.min_max_rate < 1e300;
  return report;
}

}  // namespace persim
