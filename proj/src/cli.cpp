#include "persim/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "persim/config.hpp"
#include "persim/delay_sfde.hpp"
#include "persim/eigensolver.hpp"
#include "persim/io.hpp"
#include "persim/models.hpp"

namespace persim {

namespace {

struct RunContext {
  Config cfg;
  std::string out_dir;
  std::string id;
  uint64_t seed = 1;
  int jobs = 0;
  bool svg = false;
  std::string subcommand;
};

std::shared_ptr<const SpectralDomain> domain_from_config(const Config& cfg) {
  const std::string kind_s = cfg.get_string("domain.kind", "torus");
  DomainKind kind;
  if (kind_s == "torus")
    kind = DomainKind::Torus;
  else if (kind_s == "neumann-interval")
    kind = DomainKind::NeumannInterval;
  else
    throw InvariantError("config: key 'domain.kind' must be torus or "
                         "neumann-interval, got '" +
                         kind_s + "'");
  const int dim = cfg.get_int("domain.dim", 1);
  std::vector<double> extents = {cfg.get_double("domain.extent", 2 * M_PI)};
  std::vector<int> sizes = {cfg.get_int("domain.n", 64)};
  if (dim == 2) {
    extents.push_back(cfg.get_double("domain.extent_y", extents[0]));
    sizes.push_back(cfg.get_int("domain.n_y", sizes[0]));
  }
  return SpectralDomain::build(kind, dim, extents, sizes);
}

ModelSpec model_from_config(const Config& cfg,
                            std::shared_ptr<const SpectralDomain>& dom) {
  const std::string name = cfg.get_string("model.name");
  if (name == "kpp") {
    dom = domain_from_config(cfg);
    KppParams p;
    p.eps = cfg.get_double("model.eps", 0.0);
    return build_kpp(p, dom);
  }
  if (name == "gbm") {
    dom = domain_from_config(cfg);
    GbmParams p;
    p.drift = cfg.get_double("model.drift", 0.0);
    p.sigma0 = cfg.get_double("model.sigma0", 0.0);
    p.diffusion = cfg.get_double("model.diffusion", 1.0);
    return build_gbm(p, dom);
  }
  if (name == "logistic") {
    auto plain = domain_from_config(cfg);
    LogisticParams p;
    p.diffusion = cfg.get_double("model.diffusion", 1.0);
    p.K = cfg.get_profile("model.K", *plain, 1.0);
    p.r = cfg.get_profile("model.r", *plain, 1.0);
    p.E = cfg.get_profile("model.E", *plain, 0.0);
    p.eps = cfg.get_double("model.eps", 0.0);
    dom = make_logistic_domain(plain->kind(), plain->extent(0),
                               plain->grid_size(0), p.K);
    return build_logistic(p, dom);
  }
  if (name == "sir") {
    dom = domain_from_config(cfg);
    SirParams p;
    p.lambda = cfg.get_double("model.lambda", p.lambda);
    p.eta = cfg.get_double("model.eta", p.eta);
    p.delta = cfg.get_double("model.delta", p.delta);
    p.sigma = cfg.get_double("model.sigma", p.sigma);
    p.beta = cfg.get_double("model.beta", p.beta);
    p.c1 = cfg.get_double("model.c1", p.c1);
    p.c2 = cfg.get_double("model.c2", p.c2);
    p.c3 = cfg.get_double("model.c3", p.c3);
    p.d1 = cfg.get_double("model.d1", p.d1);
    p.d2 = cfg.get_double("model.d2", p.d2);
    p.alpha1 = cfg.get_double("model.alpha1", p.alpha1);
    p.alpha2 = cfg.get_double("model.alpha2", p.alpha2);
    return build_sir(p, dom);
  }
  if (name == "lv") {
    dom = domain_from_config(cfg);
    const int m = cfg.get_int("model.species", 2);
    const auto growth = cfg.get_list("model.growth");
    const auto self = cfg.get_list("model.self");
    const auto cross_flat = cfg.get_list("model.cross");
    const auto diff = cfg.get_list("model.diffusion",
                                   std::vector<double>(m, 1.0));
    if (static_cast<int>(growth.size()) != m ||
        static_cast<int>(self.size()) != m ||
        static_cast<int>(cross_flat.size()) != m * m)
      throw InvariantError(
          "config: model.growth/model.self need m entries and model.cross "
          "m*m entries");
    std::vector<std::vector<double>> cross(m, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) cross[i][j] = cross_flat[i * m + j];
    LvParams p = lv_constants(*dom, m, growth, self, cross, diff);
    const auto eps = cfg.get_list("model.noise_eps", std::vector<double>(m, 0.0));
    const std::string rule = cfg.get_string("model.noise", "scalar-bm");
    for (int i = 0; i < m; ++i) {
      ChannelSpec ch;
      if (rule == "scalar-bm")
        ch.rule = NoiseRule::ScalarBM;
      else if (rule == "white")
        ch.rule = NoiseRule::White;
      else if (rule.rfind("sobolev:", 0) == 0) {
        ch.rule = NoiseRule::Sobolev;
        ch.alpha = std::stod(rule.substr(8));
      } else {
        throw InvariantError("config: key 'model.noise' has unknown rule '" +
                             rule + "'");
      }
      ch.strength = eps[i];
      p.noise[i] = ch;
    }
    return build_lv(p, dom);
  }
  throw InvariantError("config: key 'model.name' has unknown model '" + name +
                       "'");
}

StepperConfig stepper_from_config(const Config& cfg, const ModelSpec& model) {
  StepperConfig st;
  st.dt = cfg.get_double("stepper.dt", 1e-3);
  const std::string scheme =
      cfg.get_string("stepper.scheme", "exponential-euler");
  if (scheme == "exponential-euler")
    st.scheme = Scheme::ExponentialEuler;
  else if (scheme == "semi-implicit")
    st.scheme = Scheme::SemiImplicit;
  else
    throw InvariantError("config: key 'stepper.scheme' has unknown scheme '" +
                         scheme + "'");
  st.taming =
      cfg.get_double("stepper.taming", model.drift_degree >= 2 ? 1.0 : 0.0);
  const std::string pos = cfg.get_string("stepper.positivity", "clip");
  if (pos == "clip")
    st.positivity = PositivityMode::Clip;
  else if (pos == "reject")
    st.positivity = PositivityMode::Reject;
  else
    throw InvariantError("config: key 'stepper.positivity' must be clip or "
                         "reject");
  validate_stepper(st);
  return st;
}

Field initial_from_config(const Config& cfg, const ModelSpec& model) {
  Field x0 = model.default_init;
  if (cfg.has("init.value")) {
    const auto vals = cfg.get_list("init.value");
    const int n = model.domain->size();
    for (int c = 0; c < model.m && c < static_cast<int>(vals.size()); ++c)
      std::fill(x0.comp(c), x0.comp(c) + n, vals[c]);
  }
  return x0;
}

void write_manifest(const RunContext& rc) {
  std::ofstream out(rc.out_dir + "/manifest");
  out << "run_id = " << rc.id << "\n";
  out << "subcommand = " << rc.subcommand << "\n";
  out << "seed = " << rc.seed << "\n";
  out << "jobs = " << rc.jobs << "\n";
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  out << "timestamp = "
      << std::chrono::duration_cast<std::chrono::seconds>(now).count() << "\n";
  out << "# config\n" << rc.cfg.canonical();
}

void write_summary(const RunContext& rc,
                   const std::vector<std::pair<std::string, double>>& kv) {
  std::vector<std::string> header;
  std::vector<double> row;
  for (const auto& [k, v] : kv) {
    header.push_back(k);
    row.push_back(v);
  }
  CsvWriter csv(rc.out_dir + "/summary.csv", header);
  csv.row(row);
}

void write_histograms(const RunContext& rc, const OccupationMeasure& occ) {
  CsvWriter csv(rc.out_dir + "/histogram.csv",
                {"kind", "bin_lo", "bin_hi", "mass"});
  for (const auto& bin : occ.mass_histogram())
    csv.raw_row("L1," + format_value(bin.lo) + "," + format_value(bin.hi) +
                "," + format_value(bin.mass));
  for (const auto& bin : occ.linf_histogram())
    csv.raw_row("Linf," + format_value(bin.lo) + "," + format_value(bin.hi) +
                "," + format_value(bin.mass));
}

struct TraceBuffer {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  void init(const std::vector<std::string>& n) {
    names = n;
    cols.assign(n.size(), {});
  }
  void push(const std::vector<double>& row) {
    for (size_t i = 0; i < row.size(); ++i) cols[i].push_back(row[i]);
  }
  void write_csv(const std::string& path) const {
    CsvWriter csv(path, names);
    if (cols.empty()) return;
    for (size_t r = 0; r < cols[0].size(); ++r) {
      std::vector<double> row;
      for (const auto& c : cols) row.push_back(c[r]);
      csv.row(row);
    }
  }
};

int trace_stride(const Config& cfg, int steps) {
  const int target = cfg.get_int("output.trace_points", 2000);
  return std::max(1, steps / std::max(1, target));
}

int cmd_simulate(RunContext& rc, bool with_verdict) {
  std::shared_ptr<const SpectralDomain> dom;
  ModelSpec model = model_from_config(rc.cfg, dom);
  validate_model(model);
  StepperConfig st = stepper_from_config(rc.cfg, model);
  const double T = rc.cfg.get_double("run.T", 10.0);
  const double burn = rc.cfg.get_double("run.burn_in", 0.0);
  Field x0 = initial_from_config(rc.cfg, model);

  LyapunovMonitor mon(&model, rc.cfg.get_double("lyapunov.beta", -0.3));
  OccupationMeasure occ(burn);
  if (rc.cfg.has("persist.band_lo"))
    occ.register_band(rc.cfg.get_double("persist.band_lo"),
                      rc.cfg.get_double("persist.band_hi"));

  const int steps = std::max(1, static_cast<int>(std::llround(T / st.dt)));
  const int stride = trace_stride(rc.cfg, steps);
  TraceBuffer trace;
  std::vector<std::string> names = {"t"};
  for (int c = 0; c < model.m; ++c) names.push_back("L1_" + std::to_string(c + 1));
  names.insert(names.end(), {"Linf", "W1", "W2", "V"});
  trace.init(names);

  std::vector<Observer> obs = {make_monitor_observer(mon, occ, model, st.dt)};
  obs.push_back([&](int step, double t, const Field& x) {
    if (step % stride != 0 && step != steps) return;
    std::vector<double> row = {t};
    double linf = 0;
    for (int c = 0; c < x.m; ++c) {
      row.push_back(x.dom->l1(x.comp(c)));
      linf = std::max(linf, x.dom->linf(x.comp(c)));
    }
    const auto mv = mon.last();
    row.insert(row.end(), {linf, mv.W1, mv.W2, mv.V});
    trace.push(row);
  });

  const TrajectoryStats stats =
      simulate(model, st, x0, T, obs, TrajectoryRng{rc.seed, 0});

  trace.write_csv(rc.out_dir + "/trace.csv");
  write_histograms(rc, occ);
  std::vector<std::pair<std::string, double>> kv = {
      {"steps", static_cast<double>(stats.steps)},
      {"T", stats.time},
      {"max_clip_rel", stats.max_clip_rel},
  };
  for (int c = 0; c < model.m; ++c)
    kv.emplace_back("final_L1_" + std::to_string(c + 1),
                    model.domain->l1(stats.final_state.comp(c)));
  if (with_verdict) {
    const double delta = rc.cfg.get_double("persist.delta", 0.05);
    const auto verdict = persistence_verdict(occ, delta);
    kv.insert(kv.end(), {{"persistent", verdict.persistent ? 1.0 : 0.0},
                         {"band_lo", verdict.b},
                         {"band_hi", verdict.B},
                         {"fraction", verdict.fraction}});
  }
  for (const auto& band : occ.bands())
    kv.emplace_back("user_band_fraction",
                    occ.observed_time() > 0 ? band.fraction / occ.observed_time()
                                            : 0.0);
  write_summary(rc, kv);
  if (rc.svg) write_svg(rc.out_dir + "/trace.svg", trace.names, trace.cols);
  return 0;
}

int cmd_lambda(RunContext& rc) {
  std::shared_ptr<const SpectralDomain> dom;
  ModelSpec model = model_from_config(rc.cfg, dom);
  validate_model(model);
  StepperConfig st = stepper_from_config(rc.cfg, model);
  st.taming = 0;  // boundary dynamics are linear in the tracked block
  LinearizedModel lin(std::move(model));

  LambdaConfig lc;
  lc.stepper = st;
  lc.burn_in = rc.cfg.get_double("estimator.burn_in", 1.0);
  lc.T = rc.cfg.get_double("estimator.T", 20.0);
  lc.paths = rc.cfg.get_int("estimator.paths", 4);
  lc.seed = rc.seed;
  lc.jobs = rc.jobs;
  lc.antithetic = rc.cfg.get_bool("estimator.antithetic", false);
  const LambdaEstimate est = estimate_lambda(lin, lc);

  // single traced path for the artifact
  const int steps =
      std::max(1, static_cast<int>(std::llround(lc.T / st.dt)));
  const int stride = trace_stride(rc.cfg, steps);
  TraceBuffer trace;
  std::vector<std::string> names = {"t"};
  for (int c = 0; c < lin.model().m; ++c)
    names.push_back("L1_" + std::to_string(c + 1));
  names.insert(names.end(), {"Linf", "W1", "W2", "V", "H"});
  trace.init(names);
  LyapunovMonitor mon(&lin.model(), rc.cfg.get_double("lyapunov.beta", -0.3));
  Field assembled(lin.model().domain, lin.model().m, 0.0);
  ProjectiveRunConfig pr;
  pr.stepper = st;
  pr.burn_in = lc.burn_in;
  pr.T = lc.T;
  pr.observer = [&](int step, double t, double H, double, const Field& v,
                    const Field& z) {
    if (step % stride != 0 && step != steps) return;
    std::vector<double> row = {t};
    double linf = 0;
    for (int c = 0; c < v.m; ++c) {
      row.push_back(v.dom->l1(v.comp(c)));
      linf = std::max(linf, v.dom->linf(v.comp(c)));
    }
    const int n = z.dom ? z.dom->size() : 0;
    for (int c = 0; c < z.m; ++c) {
      row.push_back(z.dom->l1(z.comp(c)));
      linf = std::max(linf, z.dom->linf(z.comp(c)));
      std::copy(z.comp(c), z.comp(c) + n, assembled.comp(lin.d() + c));
    }
    // monitors of the boundary state (0, z); V is infinite on {r = 0}
    const auto mv = mon.evaluate(assembled);
    row.insert(row.end(),
               {linf, mv.W1, mv.W2, std::numeric_limits<double>::infinity(), H});
    trace.push(row);
  };
  const auto v_inits = make_v_inits(lin.model().domain, lin.d(), 1);
  run_projective_path(lin, pr, v_inits[0], lin.default_z(),
                      TrajectoryRng{rc.seed, 0});
  trace.write_csv(rc.out_dir + "/trace.csv");

  write_summary(rc, {{"lambda_hat", est.lambda_hat},
                     {"stderr", est.stderr_hat},
                     {"log_growth_hat", est.log_growth_hat},
                     {"agreement_gap", est.agreement_gap},
                     {"estimators_agree", est.estimators_agree ? 1.0 : 0.0},
                     {"multimodal", est.multimodal ? 1.0 : 0.0},
                     {"nonstationary", est.nonstationary ? 1.0 : 0.0},
                     {"paths", static_cast<double>(lc.paths)}});
  if (rc.svg) write_svg(rc.out_dir + "/trace.svg", trace.names, trace.cols);
  return 0;
}

int cmd_eigen(RunContext& rc) {
  std::shared_ptr<const SpectralDomain> dom;
  ModelSpec model = model_from_config(rc.cfg, dom);
  LinearizedModel lin(std::move(model));
  // potential = f̂ at the default boundary state
  Field fhat(lin.model().domain, lin.d());
  lin.eval_fhat(lin.default_z(), fhat);
  std::vector<double> potential(fhat.comp(0),
                                fhat.comp(0) + lin.model().domain->size());
  const double tol = rc.cfg.get_double("eigen.tol", 1e-9);
  const auto res = principal_eig(lin.model().spectra[0], potential, tol);

  CsvWriter csv(rc.out_dir + "/eigenfield.csv", {"x", "value"});
  for (int i = 0; i < lin.model().domain->size(); ++i)
    csv.row({lin.model().domain->coord(i, 0), res.eigenfield.comp(0)[i]});
  write_summary(rc, {{"lambda", res.lambda},
                     {"residual", res.residual},
                     {"iterations", static_cast<double>(res.iterations)},
                     {"tau", res.tau}});
  return 0;
}

LvParams lv_from_config(const Config& cfg, const SpectralDomain& dom) {
  const int m = cfg.get_int("model.species", 2);
  const auto growth = cfg.get_list("model.growth");
  const auto self = cfg.get_list("model.self");
  const auto cross_flat = cfg.get_list("model.cross");
  const auto diff = cfg.get_list("model.diffusion", std::vector<double>(m, 1.0));
  std::vector<std::vector<double>> cross(m, std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) cross[i][j] = cross_flat[i * m + j];
  LvParams p = lv_constants(dom, m, growth, self, cross, diff);
  const auto eps = cfg.get_list("model.noise_eps", std::vector<double>(m, 0.0));
  for (int i = 0; i < m; ++i) p.noise[i].strength = eps[i];
  return p;
}

InvasionConfig invasion_config(const RunContext& rc, const ModelSpec& model) {
  InvasionConfig ic;
  ic.stepper = stepper_from_config(rc.cfg, model);
  ic.burn_in = rc.cfg.get_double("estimator.burn_in", 5.0);
  ic.T = rc.cfg.get_double("estimator.T", 50.0);
  ic.replicas = rc.cfg.get_int("invade.replicas", 8);
  ic.seed = rc.seed;
  ic.jobs = rc.jobs;
  ic.pilot_T = rc.cfg.get_double("invade.pilot_T", 50.0);
  ic.delta = rc.cfg.get_double("persist.delta", 0.05);
  return ic;
}

int cmd_invade(RunContext& rc) {
  std::shared_ptr<const SpectralDomain> dom;
  ModelSpec model = model_from_config(rc.cfg, dom);  // validates LV structure
  LvParams p = lv_from_config(rc.cfg, *dom);
  const int k = rc.cfg.get_int("invade.k", 1);
  const InvasionConfig ic = invasion_config(rc, model);
  const InvasionEstimate est = invasion_rate(p, k, dom, ic);

  CsvWriter csv(rc.out_dir + "/replicas.csv", {"replica", "rate"});
  for (size_t i = 0; i < est.per_replica.size(); ++i)
    csv.row({static_cast<double>(i), est.per_replica[i]});
  write_summary(rc, {{"r_hat", est.r_hat},
                     {"stderr", est.stderr_hat},
                     {"spread", est.spread},
                     {"multimodal", est.multimodal ? 1.0 : 0.0},
                     {"nonstationary", est.nonstationary ? 1.0 : 0.0}});
  return 0;
}

int cmd_coexist(RunContext& rc) {
  std::shared_ptr<const SpectralDomain> dom;
  ModelSpec model = model_from_config(rc.cfg, dom);
  LvParams p = lv_from_config(rc.cfg, *dom);
  const InvasionConfig ic = invasion_config(rc, model);
  const CoexistenceReport report = coexistence_check(p, dom, ic);

  CsvWriter csv(rc.out_dir + "/faces.csv",
                {"face_mask", "reachable", "invader", "rate"});
  for (const auto& face : report.faces) {
    unsigned mask = 0;
    for (int i : face.present) mask |= 1u << i;
    if (face.invaders.empty())
      csv.row({static_cast<double>(mask), face.reachable ? 1.0 : 0.0, -1, 0});
    for (size_t i = 0; i < face.invaders.size(); ++i)
      csv.row({static_cast<double>(mask), face.reachable ? 1.0 : 0.0,
               static_cast<double>(face.invaders[i]), face.rates[i]});
  }
  write_summary(rc, {{"coexistence", report.coexistence ? 1.0 : 0.0},
                     {"min_max_rate", report.min_max_rate}});
  return 0;
}

int cmd_delay(RunContext& rc) {
  const int n = rc.cfg.get_int("delay.species", 1);
  const double r = rc.cfg.get_double("delay.delay", 0.5);
  const double dt = rc.cfg.get_double("stepper.dt", 1e-3);
  const auto growth = rc.cfg.get_list("delay.growth", std::vector<double>(n, 1.0));
  const auto self_flat =
      rc.cfg.get_list("delay.interaction", std::vector<double>(n * n, 0.0));
  const auto g0 = rc.cfg.get_list("delay.g0", std::vector<double>(n, 0.0));

  SfdeModel model;
  model.n = n;
  model.delay = r;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(n);
    for (int j = 0; j < n; ++j) row[j] = self_flat[i * n + j];
    const double gi = growth[i];
    const double rr = r;
    model.f.push_back([gi, row, rr](const PathSegment& seg) {
      double v = gi;
      for (size_t j = 0; j < row.size(); ++j)
        v -= row[j] * seg.value(static_cast<int>(j), -rr);
      return v;
    });
    const double gg = g0[i];
    model.g.push_back([gg](const PathSegment&) { return gg; });
  }
  model.covariance.assign(n, std::vector<double>(n, 0.0));
  const auto cov_diag = rc.cfg.get_list("delay.cov", std::vector<double>(n, 1.0));
  for (int i = 0; i < n; ++i) model.covariance[i][i] = cov_diag[i];
  model.finalize();

  const auto init_vals =
      rc.cfg.get_list("init.value", std::vector<double>(n, 0.5));
  auto init = [init_vals](int i, double) { return init_vals[i]; };

  const int invader = rc.cfg.get_int("delay.invader", 0);
  BoundaryInvasionConfig bic;
  bic.dt = dt;
  bic.burn_in = rc.cfg.get_double("estimator.burn_in", 10.0);
  bic.T = rc.cfg.get_double("estimator.T", 100.0);
  bic.seed = rc.seed;
  const auto inv = boundary_invasion(model, invader, init, bic);

  const double T = rc.cfg.get_double("run.T", 100.0);
  const double burn = rc.cfg.get_double("run.burn_in", 10.0);
  const double delta = rc.cfg.get_double("persist.delta", 0.05);
  const auto pers = delay_persistence(model, init, dt, burn, T, delta, rc.seed);

  // trace one path
  PathSegment seg(n, r, dt);
  seg.fill(init);
  const int steps = std::max(1, static_cast<int>(std::llround(T / dt)));
  const int stride = trace_stride(rc.cfg, steps);
  TraceBuffer trace;
  std::vector<std::string> names = {"t"};
  for (int i = 0; i < n; ++i) names.push_back("X_" + std::to_string(i + 1));
  trace.init(names);
  TrajectoryRng rng{rc.seed, 0};
  for (int k = 0; k < steps; ++k) {
    sfde_step(model, seg, dt, rng, static_cast<uint64_t>(k));
    if ((k + 1) % stride == 0 || k + 1 == steps) {
      std::vector<double> row = {(k + 1) * dt};
      for (int i = 0; i < n; ++i) row.push_back(seg.head(i));
      trace.push(row);
    }
  }
  trace.write_csv(rc.out_dir + "/trace.csv");

  write_summary(rc, {{"lambda_hat", inv.lambda_hat},
                     {"stderr", inv.stderr_hat},
                     {"nonstationary", inv.nonstationary ? 1.0 : 0.0},
                     {"persistent", pers.verdict.persistent ? 1.0 : 0.0},
                     {"band_lo", pers.verdict.b},
                     {"band_hi", pers.verdict.B},
                     {"fraction", pers.verdict.fraction},
                     {"joint_fraction", pers.joint_fraction}});
  if (rc.svg) write_svg(rc.out_dir + "/trace.svg", trace.names, trace.cols);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"stochastic persistence simulation toolkit"};
  app.require_subcommand(1);
  std::string config_path, out_root = "out";
  uint64_t seed = 1;
  int jobs = 0;
  bool svg = false;
  for (const char* name :
       {"simulate", "lambda", "eigen", "invade", "coexist", "delay", "persist"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--jobs", jobs, "worker cap (0 = hardware)");
    sub->add_option("--out", out_root, "output root directory");
    sub->add_flag("--svg", svg, "emit SVG plots of trace columns");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  RunContext rc;
  try {
    rc.cfg = Config::parse_file(config_path);
    auto* sub = app.get_subcommands().front();
    rc.subcommand = sub->get_name();
    rc.seed = rc.cfg.get_u64("run.seed", seed);
    if (sub->count("--seed") > 0) rc.seed = seed;  // flag wins
    const int cfg_jobs = rc.cfg.get_int("run.jobs", 0);
    rc.jobs = jobs > 0 ? jobs : cfg_jobs;
    rc.svg = svg;
    rc.id = run_id(rc.cfg.canonical() + rc.subcommand, rc.seed);
    rc.out_dir = out_root + "/" + rc.id;
    ensure_dir(rc.out_dir);
    write_manifest(rc);

    int code = 0;
    if (rc.subcommand == "simulate")
      code = cmd_simulate(rc, false);
    else if (rc.subcommand == "persist")
      code = cmd_simulate(rc, true);
    else if (rc.subcommand == "lambda")
      code = cmd_lambda(rc);
    else if (rc.subcommand == "eigen")
      code = cmd_eigen(rc);
    else if (rc.subcommand == "invade")
      code = cmd_invade(rc);
    else if (rc.subcommand == "coexist")
      code = cmd_coexist(rc);
    else if (rc.subcommand == "delay")
      code = cmd_delay(rc);
    if (code != 0) return code;

    const auto leftovers = rc.cfg.unread();
    if (!leftovers.empty()) {
      std::cerr << "config: unknown key '" << leftovers.front() << "'\n";
      return 2;
    }
    return 0;
  } catch (const BlowupError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return 3;
  } catch (const InvariantError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace persim
