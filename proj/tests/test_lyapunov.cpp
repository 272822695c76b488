#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "persim/models.hpp"

using namespace persim;

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

std::shared_ptr<const SpectralDomain> torus64() {
  return SpectralDomain::build(DomainKind::Torus, 1, {kTwoPi}, {64});
}
}  // namespace

TEST_CASE("splice function g and the log-distance V") {
  CHECK(smooth_ramp(0.0) == 0.0);
  CHECK(smooth_ramp(-3.0) == 0.0);
  CHECK(smooth_ramp(1.0) == doctest::Approx(1.0));
  CHECK(smooth_ramp(2.5) == doctest::Approx(2.5));
  // C² splice: finite differences of g match x at 1 and 0 at 0
  const double h = 1e-6;
  CHECK((smooth_ramp(1 + h) - smooth_ramp(1 - h)) / (2 * h) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK((smooth_ramp(h) - smooth_ramp(-h)) / (2 * h) ==
        doctest::Approx(0.0).epsilon(1e-6));
  // V at r = e⁻² equals 2, V vanishes for r ≥ 1
  CHECK(log_distance(std::exp(-2.0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(log_distance(1.0) == 0.0);
  CHECK(log_distance(3.7) == 0.0);
  // continuity across both splice points
  CHECK(log_distance(std::exp(-1.0) * (1 + 1e-9)) ==
        doctest::Approx(log_distance(std::exp(-1.0) * (1 - 1e-9))).epsilon(1e-6));
}

TEST_CASE("monitors: zero field gives W2 = 1; W1, W2 >= 1") {
  auto dom = torus64();
  ModelSpec kpp = build_kpp(KppParams{0.0}, dom);
  LyapunovMonitor mon(&kpp);
  const auto mv0 = mon.evaluate(Field(dom, 1, 0.0));
  CHECK(mv0.W2 == doctest::Approx(1.0));
  CHECK(mv0.W1 == doctest::Approx(1.0));
  SequentialRng rng(4);
  Field x(dom, 1);
  for (double& v : x.data) v = std::abs(rng.normal());
  const auto mv = mon.evaluate(x);
  CHECK(mv.W1 >= 1.0);
  CHECK(mv.W2 == doctest::Approx(1.0 + norms(x).l1).epsilon(1e-12));
}

TEST_CASE("occupation measure accounting") {
  OccupationMeasure occ(1.0);  // burn-in 1
  occ.register_band(0.5, 2.0);
  for (int k = 0; k < 3000; ++k) occ.add(1.0, 1.0, 1e-2);
  CHECK(occ.total_time() == doctest::Approx(30.0));
  // the burn-in cut lands within one sample of the nominal boundary
  CHECK(occ.observed_time() == doctest::Approx(29.0).epsilon(1e-3));

  double total = 0;
  for (const auto& bin : occ.mass_histogram()) total += bin.mass;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(occ.bands()[0].fraction / occ.observed_time() == doctest::Approx(1.0));

  // trajectory entirely inside a band reports fraction 1
  const auto verdict = persistence_verdict(occ, 0.05);
  CHECK(verdict.persistent);
  CHECK(verdict.fraction == doctest::Approx(1.0));
  CHECK(verdict.b <= 1.0);
  CHECK(verdict.B >= 1.0);
}

TEST_CASE("occupation merge is associative in effect") {
  OccupationMeasure a(0), b(0);
  for (int k = 0; k < 100; ++k) a.add(1.0 + 0.01 * k, 1.0, 0.1);
  for (int k = 0; k < 50; ++k) b.add(10.0, 2.0, 0.1);
  OccupationMeasure ab(0);
  ab.merge(a);
  ab.merge(b);
  CHECK(ab.observed_time() == doctest::Approx(15.0));
  double total = 0;
  for (const auto& bin : ab.mass_histogram()) total += bin.mass;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("persistence verdicts for the worked models") {
  auto dom = torus64();

  SUBCASE("deterministic KPP is persistent with the band at mass 2π") {
    ModelSpec kpp = build_kpp(KppParams{0.0}, dom);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.taming = 1.0;
    LyapunovMonitor mon(&kpp);
    OccupationMeasure occ(10.0);
    std::vector<Observer> obs = {make_monitor_observer(mon, occ, kpp, cfg.dt)};
    simulate(kpp, cfg, Field(dom, 1, 0.1), 60.0, obs, TrajectoryRng{1, 0});
    const auto verdict = persistence_verdict(occ, 0.05);
    CHECK(verdict.persistent);
    CHECK(verdict.b <= kTwoPi);
    CHECK(verdict.B >= kTwoPi * 0.9);
    CHECK(verdict.fraction >= 0.95);
  }

  SUBCASE("pure decay du = −u dt is not persistent") {
    ModelSpec decay;
    decay.domain = dom;
    decay.m = decay.d = 1;
    decay.ops = {EllipticOp{1.0, 1.0, {}}};
    decay.finalize();
    StepperConfig cfg;
    cfg.dt = 1e-2;
    LyapunovMonitor mon(&decay);
    OccupationMeasure occ(0.0);
    std::vector<Observer> obs = {make_monitor_observer(mon, occ, decay, cfg.dt)};
    simulate(decay, cfg, Field(dom, 1, 1.0), 60.0, obs, TrajectoryRng{1, 0});
    CHECK_FALSE(persistence_verdict(occ, 0.05).persistent);
  }

  SUBCASE("geometric BM with negative log-drift is not persistent") {
    // a − σ²/2 = 1 − 50·... : use a = 0, σ = 2 ⇒ log-drift −2
    ModelSpec gbm = build_gbm(GbmParams{0.0, 2.0, 1.0}, dom);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    LyapunovMonitor mon(&gbm);
    OccupationMeasure occ(0.0);
    std::vector<Observer> obs = {make_monitor_observer(mon, occ, gbm, cfg.dt)};
    simulate(gbm, cfg, Field(dom, 1, 1.0), 40.0, obs, TrajectoryRng{12, 0});
    CHECK_FALSE(persistence_verdict(occ, 0.05).persistent);
  }

  SUBCASE("insufficient samples raise") {
    OccupationMeasure occ(10.0);
    occ.add(1.0, 1.0, 0.5);  // still inside burn-in
    CHECK_THROWS_AS(persistence_verdict(occ, 0.05), InvariantError);
  }
}

TEST_CASE("drift check statistics") {
  auto dom = torus64();

  SUBCASE("KPP increments of W2 at large mass are negative in mean") {
    ModelSpec kpp = build_kpp(KppParams{0.05}, dom);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.taming = 1.0;
    LyapunovMonitor mon(&kpp);
    OccupationMeasure occ(0.0);
    std::vector<Observer> obs = {make_monitor_observer(mon, occ, kpp, cfg.dt)};
    simulate(kpp, cfg, Field(dom, 1, 10.0 / kTwoPi * 1.6), 6.0, obs,
             TrajectoryRng{5, 0});
    const auto stats = drift_check(mon.drift_samples(), cfg.dt);
    CHECK(stats.violations == 0);
    // mean W2 rate near mass 10 is strongly negative
    bool found = false;
    for (const auto& [mass, rate] : stats.bin_means)
      if (mass > 9.0 && mass < 11.5) {
        CHECK(rate < 0.0);
        found = true;
      }
    CHECK(found);
  }

  SUBCASE("heat conserves mass: increments vanish") {
    ModelSpec heat;
    heat.domain = dom;
    heat.m = heat.d = 1;
    heat.ops = {EllipticOp{1.0, 0.0, {}}};
    heat.finalize();
    StepperConfig cfg;
    cfg.dt = 1e-3;
    LyapunovMonitor mon(&heat);
    OccupationMeasure occ(0.0);
    std::vector<Observer> obs = {make_monitor_observer(mon, occ, heat, cfg.dt)};
    SequentialRng rng(8);
    Field x(dom, 1);
    for (double& v : x.data) v = 1.0 + 0.5 * std::abs(rng.normal());
    simulate(heat, cfg, x, 3.0, obs, TrajectoryRng{2, 0});
    for (const auto& [mass, dw2] : mon.drift_samples())
      CHECK(std::abs(dw2) < 1e-10);
  }

  SUBCASE("logistic with E > r decays at every mass") {
    auto plain = SpectralDomain::build(DomainKind::NeumannInterval, 1, {M_PI}, {32});
    LogisticParams p;
    p.K = constant_grid(*plain, 1.0);
    p.r = constant_grid(*plain, 0.4);
    p.E = constant_grid(*plain, 0.9);
    auto dom2 = make_logistic_domain(DomainKind::NeumannInterval, M_PI, 32, p.K);
    ModelSpec logistic = build_logistic(p, dom2);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.taming = 1.0;
    LyapunovMonitor mon(&logistic);
    OccupationMeasure occ(0.0);
    std::vector<Observer> obs = {make_monitor_observer(mon, occ, logistic, cfg.dt)};
    simulate(logistic, cfg, Field(dom2, 1, 2.0), 3.0, obs, TrajectoryRng{3, 0});
    const auto stats = drift_check(mon.drift_samples(), cfg.dt);
    CHECK(stats.violations == 0);
    for (const auto& [mass, rate] : stats.bin_means) CHECK(rate < 0.0);
  }

  SUBCASE("short traces are rejected") {
    std::vector<std::pair<double, double>> tiny(10, {1.0, 0.0});
    CHECK_THROWS_AS(drift_check(tiny, 1e-3), InvariantError);
  }
}

TEST_CASE("V observed along a decaying trajectory matches h(r)") {
  auto dom = torus64();
  ModelSpec decay;
  decay.domain = dom;
  decay.m = decay.d = 1;
  decay.ops = {EllipticOp{1.0, 1.0, {}}};
  decay.finalize();
  StepperConfig cfg;
  cfg.dt = 1e-2;
  LyapunovMonitor mon(&decay);
  OccupationMeasure occ(0.0);
  std::vector<Observer> obs = {make_monitor_observer(mon, occ, decay, cfg.dt)};
  // mass starts at 2π·e⁻²/(2π) — pick u₀ so that r = e⁻² exactly at t=0
  const double u0 = std::exp(-2.0) / kTwoPi;
  simulate(decay, cfg, Field(dom, 1, u0), 1e-2, obs, TrajectoryRng{1, 0});
  // after one step r = e^{-2-dt}, V = 2 + dt
  CHECK(mon.last().V == doctest::Approx(2.0 + cfg.dt).epsilon(1e-10));
}
