#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "persim/delay_sfde.hpp"

using namespace persim;

namespace {

SfdeModel delay_logistic(double delay, double g0, double cov = 1.0) {
  SfdeModel m;
  m.n = 1;
  m.delay = delay;
  m.f = {[delay](const PathSegment& seg) {
    return 1.0 - seg.value(0, -delay);
  }};
  m.g = {[g0](const PathSegment&) { return g0; }};
  m.covariance = {{cov}};
  m.finalize();
  return m;
}

}  // namespace

TEST_CASE("segment ring buffer: exact shift and interpolation") {
  PathSegment seg(2, 0.5, 0.1);
  CHECK(seg.samples() == 6);
  seg.fill([](int i, double s) { return i == 0 ? 1.0 + s : 2.0; });
  CHECK(seg.head(0) == doctest::Approx(1.0));
  CHECK(seg.value(0, -0.5) == doctest::Approx(0.5));
  CHECK(seg.value(0, -0.25) == doctest::Approx(0.75));  // linear interpolation
  CHECK(seg.value(1, -0.37) == doctest::Approx(2.0));
  seg.push({5.0, 6.0});
  CHECK(seg.head(0) == doctest::Approx(5.0));
  CHECK(seg.value(0, -0.1) == doctest::Approx(1.0));  // previous head
  CHECK(seg.value(0, -0.5) == doctest::Approx(0.6));  // oldest slid off

  CHECK_THROWS_AS(PathSegment(1, 0.5, 0.3), InvariantError);  // q·dt ≠ r
  CHECK_THROWS_AS(seg.value(0, -1.0), InvariantError);
}

TEST_CASE("degenerate delay r = 0 reproduces the scalar Euler GBM path") {
  SfdeModel m;
  m.n = 1;
  m.delay = 0.0;
  const double a = 0.7, s0 = 0.4;
  m.f = {[a](const PathSegment&) { return a; }};
  m.g = {[s0](const PathSegment&) { return s0; }};
  m.covariance = {{1.0}};
  m.finalize();

  const double dt = 1e-2;
  PathSegment seg(1, 0.0, dt);
  seg.fill([](int, double) { return 1.0; });
  double oracle = 1.0;
  TrajectoryRng rng{9, 0};
  for (int k = 0; k < 200; ++k) {
    sfde_step(m, seg, dt, rng, static_cast<uint64_t>(k));
    const double de = rng.normal(static_cast<uint64_t>(k), 0, 0) * std::sqrt(dt);
    oracle = oracle * (1.0 + a * dt + s0 * de);
    oracle = std::max(oracle, 0.0);
    CHECK(seg.head(0) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("zero segment stays zero (multiplicative invariance)") {
  SfdeModel m = delay_logistic(0.5, 0.3);
  PathSegment seg(1, 0.5, 1e-2);
  seg.fill([](int, double) { return 0.0; });
  TrajectoryRng rng{4, 0};
  for (int k = 0; k < 500; ++k) sfde_step(m, seg, 1e-2, rng, k);
  for (int j = 0; j < seg.samples(); ++j) CHECK(seg.at(j, 0) == 0.0);
}

TEST_CASE("small-delay logistic converges to the ODE carrying capacity") {
  // r → 0 limit: ẋ = x(1 − x) → 1
  SfdeModel m = delay_logistic(0.05, 0.0);
  const double dt = 1e-2;
  PathSegment seg(1, 0.05, dt);
  seg.fill([](int, double) { return 0.3; });
  TrajectoryRng rng{1, 0};
  for (int k = 0; k < 5000; ++k) sfde_step(m, seg, dt, rng, k);
  const double ode = oracles::rk4(
      [](double, double x) { return x * (1.0 - x); }, 0.3, 0.0, 50.0, 5000);
  CHECK(seg.head(0) == doctest::Approx(ode).epsilon(1e-2));
  CHECK(seg.head(0) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("extinction-face invariance in a two-species delay system") {
  SfdeModel m;
  m.n = 2;
  m.delay = 0.3;
  m.f = {[](const PathSegment& seg) { return 1.0 - seg.value(0, -0.3); },
         [](const PathSegment& seg) {
           return 0.8 - seg.value(1, -0.3) - 0.2 * seg.value(0, -0.3);
         }};
  m.g = {[](const PathSegment&) { return 0.2; },
         [](const PathSegment&) { return 0.2; }};
  m.covariance = {{1.0, 0.0}, {0.0, 1.0}};
  m.finalize();
  PathSegment seg(2, 0.3, 1e-2);
  seg.fill([](int i, double) { return i == 0 ? 0.0 : 0.6; });
  TrajectoryRng rng{6, 0};
  for (int k = 0; k < 2000; ++k) sfde_step(m, seg, 1e-2, rng, k);
  for (int j = 0; j < seg.samples(); ++j) CHECK(seg.at(j, 0) == 0.0);
  CHECK(seg.head(1) > 0.0);
}

TEST_CASE("boundary invasion rate at the zero path") {
  // single species, boundary is the zero path: λ̂ = f(0) − σ g(0)²/2 exactly
  SfdeModel m = delay_logistic(0.5, 0.3);
  BoundaryInvasionConfig cfg;
  cfg.dt = 1e-3;
  cfg.burn_in = 5;
  cfg.T = 40;
  const auto res =
      boundary_invasion(m, 0, [](int, double) { return 0.7; }, cfg);
  CHECK(res.lambda_hat == doctest::Approx(1.0 - 0.045).epsilon(1e-10));
  CHECK_FALSE(res.nonstationary);
}

TEST_CASE("two-species delay LV boundary rate matches the constant-mode oracle") {
  // boundary: species 1 at its equilibrium m1/a11 = 1; invader growth
  // f2 − cross·x1 = 0.5 − 0.3 = 0.2 with no noise correction
  SfdeModel m;
  m.n = 2;
  m.delay = 0.2;
  m.f = {[](const PathSegment& seg) { return 1.0 - seg.value(0, -0.2); },
         [](const PathSegment& seg) { return 0.5 - 0.3 * seg.value(0, -0.2); }};
  m.g = {[](const PathSegment&) { return 0.0; },
         [](const PathSegment&) { return 0.0; }};
  m.covariance = {{1.0, 0.0}, {0.0, 1.0}};
  m.finalize();
  BoundaryInvasionConfig cfg;
  cfg.dt = 1e-3;
  cfg.burn_in = 20;
  cfg.T = 80;
  const auto res =
      boundary_invasion(m, 1, [](int, double) { return 0.8; }, cfg);
  CHECK(res.lambda_hat == doctest::Approx(0.2).epsilon(1e-3));
}

TEST_CASE("psi monitor") {
  SfdeModel m = delay_logistic(0.5, 0.3);
  m.psi.c = {2.0};
  m.psi.gamma = 1.3;
  m.psi.A2 = 0.0;

  PathSegment zero(1, 0.5, 1e-3);
  zero.fill([](int, double) { return 0.0; });
  CHECK(psi_monitor(m, zero) == doctest::Approx(0.0));

  PathSegment con(1, 0.5, 1e-3);
  con.fill([](int, double) { return 0.7; });
  CHECK(psi_monitor(m, con) == doctest::Approx(std::log(1.0 + 2.0 * 0.7)));

  SUBCASE("closed form for h ≡ 1 and μ = δ_{−r}") {
    m.psi.A2 = 0.9;
    m.psi.h = [](const std::vector<double>&) { return 1.0; };
    m.psi.mu = {{-0.5, 1.0}};
    const double gamma = m.psi.gamma;
    const double closed = (std::exp(gamma * 0.5) - 1.0) / gamma;
    CHECK(psi_monitor(m, con) ==
          doctest::Approx(std::log(2.4) + 0.9 * closed).epsilon(1e-6));
  }
}

TEST_CASE("monotone delay limit: small-r statistics approach the SDE ones") {
  // the r = 0 segment model IS the non-delay SDE; compare the stationary
  // time-averaged state of a small-delay run against it
  auto run_mean = [](double delay) {
    SfdeModel m;
    m.n = 1;
    m.delay = delay;
    m.f = {[delay](const PathSegment& seg) {
      return 1.0 - seg.value(0, -delay);
    }};
    m.g = {[](const PathSegment&) { return 0.2; }};
    m.covariance = {{1.0}};
    m.finalize();
    const double dt = 1e-3;
    PathSegment seg(1, delay, dt);
    seg.fill([](int, double) { return 1.0; });
    TrajectoryRng rng{77, 0};
    double acc = 0;
    int count = 0;
    const int steps = 120000, burn = 20000;
    for (int k = 0; k < steps; ++k) {
      sfde_step(m, seg, dt, rng, static_cast<uint64_t>(k));
      if (k >= burn) {
        acc += seg.head(0);
        ++count;
      }
    }
    return acc / count;
  };
  const double with_delay = run_mean(0.02);
  const double no_delay = run_mean(0.0);
  CHECK(with_delay == doctest::Approx(no_delay).epsilon(0.02));
}

TEST_CASE("delay logistic persistence band") {
  SfdeModel m = delay_logistic(0.5, 0.3);
  const auto res = delay_persistence(
      m, [](int, double) { return 0.8; }, 1e-3, 20.0, 220.0, 0.05, 11);
  CHECK(res.verdict.persistent);
  CHECK(res.verdict.fraction >= 0.95);
  CHECK(res.joint_fraction >= 0.95);
  CHECK(res.verdict.b > 0.01);
  CHECK(res.verdict.B < 100.0);
}
