#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "persim/models.hpp"
#include "persim/projective.hpp"

using namespace persim;

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

std::shared_ptr<const SpectralDomain> torus64() {
  return SpectralDomain::build(DomainKind::Torus, 1, {kTwoPi}, {64});
}

ModelSpec heat_model(std::shared_ptr<const SpectralDomain> dom, double c) {
  ModelSpec m;
  m.name = "heat";
  m.domain = dom;
  m.m = m.d = 1;
  m.ops = {EllipticOp{1.0, c, {}}};
  m.finalize();
  return m;
}
}  // namespace

TEST_CASE("polar decomposition") {
  auto dom = torus64();

  SUBCASE("constant field: r = 2πc, v = 1/(2π)") {
    Field x(dom, 1, 3.0);
    const auto ps = polar(x, 1);
    CHECK(ps.r == doctest::Approx(3.0 * kTwoPi).epsilon(1e-13));
    for (int i = 0; i < dom->size(); ++i)
      CHECK(ps.v.comp(0)[i] == doctest::Approx(1.0 / kTwoPi).epsilon(1e-13));
  }

  SUBCASE("scaling invariance: polar(5u) = (5r, v)") {
    Field x(dom, 1);
    SequentialRng rng(3);
    for (double& v : x.data) v = std::abs(rng.normal());
    Field x5 = x;
    for (double& v : x5.data) v *= 5.0;
    const auto a = polar(x, 1), b = polar(x5, 1);
    CHECK(b.r == doctest::Approx(5.0 * a.r).epsilon(1e-12));
    for (int i = 0; i < dom->size(); ++i)
      CHECK(b.v.comp(0)[i] == doctest::Approx(a.v.comp(0)[i]).epsilon(1e-12));
  }

  SUBCASE("u = max(sin, 0): r = 2 by quadrature") {
    Field x(dom, 1);
    for (int i = 0; i < dom->size(); ++i)
      x.comp(0)[i] = std::max(std::sin(dom->coord(i, 0)), 0.0);
    // independent quadrature of the same grid samples
    const double oracle =
        oracles::grid_quadrature({x.comp(0), x.comp(0) + dom->size()},
                                 dom->cell_volume());
    const auto ps = polar(x, 1);
    CHECK(ps.r == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(ps.r == doctest::Approx(2.0).epsilon(2e-3));
    for (int i = 0; i < dom->size(); ++i)
      CHECK(ps.v.comp(0)[i] == doctest::Approx(x.comp(0)[i] / ps.r).epsilon(1e-12));
  }

  SUBCASE("zero tracked block is an error") {
    Field x(dom, 2, 0.0);
    for (int i = 0; i < dom->size(); ++i) x.comp(1)[i] = 1.0;
    CHECK_THROWS_AS(polar(x, 1), InvariantError);
    CHECK(reconstruct(polar(x, 2)).finite());
  }

  SUBCASE("reconstruction is exact") {
    Field x(dom, 2);
    SequentialRng rng(9);
    for (double& v : x.data) v = std::abs(rng.normal()) + 0.01;
    const Field back = reconstruct(polar(x, 1));
    for (size_t i = 0; i < x.data.size(); ++i)
      CHECK(back.data[i] == doctest::Approx(x.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("linearize recovers the boundary drift coefficients") {
  auto dom = torus64();

  SUBCASE("KPP: f̂ = 1") {
    LinearizedModel lin(build_kpp(KppParams{0.0}, dom));
    Field z(dom, 0);
    Field fhat(dom, 1);
    lin.eval_fhat(z, fhat);
    for (int i = 0; i < dom->size(); ++i)
      CHECK(fhat.comp(0)[i] == doctest::Approx(1.0));
  }

  SUBCASE("SIR tracked I: f̂ = −(η+δ+σ) + βS/(1+c₁S)") {
    SirParams p;
    p.lambda = 1.2;
    p.eta = 0.9;
    p.delta = 0.15;
    p.sigma = 0.25;
    p.beta = 3.0;
    p.c1 = 0.8;
    LinearizedModel lin(build_sir(p, dom));
    Field z(dom, 1, 1.7);  // S profile
    Field fhat(dom, 1);
    lin.eval_fhat(z, fhat);
    const double expected =
        -(p.eta + p.delta + p.sigma) + p.beta * 1.7 / (1.0 + p.c1 * 1.7);
    for (int i = 0; i < dom->size(); ++i)
      CHECK(fhat.comp(0)[i] == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("logistic: f̂ = r − E") {
    auto plain = SpectralDomain::build(DomainKind::NeumannInterval, 1, {M_PI}, {64});
    LogisticParams p;
    p.K = profile_grid(*plain, [](double x) { return 1.0 + 0.5 * std::sin(x); });
    p.r = constant_grid(*plain, 1.0);
    p.E = constant_grid(*plain, 0.2);
    auto dom2 = make_logistic_domain(DomainKind::NeumannInterval, M_PI, 64, p.K);
    LinearizedModel lin(build_logistic(p, dom2));
    Field z(dom2, 0);
    Field fhat(dom2, 1);
    lin.eval_fhat(z, fhat);
    for (int i = 0; i < dom2->size(); ++i)
      CHECK(fhat.comp(0)[i] == doctest::Approx(0.8).epsilon(1e-12));
  }
}

TEST_CASE("H values from the worked examples") {
  auto dom = torus64();

  SUBCASE("KPP ε = 0 at the flat profile: H = −1") {
    LinearizedModel lin(build_kpp(KppParams{0.0}, dom));
    Field v(dom, 1, 1.0 / kTwoPi);
    Field z(dom, 0);
    CHECK(evaluate_H(lin, v, z) == doctest::Approx(-1.0).epsilon(1e-12));
  }

  SUBCASE("scalar growth channel: H = −a + σ²/2") {
    LinearizedModel lin(build_gbm(GbmParams{1.0, 0.5, 1.0}, dom));
    Field v(dom, 1, 1.0 / kTwoPi);
    Field z(dom, 0);
    CHECK(evaluate_H(lin, v, z) == doctest::Approx(-0.875).epsilon(1e-12));
  }

  SUBCASE("SIR at S ≡ λ/η with α₂ = 0: H = −λ̃") {
    for (const SirParams& p :
         {SirParams{1, 1, 0.1, 0.2, 4, 1, 0, 0, 1, 1, 0, 0},
          SirParams{2, 0.5, 0.3, 0.2, 2, 0.5, 0, 0, 1, 1, 0, 0},
          SirParams{1.5, 0.8, 0.2, 0.5, 3, 0.7, 0, 0, 1, 1, 0, 0}}) {
      LinearizedModel lin(build_sir(p, dom));
      Field v(dom, 1, 1.0 / kTwoPi);
      Field z(dom, 1, p.lambda / p.eta);
      CHECK(evaluate_H(lin, v, z) ==
            doctest::Approx(-sir_tilde_lambda(p)).epsilon(1e-10));
    }
  }

  SUBCASE("the Itô term adds exactly ½α₂² for scalar-BM noise") {
    SirParams p;
    p.alpha2 = 0.6;
    SirParams p0 = p;
    p0.alpha2 = 0.0;
    LinearizedModel lin(build_sir(p, dom)), lin0(build_sir(p0, dom));
    Field v(dom, 1, 1.0 / kTwoPi);
    Field z(dom, 1, p.lambda / p.eta);
    CHECK(evaluate_H(lin, v, z) - evaluate_H(lin0, v, z) ==
          doctest::Approx(0.5 * 0.36).epsilon(1e-12));
  }

  SUBCASE("non-normalized v is rejected") {
    LinearizedModel lin(build_kpp(KppParams{0.0}, dom));
    Field v(dom, 1, 1.0);
    Field z(dom, 0);
    CHECK_THROWS_AS(evaluate_H(lin, v, z), InvariantError);
  }
}

TEST_CASE("projective path: v stays a nonnegative unit-mass profile") {
  auto dom = torus64();
  LinearizedModel lin(build_kpp(KppParams{0.3}, dom));
  ProjectiveRunConfig cfg;
  cfg.stepper.dt = 1e-3;
  cfg.burn_in = 0.1;
  cfg.T = 1.0;
  cfg.observer = [&](int, double, double, double, const Field& v, const Field&) {
    double mass = 0;
    for (int c = 0; c < v.m; ++c) {
      mass += v.dom->l1(v.comp(c));
      for (int i = 0; i < v.dom->size(); ++i) CHECK(v.comp(c)[i] >= 0.0);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  };
  const auto inits = make_v_inits(dom, 1, 2);
  run_projective_path(lin, cfg, inits[1], Field(dom, 0), TrajectoryRng{5, 0});
}

TEST_CASE("deterministic heat profile converges to the constant") {
  auto dom = torus64();
  LinearizedModel lin(heat_model(dom, 0.0));
  ProjectiveRunConfig cfg;
  cfg.stepper.dt = 1e-3;
  cfg.burn_in = 1;
  cfg.T = 20;
  const auto inits = make_v_inits(dom, 1, 3);
  const auto res = run_projective_path(lin, cfg, inits[2], Field(dom, 0),
                                       TrajectoryRng{1, 0});
  std::vector<double> diff(dom->size());
  for (int i = 0; i < dom->size(); ++i)
    diff[i] = res.v_final.comp(0)[i] - 1.0 / kTwoPi;
  CHECK(dom->l2(diff.data()) < 1e-6);
}

TEST_CASE("estimate_lambda on the worked examples") {
  auto dom = torus64();

  SUBCASE("KPP ε = 0: Λ̂ = −1 ± 1e-3, estimators agree") {
    LinearizedModel lin(build_kpp(KppParams{0.0}, dom));
    LambdaConfig cfg;
    cfg.stepper.dt = 1e-3;
    cfg.burn_in = 10;
    cfg.T = 25;
    cfg.paths = 2;
    cfg.seed = 3;
    const auto est = estimate_lambda(lin, cfg);
    CHECK(est.lambda_hat == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(est.estimators_agree);
    CHECK_FALSE(est.multimodal);
  }

  SUBCASE("growth channel a=1, σ=0.5: Λ̂ = −0.875 ± 0.02") {
    LinearizedModel lin(build_gbm(GbmParams{1.0, 0.5, 1.0}, dom));
    LambdaConfig cfg;
    cfg.stepper.dt = 1e-3;
    cfg.burn_in = 2;
    cfg.T = 20;
    cfg.paths = 4;
    cfg.seed = 11;
    const auto est = estimate_lambda(lin, cfg);
    CHECK(est.lambda_hat == doctest::Approx(-0.875).epsilon(0.02 / 0.875));
    CHECK(est.estimators_agree);
  }

  SUBCASE("logistic with constant coefficients: Λ̂ = −(r₀ − E₀)") {
    auto plain = SpectralDomain::build(DomainKind::NeumannInterval, 1, {M_PI}, {32});
    LogisticParams p;
    p.K = constant_grid(*plain, 1.0);
    p.r = constant_grid(*plain, 0.9);
    p.E = constant_grid(*plain, 0.3);
    auto dom2 = make_logistic_domain(DomainKind::NeumannInterval, M_PI, 32, p.K);
    LinearizedModel lin(build_logistic(p, dom2));
    LambdaConfig cfg;
    cfg.stepper.dt = 1e-3;
    cfg.burn_in = 5;
    cfg.T = 15;
    cfg.paths = 2;
    const auto est = estimate_lambda(lin, cfg);
    CHECK(est.lambda_hat == doctest::Approx(-0.6).epsilon(2e-3));
  }

  SUBCASE("burn_in must be below T") {
    LinearizedModel lin(build_kpp(KppParams{0.0}, dom));
    LambdaConfig cfg;
    cfg.burn_in = 5;
    cfg.T = 5;
    CHECK_THROWS_AS(estimate_lambda(lin, cfg), InvariantError);
  }

  SUBCASE("stochastic KPP linearization: the two estimators agree") {
    // genuine white-noise v dynamics; the H average and the renormalized
    // log growth must track each other (discrete strong law)
    LinearizedModel lin(build_kpp(KppParams{0.3}, dom));
    LambdaConfig cfg;
    cfg.stepper.dt = 1e-3;
    cfg.burn_in = 5;
    cfg.T = 40;
    cfg.paths = 3;
    cfg.seed = 41;
    const auto est = estimate_lambda(lin, cfg);
    CHECK(est.estimators_agree);
    CHECK_FALSE(est.nonstationary);
    CHECK(est.lambda_hat < 0);  // persistence survives this noise level
  }

  SUBCASE("antithetic pairing keeps the estimate and tightens the ensemble") {
    LinearizedModel lin(build_gbm(GbmParams{1.0, 0.5, 1.0}, dom));
    LambdaConfig cfg;
    cfg.stepper.dt = 1e-3;
    cfg.burn_in = 2;
    cfg.T = 10;
    cfg.paths = 4;
    cfg.antithetic = true;
    cfg.seed = 23;
    const auto est = estimate_lambda(lin, cfg);
    CHECK(est.lambda_hat == doctest::Approx(-0.875).epsilon(0.02));
    // paired paths share the initial profile, so H paths coincide exactly
    CHECK(est.per_path[0].h_avg == doctest::Approx(est.per_path[1].h_avg));
  }
}

TEST_CASE("projective step consistency") {
  auto dom = torus64();

  SUBCASE("deterministic decaying heat: raw dr residual below 1e-6 at dt=1e-4") {
    ModelSpec heat = heat_model(dom, 1.0);
    StepperConfig cfg;
    cfg.dt = 1e-4;
    Field x0(dom, 1);
    for (int i = 0; i < dom->size(); ++i)
      x0.comp(0)[i] = 1.0 + 0.3 * std::cos(dom->coord(i, 0));
    const auto rep = project_step_consistency(heat, cfg, x0, 0.5, 1);
    // mean_r is normalized by r·dt; the raw per-step residual is ≤ r·dt·mean
    CHECK(std::abs(rep.mean_r) * cfg.dt * kTwoPi < 1e-6);
    CHECK(rep.max_r * cfg.dt * kTwoPi < 1e-5);
  }

  SUBCASE("logistic at carrying capacity: dr ≈ 0") {
    auto plain = SpectralDomain::build(DomainKind::NeumannInterval, 1, {M_PI}, {32});
    LogisticParams p;
    p.K = profile_grid(*plain, [](double x) { return 1.0 + 0.4 * std::sin(x); });
    p.r = constant_grid(*plain, 1.0);
    p.E = constant_grid(*plain, 0.0);
    auto dom2 = make_logistic_domain(DomainKind::NeumannInterval, M_PI, 32, p.K);
    ModelSpec logistic = build_logistic(p, dom2);
    StepperConfig cfg;
    cfg.dt = 1e-3;
    Field x0(dom2, 1);
    for (int i = 0; i < 32; ++i) x0.comp(0)[i] = p.K[i];
    const auto rep = project_step_consistency(logistic, cfg, x0, 0.2, 1);
    CHECK(std::abs(rep.mean_r) < 1e-9);
    CHECK(rep.max_r < 1e-8);
  }

  SUBCASE("heat and growth channels decay linearly in dt (ratio 2 ± 0.3)") {
    for (const auto& model :
         {heat_model(dom, 1.0), build_gbm(GbmParams{1.0, 0.5, 1.0}, dom)}) {
      Field x0(dom, 1, 1.0);
      const auto reports = project_step_consistency_scan(
          model, x0, 1.0, {1e-3, 5e-4, 2.5e-4}, 17);
      REQUIRE(reports.size() == 3);
      for (size_t j = 0; j + 1 < reports.size(); ++j) {
        const double ratio = reports[j].mean_r / reports[j + 1].mean_r;
        CHECK(ratio == doctest::Approx(2.0).epsilon(0.15));
      }
    }
  }
}
