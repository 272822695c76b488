#include <doctest.h>

#include <cmath>

#include "persim/noise.hpp"
#include "persim/stats.hpp"

using namespace persim;

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;

std::shared_ptr<const OperatorSpectrum> torus_op(int n = 64, int dim = 1) {
  auto dom = dim == 1
                 ? SpectralDomain::build(DomainKind::Torus, 1, {kTwoPi}, {n})
                 : SpectralDomain::build(DomainKind::Torus, 2, {kTwoPi, kTwoPi},
                                         {n, n});
  return OperatorSpectrum::make(dom, EllipticOp{1.0, 1.0, {}});
}
}  // namespace

TEST_CASE("scalar-BM increments: mode 0 only, variance ≈ dt") {
  auto op = torus_op();
  NoiseSpec spec;
  spec.species = {ChannelSpec{NoiseRule::ScalarBM, 1.0, {}, 1.0}};
  NoiseSampler sampler(spec, {op});

  const double dt = 0.01;
  const int N = 100000;
  std::vector<double> draws;
  NoiseIncrement inc;
  for (int i = 0; i < N; ++i) {
    sampler.sample(dt, TrajectoryRng{42, static_cast<uint64_t>(i)}, 0, inc);
    REQUIRE(inc.species[0].sparse);
    REQUIRE(inc.species[0].entries.size() == 1);
    CHECK(inc.species[0].entries[0].first == 0);
    draws.push_back(inc.species[0].entries[0].second);
  }
  const MeanVar mv = mean_var(draws);
  // variance of the sample variance of N gaussians: 2σ⁴/N
  const double se_var = dt * std::sqrt(2.0 / N);
  CHECK(std::abs(mv.var - dt) < 3 * se_var);
  CHECK(std::abs(mv.mean) < 4 * std::sqrt(dt / N));
}

TEST_CASE("white noise admissible on the 1-D torus, rejected on the 2-D torus") {
  ChannelSpec white{NoiseRule::White, 1.0, {}, 1.0};
  const auto rep1 = check_admissibility(white, torus_op(64, 1));
  CHECK(rep1.valid);
  CHECK(std::isinf(rep1.best_p));

  const auto rep2 = check_admissibility(white, torus_op(32, 2));
  CHECK_FALSE(rep2.valid);

  NoiseSpec bad;
  bad.species = {white};
  CHECK_THROWS_AS(NoiseSampler(bad, {torus_op(32, 2)}), InvariantError);
}

TEST_CASE("admissibility: sobolev and finite rules") {
  auto op = torus_op();
  const auto sob = check_admissibility(
      ChannelSpec{NoiseRule::Sobolev, 1.1, {}, 1.0}, op);
  CHECK(sob.valid);
  CHECK(sob.best_p == doctest::Approx(2.0));

  const auto fin = check_admissibility(
      ChannelSpec{NoiseRule::Finite, 1.0, {0.5, 0.3, 0.1}, 1.0}, op);
  CHECK(fin.valid);
  CHECK(fin.best_p == doctest::Approx(2.0));
}

TEST_CASE("sobolev smoothing makes 2-D noise admissible") {
  auto op2 = torus_op(16, 2);
  const auto rep = check_admissibility(
      ChannelSpec{NoiseRule::Sobolev, 2.5, {}, 1.0}, op2);
  CHECK(rep.valid);
  CHECK(rep.best_p == doctest::Approx(2.0));
  // a rougher rule stays inadmissible
  const auto rough = check_admissibility(
      ChannelSpec{NoiseRule::Sobolev, 0.2, {}, 1.0}, op2);
  CHECK_FALSE(rough.valid);
}

TEST_CASE("covariance is diagonal with a_n² dt entries") {
  auto op = torus_op();
  NoiseSpec spec;
  spec.species = {ChannelSpec{NoiseRule::Sobolev, 1.0, {}, 0.8}};
  NoiseSampler sampler(spec, {op});
  const auto& amp = sampler.amplitudes(0);

  const double dt = 0.05;
  const int N = 100000;
  const int modes[] = {0, 1, 5, 20};
  std::vector<std::vector<double>> draws(4, std::vector<double>());
  NoiseIncrement inc;
  for (int i = 0; i < N; ++i) {
    sampler.sample(dt, TrajectoryRng{7, static_cast<uint64_t>(i)}, 3, inc);
    for (int j = 0; j < 4; ++j)
      draws[j].push_back(inc.species[0].dense[modes[j]]);
  }
  for (int j = 0; j < 4; ++j) {
    const double target = amp[modes[j]] * amp[modes[j]] * dt;
    const MeanVar mv = mean_var(draws[j]);
    CHECK(std::abs(mv.var - target) < 4 * target * std::sqrt(2.0 / N));
  }
  // off-diagonal: Cov(c_1, c_5) ≈ 0 within 4 SE
  double cov = 0;
  for (int i = 0; i < N; ++i) cov += draws[1][i] * draws[2][i];
  cov /= N;
  const double se = amp[modes[1]] * amp[modes[2]] * dt / std::sqrt(static_cast<double>(N));
  CHECK(std::abs(cov) < 4 * se);
}

TEST_CASE("increment over dt matches two half-steps in distribution (KS)") {
  auto op = torus_op();
  NoiseSpec spec;
  spec.species = {ChannelSpec{NoiseRule::White, 1.0, {}, 1.0}};
  NoiseSampler sampler(spec, {op});

  const double dt = 0.02;
  const int N = 8000;
  std::vector<double> full, halves;
  NoiseIncrement inc;
  for (int i = 0; i < N; ++i) {
    TrajectoryRng rng{99, static_cast<uint64_t>(i)};
    sampler.sample(dt, rng, 0, inc);
    full.push_back(inc.species[0].dense[0]);
    sampler.sample(dt / 2, rng, 1, inc);
    double sum = inc.species[0].dense[0];
    sampler.sample(dt / 2, rng, 2, inc);
    sum += inc.species[0].dense[0];
    halves.push_back(sum);
  }
  CHECK(ks_two_sample_pvalue(full, halves) > 0.01);
}

TEST_CASE("independent species draw independent coefficients; shared draw equal ones") {
  auto op = torus_op();
  NoiseSpec spec;
  spec.species = {ChannelSpec{NoiseRule::White, 1.0, {}, 1.0},
                  ChannelSpec{NoiseRule::White, 1.0, {}, 1.0}};
  spec.independent = true;
  NoiseSampler ind(spec, {op, op});
  spec.independent = false;
  NoiseSampler shared(spec, {op, op});

  NoiseIncrement a, b;
  ind.sample(0.01, TrajectoryRng{5, 0}, 0, a);
  shared.sample(0.01, TrajectoryRng{5, 0}, 0, b);
  CHECK(a.species[0].dense[3] != a.species[1].dense[3]);
  CHECK(b.species[0].dense[3] == b.species[1].dense[3]);
}

TEST_CASE("counter RNG is reproducible and order-independent") {
  TrajectoryRng rng{123, 7};
  const double a = rng.normal(10, 1, 3);
  const double b = rng.normal(11, 0, 0);
  CHECK(rng.normal(10, 1, 3) == a);  // re-query gives the same draw
  CHECK(rng.normal(11, 0, 0) == b);
  TrajectoryRng anti{123, 7, true};
  CHECK(anti.normal(10, 1, 3) == -a);
}
