#include "persim/delay_sfde.hpp"

#include <algorithm>
#include <cmath>

#include "persim/stats.hpp"

namespace persim {

PathSegment::PathSegment(int n_species, double delay, double dt)
    : n_(n_species), dt_(dt), r_(delay) {
  if (n_ < 1) throw InvariantError("segment: need at least one species");
  if (!(dt > 0)) throw InvariantError("segment: dt must be positive");
  if (delay < 0) throw InvariantError("segment: delay must be nonnegative");
  q_ = static_cast<int>(std::llround(delay / dt));
  if (std::abs(q_ * dt - delay) > 1e-12 * std::max(1.0, delay))
    throw InvariantError("segment: q*dt must equal the delay exactly");
  buf_.assign(static_cast<size_t>(q_ + 1) * n_, 0.0);
  newest_ = q_;
}

double PathSegment::at(int j, int i) const {
  const int frame = (newest_ + 1 + j) % (q_ + 1);
  return buf_[static_cast<size_t>(frame) * n_ + i];
}

double PathSegment::value(int i, double s) const {
  if (s > 1e-12 || s < -r_ - 1e-12)
    throw InvariantError("segment: time outside [-r, 0]");
  if (q_ == 0) return head(i);
  const double pos = (s + r_) / dt_;  // in [0, q]
  const int j = std::min(q_ - 1, std::max(0, static_cast<int>(pos)));
  const double frac = std::min(1.0, std::max(0.0, pos - j));
  return at(j, i) * (1 - frac) + at(j + 1, i) * frac;
}

void PathSegment::fill(const std::function<double(int, double)>& init) {
  for (int j = 0; j <= q_; ++j) {
    const double s = -r_ + j * dt_;
    const int frame = (newest_ + 1 + j) % (q_ + 1);
    for (int i = 0; i < n_; ++i) {
      const double v = init(i, s);
      if (!(v >= 0)) throw InvariantError("segment: initial data must be >= 0");
      buf_[static_cast<size_t>(frame) * n_ + i] = v;
    }
  }
}

void PathSegment::push(const std::vector<double>& new_head) {
  newest_ = (newest_ + 1) % (q_ + 1);  // oldest frame is overwritten
  for (int i = 0; i < n_; ++i)
    buf_[static_cast<size_t>(newest_) * n_ + i] = new_head[i];
}

bool PathSegment::nonnegative() const {
  for (double v : buf_)
    if (v < 0) return false;
  return true;
}

void SfdeModel::finalize() {
  if (n < 1) throw InvariantError("sfde: need at least one species");
  if (static_cast<int>(f.size()) != n || static_cast<int>(g.size()) != n)
    throw InvariantError("sfde: need one f and one g per species");
  if (static_cast<int>(covariance.size()) != n)
    throw InvariantError("sfde: covariance must be n×n");
  // Cholesky with a symmetry check; psd required
  chol.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(covariance[i].size()) != n)
      throw InvariantError("sfde: covariance must be n×n");
    for (int j = 0; j < i; ++j)
      if (std::abs(covariance[i][j] - covariance[j][i]) > 1e-12)
        throw InvariantError("sfde: covariance must be symmetric");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = covariance[i][j];
      for (int k = 0; k < j; ++k) s -= chol[i][k] * chol[j][k];
      if (i == j) {
        if (s < -1e-12)
          throw InvariantError("sfde: covariance is not positive semidefinite");
        chol[i][i] = std::sqrt(std::max(0.0, s));
      } else {
        chol[i][j] = chol[j][j] > 0 ? s / chol[j][j] : 0.0;
      }
    }
  }
}

void sfde_step(const SfdeModel& model, PathSegment& seg, double dt,
               const TrajectoryRng& rng, uint64_t step) {
  if (std::abs(dt - seg.dt()) > 1e-14)
    throw InvariantError("sfde_step: dt must match the segment grid spacing");
  const int n = model.n;
  std::vector<double> xi(n), de(n, 0.0), head(n);
  for (int i = 0; i < n; ++i)
    xi[i] = rng.normal(step, static_cast<uint32_t>(i), 0);
  const double sq = std::sqrt(dt);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) de[i] += model.chol[i][j] * xi[j] * sq;
  for (int i = 0; i < n; ++i) {
    const double x = seg.head(i);
    double v = 0;
    if (x > 0) {
      const double fi = model.f[i](seg);
      const double gi = model.g[i](seg);
      v = x * (1.0 + fi * dt + gi * de[i]);
      if (!std::isfinite(v)) throw BlowupError("sfde_step: non-finite state");
      v = std::max(v, 0.0);
    }
    head[i] = v;
  }
  seg.push(head);
}

BoundaryInvasionResult boundary_invasion(
    const SfdeModel& model, int species,
    const std::function<double(int, double)>& init,
    const BoundaryInvasionConfig& cfg) {
  if (species < 0 || species >= model.n)
    throw InvariantError("boundary_invasion: bad species index");
  PathSegment seg(model.n, model.delay, cfg.dt);
  seg.fill([&](int i, double s) { return i == species ? 0.0 : init(i, s); });

  const int steps = std::max(1, static_cast<int>(std::llround(cfg.T / cfg.dt)));
  const int burn =
      std::min(steps - 1, static_cast<int>(std::llround(cfg.burn_in / cfg.dt)));
  const int navg = steps - burn;
  const int nblocks = std::max(1, std::min(cfg.blocks, navg));
  std::vector<double> blocks(nblocks, 0.0);
  std::vector<int> counts(nblocks, 0);
  const double sii = model.covariance[species][species];
  TrajectoryRng rng{cfg.seed, 0};
  for (int k = 0; k < steps; ++k) {
    sfde_step(model, seg, cfg.dt, rng, static_cast<uint64_t>(k));
    if (k >= burn) {
      const double fi = model.f[species](seg);
      const double gi = model.g[species](seg);
      const int b = std::min(nblocks - 1, (k - burn) * nblocks / navg);
      blocks[b] += fi - 0.5 * sii * gi * gi;
      counts[b] += 1;
    }
  }
  for (int b = 0; b < nblocks; ++b)
    if (counts[b] > 0) blocks[b] /= counts[b];

  BoundaryInvasionResult out;
  const MeanVar mv = mean_var(blocks);
  out.lambda_hat = mv.mean;
  out.stderr_hat = mv.se;
  if (nblocks >= 6) {
    bool up = true, down = true;
    for (int b = 1; b < nblocks; ++b) {
      const double tiny = 1e-12 * (std::abs(mv.mean) + 1e-12);
      up = up && blocks[b] - blocks[b - 1] > tiny;
      down = down && blocks[b - 1] - blocks[b] > tiny;
    }
    out.nonstationary = up || down;
  }
  return out;
}

double psi_monitor(const SfdeModel& model, const PathSegment& seg) {
  const auto& psi = model.psi;
  if (psi.c.size() != static_cast<size_t>(model.n))
    throw InvariantError("psi: parameters not supplied");
  double lin = 1.0;
  for (int i = 0; i < model.n; ++i) lin += psi.c[i] * seg.head(i);
  double out = std::log(lin);
  if (psi.A2 == 0.0) return out;

  const double dt = seg.dt();
  const int q = seg.samples() - 1;
  std::vector<double> x(model.n);
  auto hval = [&](int j) {
    for (int i = 0; i < model.n; ++i) x[i] = seg.at(j, i);
    return psi.h ? psi.h(x) : 1.0;
  };
  for (const auto& [s, wgt] : psi.mu) {
    // ∫_s^0 e^{γ(u−s)} h(φ(u)) du, trapezoid over the grid nodes in [s, 0];
    // offsets are snapped to the segment grid
    const double lo = std::max(-seg.delay(), s);
    const int jlo = std::min(
        q, std::max(0, static_cast<int>(std::llround((lo + seg.delay()) / dt))));
    double integral = 0;
    double prev_f = std::exp(psi.gamma * ((-seg.delay() + jlo * dt) - s)) * hval(jlo);
    for (int j = jlo + 1; j <= q; ++j) {
      const double t = -seg.delay() + j * dt;
      const double f = std::exp(psi.gamma * (t - s)) * hval(j);
      integral += 0.5 * (prev_f + f) * dt;
      prev_f = f;
    }
    out += psi.A2 * wgt * integral;
  }
  return out;
}

DelayPersistenceResult delay_persistence(
    const SfdeModel& model, const std::function<double(int, double)>& init,
    double dt, double burn_in, double T, double delta, uint64_t seed) {
  PathSegment seg(model.n, model.delay, dt);
  seg.fill(init);
  const int steps = std::max(1, static_cast<int>(std::llround(T / dt)));
  OccupationMeasure occ(burn_in);
  std::vector<std::pair<double, double>> minmax;
  minmax.reserve(steps);
  TrajectoryRng rng{seed, 0};
  for (int k = 0; k < steps; ++k) {
    sfde_step(model, seg, dt, rng, static_cast<uint64_t>(k));
    double mn = 1e300, mx = -1e300;
    for (int i = 0; i < model.n; ++i) {
      mn = std::min(mn, seg.head(i));
      mx = std::max(mx, seg.head(i));
    }
    occ.add(mn, mx, dt);
    if ((k + 1) * dt > burn_in) minmax.emplace_back(mn, mx);
  }
  DelayPersistenceResult out;
  out.verdict = persistence_verdict(occ, delta);
  if (out.verdict.persistent) {
    int inside = 0;
    for (const auto& [mn, mx] : minmax)
      if (out.verdict.b <= mn && mx <= out.verdict.B) ++inside;
    out.joint_fraction =
        minmax.empty() ? 0.0 : static_cast<double>(inside) / minmax.size();
  }
  return out;
}

}  // namespace persim
