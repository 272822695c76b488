#include "persim/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include "persim/stats.hpp"

namespace persim {

double smooth_ramp(double x) {
  if (x <= 0) return 0;
  if (x >= 1) return x;
  const double x3 = x * x * x;
  return x3 * (6.0 - 8.0 * x + 3.0 * x * x);
}

double log_distance(double r) {
  if (!(r > 0)) throw InvariantError("log_distance: r must be positive");
  return smooth_ramp(-std::log(r));
}

LyapunovMonitor::LyapunovMonitor(const ModelSpec* model, double beta)
    : model_(model), beta_(beta) {}

MonitorValues LyapunovMonitor::evaluate(const Field& x) const {
  MonitorValues mv;
  double frac2 = 0;
  for (int c = 0; c < x.m; ++c) {
    const double fn = fractional_norm_shifted(*model_->spectra[c], x.comp(c), beta_);
    frac2 += fn * fn;
  }
  mv.W1 = 1.0 + 0.5 * frac2;
  double mass = 0;
  for (int c = 0; c < x.m; ++c) mass += x.dom->l1(x.comp(c));
  mv.W2 = 1.0 + mass;
  double tracked = 0;
  for (int c = 0; c < model_->d; ++c) tracked += x.dom->l1(x.comp(c));
  mv.V = tracked > 0 ? log_distance(tracked) : smooth_ramp(744.0);  // -ln 0 cap
  return mv;
}

void LyapunovMonitor::observe(const Field& x, double dt) {
  const MonitorValues mv = evaluate(x);
  if (have_prev_)
    drift_samples_.emplace_back(prev_mass_, mv.W2 - prev_w2_);
  prev_w2_ = mv.W2;
  prev_mass_ = mv.W2 - 1.0;
  have_prev_ = true;
  sum_.W1 += mv.W1 * dt;
  sum_.W2 += mv.W2 * dt;
  sum_.V += mv.V * dt;
  time_ += dt;
  last_ = mv;
}

MonitorValues LyapunovMonitor::time_average() const {
  MonitorValues mv;
  if (time_ <= 0) return mv;
  mv.W1 = sum_.W1 / time_;
  mv.W2 = sum_.W2 / time_;
  mv.V = sum_.V / time_;
  return mv;
}

void OccupationMeasure::register_band(double b, double B) {
  if (!(0 < b && b < B))
    throw InvariantError("occupation: band must satisfy 0 < b < B");
  bands_.push_back({b, B, 0});
}

namespace {
int log_bin(double v) {
  return static_cast<int>(std::floor(
      OccupationMeasure::kBinsPerDecade * std::log10(v)));
}
}  // namespace

void OccupationMeasure::add(double l1_mass, double linf, double dt) {
  total_time_ += dt;
  if (total_time_ <= burn_in_) return;
  observed_time_ += dt;
  if (l1_mass < kFloor)
    underflow_ += dt;
  else
    mass_hist_[log_bin(l1_mass)] += dt;
  if (linf >= kFloor) linf_hist_[log_bin(linf)] += dt;
  for (auto& band : bands_)
    if (band.b <= l1_mass && l1_mass <= band.B) band.fraction += dt;
}

void OccupationMeasure::merge(const OccupationMeasure& other) {
  total_time_ += other.total_time_;
  observed_time_ += other.observed_time_;
  underflow_ += other.underflow_;
  for (const auto& [k, v] : other.mass_hist_) mass_hist_[k] += v;
  for (const auto& [k, v] : other.linf_hist_) linf_hist_[k] += v;
  if (bands_.size() == other.bands_.size())
    for (size_t i = 0; i < bands_.size(); ++i)
      bands_[i].fraction += other.bands_[i].fraction;
}

std::vector<OccupationMeasure::Bin> OccupationMeasure::to_bins(
    const std::map<int, double>& hist) const {
  std::vector<Bin> out;
  if (observed_time_ <= 0) return out;
  for (const auto& [k, mass] : hist) {
    Bin b;
    b.lo = std::pow(10.0, static_cast<double>(k) / kBinsPerDecade);
    b.hi = std::pow(10.0, static_cast<double>(k + 1) / kBinsPerDecade);
    b.mass = mass / observed_time_;
    out.push_back(b);
  }
  return out;
}

std::vector<OccupationMeasure::Bin> OccupationMeasure::mass_histogram() const {
  return to_bins(mass_hist_);
}
std::vector<OccupationMeasure::Bin> OccupationMeasure::linf_histogram() const {
  return to_bins(linf_hist_);
}
double OccupationMeasure::underflow_mass() const {
  return observed_time_ > 0 ? underflow_ / observed_time_ : 0.0;
}

PersistenceVerdict persistence_verdict(const OccupationMeasure& occ,
                                       double delta) {
  if (!(occ.observed_time() > 0))
    throw InvariantError("persistence verdict: no post-burn-in samples");
  if (!(delta > 0 && delta < 1))
    throw InvariantError("persistence verdict: delta must be in (0,1)");
  const auto bins = occ.mass_histogram();
  PersistenceVerdict verdict;
  const double target = 1.0 - delta;

  // two-pointer search for the narrowest log window with enough mass; the
  // underflow bucket counts against the window
  double best_width = 1e300;
  size_t j = 0;
  double window = 0;
  for (size_t i = 0; i < bins.size(); ++i) {
    if (j < i) {
      j = i;
      window = 0;
    }
    while (j < bins.size() && window < target) {
      window += bins[j].mass;
      ++j;
    }
    if (window >= target) {
      const double width =
          std::log10(bins[j - 1].hi) - std::log10(bins[i].lo);
      if (width < best_width) {
        best_width = width;
        verdict.b = bins[i].lo;
        verdict.B = bins[j - 1].hi;
        verdict.fraction = window;
      }
    }
    window -= bins[i].mass;
  }

  verdict.persistent = best_width < 1e300 &&
                       verdict.b >= 100.0 * OccupationMeasure::kFloor &&
                       occ.underflow_mass() <= delta;
  return verdict;
}

DriftCheckStats drift_check(
    const std::vector<std::pair<double, double>>& samples, double dt) {
  if (samples.size() < 1000)
    throw InvariantError("drift_check: need a trace of at least 1e3 steps");
  DriftCheckStats stats;
  std::vector<double> masses;
  masses.reserve(samples.size());
  for (const auto& [m, _] : samples) masses.push_back(m);
  stats.threshold = quantile(masses, 0.5);
  const double lo = *std::min_element(masses.begin(), masses.end());
  const double hi = *std::max_element(masses.begin(), masses.end());
  const int nbins = 12;
  const double width = std::max(1e-12, (hi - lo) / nbins);
  std::vector<double> sum(nbins, 0), sumsq(nbins, 0);
  std::vector<int> cnt(nbins, 0);
  for (const auto& [m, dw] : samples) {
    int b = std::min(nbins - 1, static_cast<int>((m - lo) / width));
    const double rate = dw / dt;
    sum[b] += rate;
    sumsq[b] += rate * rate;
    cnt[b] += 1;
  }
  std::vector<double> xs, ys;
  for (int b = 0; b < nbins; ++b) {
    if (cnt[b] < 5) continue;
    const double center = lo + (b + 0.5) * width;
    const double mean = sum[b] / cnt[b];
    stats.bin_means.emplace_back(center, mean);
    if (center > stats.threshold) {
      xs.push_back(center);
      ys.push_back(mean);
      const double var =
          std::max(0.0, sumsq[b] / cnt[b] - mean * mean) / cnt[b];
      if (mean > 2.0 * std::sqrt(var) && mean > 0) stats.violations += 1;
    }
  }
  if (xs.size() >= 2) stats.slope = fit_line(xs, ys).slope;
  return stats;
}

Observer make_monitor_observer(LyapunovMonitor& mon, OccupationMeasure& occ,
                               const ModelSpec& model, double dt) {
  const ModelSpec* mp = &model;
  LyapunovMonitor* monp = &mon;
  OccupationMeasure* occp = &occ;
  return [mp, monp, occp, dt](int, double, const Field& x) {
    monp->observe(x, dt);
    double tracked = 0;
    for (int c = 0; c < mp->d; ++c) tracked += x.dom->l1(x.comp(c));
    double linf = 0;
    for (int c = 0; c < x.m; ++c) linf = std::max(linf, x.dom->linf(x.comp(c)));
    occp->add(tracked, linf, dt);
  };
}

}  // namespace persim
