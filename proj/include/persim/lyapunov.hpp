#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "persim/spde_engine.hpp"

namespace persim {

/// Quintic splice: 0 for x ≤ 0, x for x ≥ 1, value/slope/curvature matched at
/// both ends (the unique quintic interpolant with that data).
double smooth_ramp(double x);
/// h(r) = g(−ln r); equals −ln r for r ≤ e⁻¹ and 0 for r ≥ 1.
double log_distance(double r);

struct MonitorValues {
  double W1 = 1, W2 = 1, V = 0;
};

/// Running Lyapunov-function monitors W₁ = 1 + ½‖x‖²_{β,2}, W₂ = 1 + ‖x‖_{L1}
/// and V = h(r) with r the tracked-block mass.
class LyapunovMonitor {
 public:
  explicit LyapunovMonitor(const ModelSpec* model, double beta = -0.3);

  MonitorValues evaluate(const Field& x) const;
  /// Time-weighted accumulation; also records (mass, ΔW₂) pairs for
  /// drift_check.
  void observe(const Field& x, double dt);

  double beta() const { return beta_; }
  const MonitorValues& last() const { return last_; }
  MonitorValues time_average() const;
  const std::vector<std::pair<double, double>>& drift_samples() const {
    return drift_samples_;
  }

 private:
  const ModelSpec* model_;
  double beta_;
  MonitorValues last_;
  MonitorValues sum_;
  double time_ = 0;
  bool have_prev_ = false;
  double prev_w2_ = 0, prev_mass_ = 0;
  std::vector<std::pair<double, double>> drift_samples_;
};

/// Time-weighted log-spaced histograms of ‖u‖_{L1} and ‖x‖_{L∞} plus exact
/// fraction-in-band accumulators. Merging is associative.
class OccupationMeasure {
 public:
  static constexpr int kBinsPerDecade = 12;
  static constexpr double kFloor = 1e-12;  // underflow threshold

  explicit OccupationMeasure(double burn_in = 0) : burn_in_(burn_in) {}

  void register_band(double b, double B);
  void add(double l1_mass, double linf, double dt);
  void merge(const OccupationMeasure& other);

  double total_time() const { return total_time_; }
  double observed_time() const { return observed_time_; }  // post burn-in
  double burn_in() const { return burn_in_; }

  struct Bin {
    double lo = 0, hi = 0, mass = 0;  // mass normalized to 1
  };
  std::vector<Bin> mass_histogram() const;
  std::vector<Bin> linf_histogram() const;
  double underflow_mass() const;

  struct BandFraction {
    double b = 0, B = 0, fraction = 0;
  };
  const std::vector<BandFraction>& bands() const { return bands_; }

  friend struct VerdictAccess;

 private:
  std::vector<Bin> to_bins(const std::map<int, double>& hist) const;

  double burn_in_ = 0;
  double total_time_ = 0;
  double observed_time_ = 0;
  double underflow_ = 0;
  std::map<int, double> mass_hist_, linf_hist_;
  std::vector<BandFraction> bands_;
};

struct PersistenceVerdict {
  bool persistent = false;
  double b = 0, B = 0;
  double fraction = 0;
};

/// Smallest log-interval [b, B] capturing ≥ 1−δ of the post-burn-in mass
/// occupation; persistent iff it exists with b bounded away from the
/// histogram floor and negligible underflow. Throws on insufficient samples.
PersistenceVerdict persistence_verdict(const OccupationMeasure& occ,
                                       double delta);

struct DriftCheckStats {
  double slope = 0;        // OLS slope of bin-mean increments beyond threshold
  double threshold = 0;    // mass threshold (median of observed masses)
  int violations = 0;      // bins beyond threshold with mean > 2·SE above 0
  std::vector<std::pair<double, double>> bin_means;  // (mass center, mean rate)
};

/// Empirical 𝓛W₂ diagnostic: one-step W₂ increments per unit time, binned by
/// mass; the negative-drift envelope should dominate for large mass.
DriftCheckStats drift_check(
    const std::vector<std::pair<double, double>>& samples, double dt);

/// Observer factory wiring a monitor and an occupation measure into
/// simulate(); values are taken from the tracked block of the state.
Observer make_monitor_observer(LyapunovMonitor& mon, OccupationMeasure& occ,
                               const ModelSpec& model, double dt);

}  // namespace persim
