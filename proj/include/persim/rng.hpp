#pragma once

#include <cmath>
#include <cstdint>

namespace persim {

// Counter-based Gaussian stream. Every draw is a pure function of
// (master seed, trajectory, step, species, mode), so ensembles are
// reproducible and independent of thread scheduling or evaluation order.
namespace rng_detail {

inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix_key(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
  uint64_t h = mix64(a);
  h = mix64(h ^ (b + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (c + 0xc2b2ae3d27d4eb4fULL));
  h = mix64(h ^ (d + 0x165667b19e3779f9ULL));
  return h;
}

// uniform in (0,1]
inline double to_unit(uint64_t x) {
  return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

}  // namespace rng_detail

// One standard normal per (seed, trajectory, step, species, mode) counter.
inline double counter_normal(uint64_t seed, uint64_t trajectory, uint64_t step,
                             uint32_t species, uint32_t mode) {
  using namespace rng_detail;
  const uint64_t lane = (static_cast<uint64_t>(species) << 32) | mode;
  const uint64_t k1 = mix_key(seed, trajectory, step, 2 * lane);
  const uint64_t k2 = mix_key(seed, trajectory, step, 2 * lane + 1);
  const double u1 = to_unit(k1);
  const double u2 = to_unit(k2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Per-trajectory stream handle. `antithetic` negates every draw; pairing a
// stream with its antithetic twin is used by the ensemble drivers.
struct TrajectoryRng {
  uint64_t seed = 0;
  uint64_t trajectory = 0;
  bool antithetic = false;

  double normal(uint64_t step, uint32_t species, uint32_t mode) const {
    const double z = counter_normal(seed, trajectory, step, species, mode);
    return antithetic ? -z : z;
  }
};

// Sequential convenience stream for code that does not need counter
// addressing (initial-condition scrambling, test helpers).
class SequentialRng {
 public:
  explicit SequentialRng(uint64_t seed, uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  double normal() { return counter_normal(seed_, stream_, n_++, 0, 0); }
  double uniform() {
    return rng_detail::to_unit(rng_detail::mix_key(seed_, stream_, n_++, 1));
  }

 private:
  uint64_t seed_, stream_, n_ = 0;
};

}  // namespace persim
