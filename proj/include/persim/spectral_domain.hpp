#pragma once

#include <array>
#include <memory>
#include <vector>

#include "persim/error.hpp"

namespace persim {

enum class DomainKind { Torus, NeumannInterval };

/// Discretized spatial domain together with the eigenbasis of its Laplacian
/// and spectral transform plans. Immutable after construction; concurrent
/// transform calls on distinct buffers are safe.
///
/// The eigenbasis solves Δφ_k = λ_k w φ_k (plain Fourier/cosine basis when
/// w ≡ 1), is orthonormal in L²(D, w·dx), has φ_0 constant with λ_0 = 0, and
/// is ordered by nonincreasing eigenvalue.
class SpectralDomain {
 public:
  static std::shared_ptr<const SpectralDomain> build(
      DomainKind kind, int dim, std::vector<double> extents,
      std::vector<int> grid_sizes, std::vector<double> weight = {});

  ~SpectralDomain();
  SpectralDomain(const SpectralDomain&) = delete;
  SpectralDomain& operator=(const SpectralDomain&) = delete;

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int size() const { return size_; }
  int grid_size(int axis) const { return n_[axis]; }
  double extent(int axis) const { return extent_[axis]; }
  double cell_volume() const { return cell_volume_; }
  /// Coordinate of grid point gi along `axis` (row-major, x fastest).
  double coord(int gi, int axis) const;

  const std::vector<double>& weight() const { return weight_; }
  bool unit_weight() const { return unit_weight_; }
  /// μ(D) = ∫ w dx.
  double weighted_volume() const { return weighted_volume_; }

  // Eigenbasis, sorted by nonincreasing eigenvalue; mode_count() == size().
  int mode_count() const { return size_; }
  double eigenvalue(int k) const { return eigenvalues_[k]; }
  /// Grid values of eigenfunction k. On very large unit-weight domains the
  /// returned reference points at thread-local scratch and is only valid
  /// until the next call on the same thread.
  const std::vector<double>& eigenfunction(int k) const;
  double eigenfunction_sup(int k) const;

  // Spectral transforms for a single component of length size().
  void to_modes(const double* grid, double* modes) const;
  void from_modes(const double* modes, double* grid) const;

  // Weighted norms and pairings.
  double l1(const double* f) const;
  double l2(const double* f) const;
  double linf(const double* f) const;
  double inner(const double* f, const double* g) const;
  double integral(const double* f) const;  // signed ∫ f w dx

 private:
  SpectralDomain() = default;
  void build_axis_plans();
  void build_weighted_basis();
  void fill_eigenfunction(int k, double* out) const;
  void transform_axis(int axis, bool forward, double* data, int count,
                      int stride, int block) const;

  DomainKind kind_ = DomainKind::Torus;
  int dim_ = 1;
  int size_ = 0;
  std::array<int, 2> n_{0, 0};
  std::array<double, 2> extent_{0, 0};
  double cell_volume_ = 0;
  std::vector<double> weight_;
  bool unit_weight_ = true;
  double weighted_volume_ = 0;

  // mode ordering: sorted index -> per-axis analytic slot
  std::vector<double> eigenvalues_;
  std::vector<int> mode_slot_;     // sorted index -> tensor slot
  std::vector<int> slot_to_mode_;  // tensor slot -> sorted index
  mutable std::vector<std::vector<double>> eigenfields_;  // precomputed grids
  std::vector<double> eigen_sup_;

  struct FftPlans;
  std::unique_ptr<FftPlans> plans_;

  // dense path for non-unit weight
  struct DenseBasis;
  std::unique_ptr<DenseBasis> dense_;

  friend class OperatorSpectrum;
};

/// m-component nonnegative function on the grid, component-major storage.
struct Field {
  std::shared_ptr<const SpectralDomain> dom;
  int m = 1;
  std::vector<double> data;

  Field() = default;
  Field(std::shared_ptr<const SpectralDomain> d, int comps, double value = 0.0)
      : dom(std::move(d)), m(comps), data(static_cast<size_t>(comps) * dom_size(), value) {}

  size_t dom_size() const { return dom ? static_cast<size_t>(dom->size()) : 0; }
  double* comp(int c) { return data.data() + static_cast<size_t>(c) * dom->size(); }
  const double* comp(int c) const { return data.data() + static_cast<size_t>(c) * dom->size(); }
  bool finite() const;
};

struct FieldNorms {
  double l1 = 0, l2 = 0, linf = 0;
};

/// Weighted norms over all components (L1/L2 summed in the natural way).
FieldNorms norms(const Field& f);

/// Mode coefficients of a single-component slice.
std::vector<double> to_modes(const SpectralDomain& dom, const double* comp);

}  // namespace persim
