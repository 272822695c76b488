#include "persim/spectral_domain.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numeric>

namespace persim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

bool power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

// Analytic 1-D real eigenbasis slot layout.
//   Torus, n points:      slot 0: k=0;  slot 2k-1: cos k; slot 2k: sin k
//                         (k = 1..n/2-1); slot n-1: Nyquist cosine.
//   Neumann interval:     slot k: cos(kπx/L), k = 0..n-1.
double axis_eigenvalue(DomainKind kind, int n, double L, int slot) {
  if (kind == DomainKind::Torus) {
    int k = (slot == 0) ? 0 : (slot == n - 1 ? n / 2 : (slot + 1) / 2);
    const double om = kTwoPi * k / L;
    return -om * om;
  }
  const double om = M_PI * slot / L;
  return -om * om;
}

double axis_basis_value(DomainKind kind, int n, double L, int slot, double x) {
  if (kind == DomainKind::Torus) {
    if (slot == 0) return 1.0 / std::sqrt(L);
    if (slot == n - 1)  // Nyquist cosine: ±1 on the grid, unit discrete norm
      return std::cos(kTwoPi * (n / 2) * x / L) / std::sqrt(L);
    const int k = (slot + 1) / 2;
    const double a = kTwoPi * k * x / L;
    const double s = std::sqrt(2.0 / L);
    return (slot % 2 == 1) ? s * std::cos(a) : s * std::sin(a);
  }
  if (slot == 0) return 1.0 / std::sqrt(L);
  return std::sqrt(2.0 / L) * std::cos(M_PI * slot * x / L);
}

}  // namespace

struct SpectralDomain::FftPlans {
  // one set of 1-D plans per axis; scratch is allocated per call
  fftw_plan r2c[2] = {nullptr, nullptr};
  fftw_plan c2r[2] = {nullptr, nullptr};
  fftw_plan dct_fwd[2] = {nullptr, nullptr};
  fftw_plan dct_inv[2] = {nullptr, nullptr};
  ~FftPlans() {
    for (int a = 0; a < 2; ++a) {
      if (r2c[a]) fftw_destroy_plan(r2c[a]);
      if (c2r[a]) fftw_destroy_plan(c2r[a]);
      if (dct_fwd[a]) fftw_destroy_plan(dct_fwd[a]);
      if (dct_inv[a]) fftw_destroy_plan(dct_inv[a]);
    }
  }
};

struct SpectralDomain::DenseBasis {
  Eigen::MatrixXd synth;     // grid x modes (columns = eigenfunctions)
  Eigen::MatrixXd analysis;  // modes x grid (includes w·Δx quadrature)
};

double SpectralDomain::coord(int gi, int axis) const {
  const int ix = gi % n_[0];
  const int iy = gi / n_[0];
  const int i = (axis == 0) ? ix : iy;
  const double h = extent_[axis] / n_[axis];
  return (kind_ == DomainKind::Torus) ? i * h : (i + 0.5) * h;
}

std::shared_ptr<const SpectralDomain> SpectralDomain::build(
    DomainKind kind, int dim, std::vector<double> extents,
    std::vector<int> grid_sizes, std::vector<double> weight) {
  if (dim < 1 || dim > 2)
    throw InvariantError("domain: unsupported dimension " + std::to_string(dim));
  if (kind == DomainKind::NeumannInterval && dim != 1)
    throw InvariantError("domain: neumann-interval is one-dimensional");
  if (static_cast<int>(extents.size()) != dim ||
      static_cast<int>(grid_sizes.size()) != dim)
    throw InvariantError("domain: extents/grid_sizes must match dimension");

  auto dom = std::shared_ptr<SpectralDomain>(new SpectralDomain());
  dom->kind_ = kind;
  dom->dim_ = dim;
  dom->size_ = 1;
  dom->cell_volume_ = 1.0;
  for (int a = 0; a < dim; ++a) {
    if (!power_of_two(grid_sizes[a]) || grid_sizes[a] < 8)
      throw InvariantError("domain: grid size must be a power of two >= 8");
    if (!(extents[a] > 0)) throw InvariantError("domain: extent must be positive");
    dom->n_[a] = grid_sizes[a];
    dom->extent_[a] = extents[a];
    dom->size_ *= grid_sizes[a];
    dom->cell_volume_ *= extents[a] / grid_sizes[a];
  }

  if (weight.empty()) {
    dom->weight_.assign(dom->size_, 1.0);
    dom->unit_weight_ = true;
  } else {
    if (static_cast<int>(weight.size()) != dom->size_)
      throw InvariantError("domain: weight must have one value per grid point");
    for (double w : weight)
      if (!(w > 0) || !std::isfinite(w))
        throw InvariantError("domain: weight must be strictly positive");
    dom->weight_ = std::move(weight);
    const auto [mn, mx] = std::minmax_element(dom->weight_.begin(), dom->weight_.end());
    dom->unit_weight_ = (*mx - *mn) < 1e-14 && std::abs(*mn - 1.0) < 1e-14;
  }
  dom->weighted_volume_ =
      dom->cell_volume_ *
      std::accumulate(dom->weight_.begin(), dom->weight_.end(), 0.0);

  dom->build_axis_plans();

  // tensor spectrum, sorted nonincreasing (ties broken by slot for determinism)
  const int nx = dom->n_[0];
  const int ny = (dim == 2) ? dom->n_[1] : 1;
  std::vector<double> slot_eval(dom->size_);
  for (int sy = 0; sy < ny; ++sy)
    for (int sx = 0; sx < nx; ++sx) {
      double ev = axis_eigenvalue(kind, nx, dom->extent_[0], sx);
      if (dim == 2) ev += axis_eigenvalue(kind, ny, dom->extent_[1], sy);
      slot_eval[sy * nx + sx] = ev;
    }
  std::vector<int> order(dom->size_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (slot_eval[a] != slot_eval[b]) return slot_eval[a] > slot_eval[b];
    return a < b;
  });
  dom->mode_slot_ = order;
  dom->slot_to_mode_.assign(dom->size_, 0);
  dom->eigenvalues_.resize(dom->size_);
  for (int k = 0; k < dom->size_; ++k) {
    dom->slot_to_mode_[order[k]] = k;
    dom->eigenvalues_[k] = slot_eval[order[k]];
  }

  if (!dom->unit_weight_) dom->build_weighted_basis();

  // Cache eigenfunction grids up to a memory cap; larger domains evaluate on
  // demand into a thread-local scratch (see eigenfunction()).
  const bool cache = dom->size_ <= 2048 || !dom->unit_weight_;
  if (cache) dom->eigenfields_.resize(dom->size_);
  dom->eigen_sup_.resize(dom->size_);
  std::vector<double> scratch;
  for (int k = 0; k < dom->size_; ++k) {
    std::vector<double>& ef = cache ? dom->eigenfields_[k] : scratch;
    ef.resize(dom->size_);
    dom->fill_eigenfunction(k, ef.data());
    double s = 0;
    for (double v : ef) s = std::max(s, std::abs(v));
    dom->eigen_sup_[k] = s;
  }
  return dom;
}

void SpectralDomain::fill_eigenfunction(int k, double* out) const {
  if (!unit_weight_) {
    for (int gi = 0; gi < size_; ++gi) out[gi] = dense_->synth(gi, k);
    return;
  }
  const int nx = n_[0];
  const int ny = (dim_ == 2) ? n_[1] : 1;
  const int sx = mode_slot_[k] % nx;
  const int sy = mode_slot_[k] / nx;
  for (int gi = 0; gi < size_; ++gi) {
    double v = axis_basis_value(kind_, nx, extent_[0], sx, coord(gi, 0));
    if (dim_ == 2) v *= axis_basis_value(kind_, ny, extent_[1], sy, coord(gi, 1));
    out[gi] = v;
  }
}

SpectralDomain::~SpectralDomain() = default;

void SpectralDomain::build_axis_plans() {
  plans_ = std::make_unique<FftPlans>();
  for (int a = 0; a < dim_; ++a) {
    const int n = n_[a];
    std::vector<double> re(n);
    std::vector<std::complex<double>> cx(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (kind_ == DomainKind::Torus) {
      plans_->r2c[a] = fftw_plan_dft_r2c_1d(
          n, re.data(), reinterpret_cast<fftw_complex*>(cx.data()), flags);
      plans_->c2r[a] = fftw_plan_dft_c2r_1d(
          n, reinterpret_cast<fftw_complex*>(cx.data()), re.data(), flags);
    } else {
      std::vector<double> out(n);
      plans_->dct_fwd[a] =
          fftw_plan_r2r_1d(n, re.data(), out.data(), FFTW_REDFT10, flags);
      plans_->dct_inv[a] =
          fftw_plan_r2r_1d(n, re.data(), out.data(), FFTW_REDFT01, flags);
    }
  }
}

void SpectralDomain::build_weighted_basis() {
  const int N = size_;
  // plain orthonormal basis on the grid
  Eigen::MatrixXd P(N, N);
  Eigen::VectorXd lam0(N);
  const int nx = n_[0];
  const int ny = (dim_ == 2) ? n_[1] : 1;
  for (int slot = 0; slot < N; ++slot) {
    const int sx = slot % nx;
    const int sy = slot / nx;
    double ev = axis_eigenvalue(kind_, nx, extent_[0], sx);
    if (dim_ == 2) ev += axis_eigenvalue(kind_, ny, extent_[1], sy);
    lam0(slot) = ev;
    for (int gi = 0; gi < N; ++gi) {
      double v = axis_basis_value(kind_, nx, extent_[0], sx, coord(gi, 0));
      if (dim_ == 2) v *= axis_basis_value(kind_, ny, extent_[1], sy, coord(gi, 1));
      P(gi, slot) = v;
    }
  }
  // generalized problem Δφ = λ w φ in quadratic form:
  //   A v = λ B v,  A = Δx²·P Λ Pᵀ,  B = Δx·diag(w)
  Eigen::MatrixXd A =
      (cell_volume_ * cell_volume_) * (P * lam0.asDiagonal() * P.transpose());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) B(i, i) = cell_volume_ * weight_[i];
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, B);
  if (solver.info() != Eigen::Success)
    throw Error("domain: weighted eigenbasis solve failed");

  dense_ = std::make_unique<DenseBasis>();
  dense_->synth.resize(N, N);
  eigenvalues_.assign(N, 0.0);
  // Eigen returns ascending eigenvalues; we want nonincreasing
  for (int k = 0; k < N; ++k) {
    const int src = N - 1 - k;
    eigenvalues_[k] = solver.eigenvalues()(src);
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    // fix sign: make the mean positive, falls back to first entry
    double mean = v.sum();
    if (std::abs(mean) < 1e-12) mean = v(0);
    if (mean < 0) v = -v;
    dense_->synth.col(k) = v;
  }
  // index-0 eigenfunction is the constant with λ = 0 up to solver roundoff
  const double scale = std::abs(eigenvalues_.back()) + 1.0;
  if (std::abs(eigenvalues_[0]) > 1e-9 * scale)
    throw Error("domain: weighted basis lost the constant mode");
  eigenvalues_[0] = 0.0;
  dense_->analysis.resize(N, N);
  for (int k = 0; k < N; ++k)
    for (int gi = 0; gi < N; ++gi)
      dense_->analysis(k, gi) = dense_->synth(gi, k) * weight_[gi] * cell_volume_;
  mode_slot_.clear();
  slot_to_mode_.clear();
}

const std::vector<double>& SpectralDomain::eigenfunction(int k) const {
  if (!eigenfields_.empty()) return eigenfields_[k];
  // uncached path: valid until the next eigenfunction() call on this thread
  thread_local std::vector<double> scratch;
  scratch.resize(size_);
  fill_eigenfunction(k, scratch.data());
  return scratch;
}

double SpectralDomain::eigenfunction_sup(int k) const { return eigen_sup_[k]; }

// 1-D axis transform between grid values and analytic-basis slot coefficients.
// `count` blocks of `block` contiguous lanes, axis elements strided by `stride`.
void SpectralDomain::transform_axis(int axis, bool forward, double* data,
                                    int count, int stride, int block) const {
  const int n = n_[axis];
  const double L = extent_[axis];
  std::vector<double> line(n), out(n);
  std::vector<std::complex<double>> cx(n / 2 + 1);
  for (int b = 0; b < count; ++b) {
    for (int lane = 0; lane < block; ++lane) {
      double* base = data + static_cast<size_t>(b) * block * n + lane;
      for (int i = 0; i < n; ++i) line[i] = base[static_cast<size_t>(i) * stride];
      if (kind_ == DomainKind::Torus) {
        if (forward) {
          fftw_execute_dft_r2c(plans_->r2c[axis], line.data(),
                               reinterpret_cast<fftw_complex*>(cx.data()));
          const double c0 = std::sqrt(L) / n;
          const double ck = std::sqrt(2.0 * L) / n;
          out[0] = c0 * cx[0].real();
          for (int k = 1; k < n / 2; ++k) {
            out[2 * k - 1] = ck * cx[k].real();
            out[2 * k] = -ck * cx[k].imag();
          }
          out[n - 1] = c0 * cx[n / 2].real();
        } else {
          const double c0 = n / std::sqrt(L);
          const double ck = n / std::sqrt(2.0 * L);
          cx[0] = {c0 * line[0], 0.0};
          for (int k = 1; k < n / 2; ++k)
            cx[k] = {ck * line[2 * k - 1], -ck * line[2 * k]};
          cx[n / 2] = {c0 * line[n - 1], 0.0};
          fftw_execute_dft_c2r(plans_->c2r[axis],
                               reinterpret_cast<fftw_complex*>(cx.data()),
                               out.data());
          for (int i = 0; i < n; ++i) out[i] /= n;
        }
      } else {
        if (forward) {
          fftw_execute_r2r(plans_->dct_fwd[axis], line.data(), out.data());
          const double h = L / n;
          out[0] *= 0.5 * h / std::sqrt(L);
          const double ck = 0.5 * h * std::sqrt(2.0 / L);
          for (int k = 1; k < n; ++k) out[k] *= ck;
        } else {
          std::vector<double>& z = line;  // reuse as staging
          double tmp0 = z[0];
          z[0] = tmp0 / std::sqrt(L);
          const double ck = 0.5 * std::sqrt(2.0 / L);
          for (int k = 1; k < n; ++k) z[k] *= ck;
          fftw_execute_r2r(plans_->dct_inv[axis], z.data(), out.data());
        }
      }
      for (int i = 0; i < n; ++i) base[static_cast<size_t>(i) * stride] = out[i];
    }
  }
}

void SpectralDomain::to_modes(const double* grid, double* modes) const {
  if (!unit_weight_) {
    Eigen::Map<const Eigen::VectorXd> g(grid, size_);
    Eigen::Map<Eigen::VectorXd> m(modes, size_);
    m = dense_->analysis * g;
    return;
  }
  std::vector<double> slots(grid, grid + size_);
  if (dim_ == 1) {
    transform_axis(0, true, slots.data(), 1, 1, 1);
  } else {
    // x-direction per row, then y-direction per column
    transform_axis(0, true, slots.data(), n_[1], 1, 1);
    transform_axis(1, true, slots.data(), 1, n_[0], n_[0]);
  }
  for (int k = 0; k < size_; ++k) modes[k] = slots[mode_slot_[k]];
}

void SpectralDomain::from_modes(const double* modes, double* grid) const {
  if (!unit_weight_) {
    Eigen::Map<const Eigen::VectorXd> m(modes, size_);
    Eigen::Map<Eigen::VectorXd> g(grid, size_);
    g = dense_->synth * m;
    return;
  }
  std::vector<double> slots(size_);
  for (int k = 0; k < size_; ++k) slots[mode_slot_[k]] = modes[k];
  if (dim_ == 1) {
    transform_axis(0, false, slots.data(), 1, 1, 1);
  } else {
    transform_axis(1, false, slots.data(), 1, n_[0], n_[0]);
    transform_axis(0, false, slots.data(), n_[1], 1, 1);
  }
  std::memcpy(grid, slots.data(), sizeof(double) * size_);
}

double SpectralDomain::l1(const double* f) const {
  double s = 0;
  for (int i = 0; i < size_; ++i) s += std::abs(f[i]) * weight_[i];
  return s * cell_volume_;
}

double SpectralDomain::l2(const double* f) const {
  double s = 0;
  for (int i = 0; i < size_; ++i) s += f[i] * f[i] * weight_[i];
  return std::sqrt(s * cell_volume_);
}

double SpectralDomain::linf(const double* f) const {
  double s = 0;
  for (int i = 0; i < size_; ++i) s = std::max(s, std::abs(f[i]));
  return s;
}

double SpectralDomain::inner(const double* f, const double* g) const {
  double s = 0;
  for (int i = 0; i < size_; ++i) s += f[i] * g[i] * weight_[i];
  return s * cell_volume_;
}

double SpectralDomain::integral(const double* f) const {
  double s = 0;
  for (int i = 0; i < size_; ++i) s += f[i] * weight_[i];
  return s * cell_volume_;
}

bool Field::finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

FieldNorms norms(const Field& f) {
  FieldNorms out;
  double l2sq = 0;
  for (int c = 0; c < f.m; ++c) {
    out.l1 += f.dom->l1(f.comp(c));
    const double l2c = f.dom->l2(f.comp(c));
    l2sq += l2c * l2c;
    out.linf = std::max(out.linf, f.dom->linf(f.comp(c)));
  }
  out.l2 = std::sqrt(l2sq);
  return out;
}

std::vector<double> to_modes(const SpectralDomain& dom, const double* comp) {
  std::vector<double> modes(dom.size());
  dom.to_modes(comp, modes.data());
  return modes;
}

}  // namespace persim
