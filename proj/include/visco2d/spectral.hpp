#ifndef VISCO2D_SPECTRAL_HPP
#define VISCO2D_SPECTRAL_HPP

// Discrete Fourier calculus on the unit torus [0,1)^2.
//
// Layout: array(i, j) holds the sample at x = i/N, y = j/N, so a column is a
// line of constant y.  Spectra use the same layout with index k mapped to the
// integer wavenumber n = k for k <= N/2 and n = k - N otherwise.
//
// Normalization: forward is unnormalized, inverse divides by N^2.  A constant
// field c therefore has spectrum c*N^2 at mode (0,0).

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "visco2d/errors.hpp"

namespace visco2d {

template <typename Scalar>
using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using ComplexArray = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
class SpectralGrid {
 public:
  using Complex = std::complex<Scalar>;

  explicit SpectralGrid(int n, bool dealias = true) : n_(n), dealias_(dealias) {
    if (n < 4 || n % 2 != 0) throw OutOfRange("grid_size", "must be an even integer >= 4");
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    wavenumber_.resize(n);
    for (int k = 0; k < n; ++k) wavenumber_[k] = k <= n / 2 ? k : k - n;
    k_squared_.resize(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        k_squared_(i, j) = two_pi * two_pi * Scalar(wavenumber_[i] * wavenumber_[i] + wavenumber_[j] * wavenumber_[j]);
    // Plan creation is lazy inside Eigen::FFT; warm both directions once.
    std::vector<Complex> a(n), b(n);
    fft_.fwd(b.data(), a.data(), n);
    fft_.inv(a.data(), b.data(), n);
  }

  int size() const noexcept { return n_; }
  Scalar spacing() const noexcept { return Scalar(1) / Scalar(n_); }
  bool dealias_enabled() const noexcept { return dealias_; }

  /// Integer wavenumber n for array index k.
  int wavenumber(Eigen::Index k) const { return wavenumber_[static_cast<std::size_t>(k)]; }
  /// 2*pi*n, the derivative symbol on the unit torus.
  Scalar physical_wavenumber(Eigen::Index k) const {
    return Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(wavenumber(k));
  }
  bool is_nyquist(Eigen::Index k) const { return k == n_ / 2; }

  /// 4*pi^2*|n|^2 per mode.
  const RealArray<Scalar>& k_squared() const noexcept { return k_squared_; }

  /// 2/3 rule on the square: true when the mode survives dealiasing.
  bool retained(Eigen::Index i, Eigen::Index j) const {
    return 3 * std::abs(wavenumber(i)) <= n_ && 3 * std::abs(wavenumber(j)) <= n_;
  }

  void check(const RealArray<Scalar>& a) const { check_shape(a.rows(), a.cols()); }
  void check(const ComplexArray<Scalar>& a) const { check_shape(a.rows(), a.cols()); }

  ComplexArray<Scalar> forward(const RealArray<Scalar>& values) const {
    check(values);
    ComplexArray<Scalar> out(n_, n_);
    for (int j = 0; j < n_; ++j) fft_.fwd(out.col(j).data(), values.col(j).data(), n_);
    std::vector<Complex> line(n_), res(n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) line[j] = out(i, j);
      fft_.fwd(res.data(), line.data(), n_);
      for (int j = 0; j < n_; ++j) out(i, j) = res[j];
    }
    return out;
  }

  ComplexArray<Scalar> forward(const ComplexArray<Scalar>& values) const {
    check(values);
    ComplexArray<Scalar> out(n_, n_);
    for (int j = 0; j < n_; ++j) fft_.fwd(out.col(j).data(), values.col(j).data(), n_);
    std::vector<Complex> line(n_), res(n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) line[j] = out(i, j);
      fft_.fwd(res.data(), line.data(), n_);
      for (int j = 0; j < n_; ++j) out(i, j) = res[j];
    }
    return out;
  }

  /// Real inverse; assumes a conjugate-symmetric spectrum.
  RealArray<Scalar> inverse(const ComplexArray<Scalar>& spectrum) const {
    check(spectrum);
    ComplexArray<Scalar> tmp(n_, n_);
    std::vector<Complex> line(n_), res(n_);
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) line[j] = spectrum(i, j);
      fft_.inv(res.data(), line.data(), n_);
      for (int j = 0; j < n_; ++j) tmp(i, j) = res[j];
    }
    RealArray<Scalar> out(n_, n_);
    for (int j = 0; j < n_; ++j) fft_.inv(out.col(j).data(), tmp.col(j).data(), n_);
    return out;
  }

  /// Sample coordinates x_i = i/N (also used for y).
  Scalar coordinate(Eigen::Index i) const { return Scalar(i) / Scalar(n_); }

 private:
  void check_shape(Eigen::Index rows, Eigen::Index cols) const {
    if (rows != n_ || cols != n_) throw SizeMismatch(Eigen::Index(n_) * n_, rows * cols);
  }

  int n_;
  bool dealias_;
  std::vector<int> wavenumber_;
  RealArray<Scalar> k_squared_;
  mutable Eigen::FFT<Scalar> fft_;
};

template <typename Scalar>
using GridPtr = std::shared_ptr<const SpectralGrid<Scalar>>;

template <typename Scalar>
GridPtr<Scalar> make_grid(int n, bool dealias = true) {
  return std::make_shared<const SpectralGrid<Scalar>>(n, dealias);
}

/// Real scalar field with lazily synchronized physical and spectral views.
/// Not safe for concurrent access while either view is stale.
template <typename Scalar>
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr<Scalar> grid)
      : grid_(std::move(grid)),
        values_(RealArray<Scalar>::Zero(grid_->size(), grid_->size())),
        spectrum_(ComplexArray<Scalar>::Zero(grid_->size(), grid_->size())) {}

  static ScalarField from_values(GridPtr<Scalar> grid, RealArray<Scalar> values) {
    grid->check(values);
    ScalarField f;
    f.grid_ = std::move(grid);
    f.values_ = std::move(values);
    f.spectrum_current_ = false;
    return f;
  }

  static ScalarField from_spectrum(GridPtr<Scalar> grid, ComplexArray<Scalar> spectrum) {
    grid->check(spectrum);
    ScalarField f;
    f.grid_ = std::move(grid);
    f.spectrum_ = std::move(spectrum);
    f.values_current_ = false;
    return f;
  }

  /// Both views at once, taken as consistent; used to restore checkpoints.
  static ScalarField from_both(GridPtr<Scalar> grid, RealArray<Scalar> values, ComplexArray<Scalar> spectrum) {
    grid->check(values);
    grid->check(spectrum);
    ScalarField f;
    f.grid_ = std::move(grid);
    f.values_ = std::move(values);
    f.spectrum_ = std::move(spectrum);
    return f;
  }

  /// Samples a callable g(x, y) on the grid.
  template <typename Fn>
  static ScalarField sample(GridPtr<Scalar> grid, Fn&& g) {
    const int n = grid->size();
    RealArray<Scalar> v(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) v(i, j) = g(grid->coordinate(i), grid->coordinate(j));
    return from_values(std::move(grid), std::move(v));
  }

  const SpectralGrid<Scalar>& grid() const { return *grid_; }
  const GridPtr<Scalar>& grid_ptr() const { return grid_; }

  const RealArray<Scalar>& values() const {
    if (!values_current_) {
      values_ = grid_->inverse(spectrum_);
      values_current_ = true;
    }
    return values_;
  }

  const ComplexArray<Scalar>& spectrum() const {
    if (!spectrum_current_) {
      spectrum_ = grid_->forward(values_);
      spectrum_current_ = true;
    }
    return spectrum_;
  }

  /// Mutable physical view; invalidates the spectrum.
  RealArray<Scalar>& values_mut() {
    values();
    spectrum_current_ = false;
    return values_;
  }

  /// Mutable spectral view; invalidates the samples.
  ComplexArray<Scalar>& spectrum_mut() {
    spectrum();
    values_current_ = false;
    return spectrum_;
  }

  Scalar mean() const { return values().mean(); }

 private:
  GridPtr<Scalar> grid_;
  mutable RealArray<Scalar> values_;
  mutable ComplexArray<Scalar> spectrum_;
  mutable bool values_current_ = true;
  mutable bool spectrum_current_ = true;
};

template <typename Scalar>
struct VectorField2 {
  ScalarField<Scalar> x;
  ScalarField<Scalar> y;

  VectorField2() = default;
  explicit VectorField2(const GridPtr<Scalar>& grid) : x(grid), y(grid) {}
  VectorField2(ScalarField<Scalar> x_, ScalarField<Scalar> y_) : x(std::move(x_)), y(std::move(y_)) {}

  const SpectralGrid<Scalar>& grid() const { return x.grid(); }
  const GridPtr<Scalar>& grid_ptr() const { return x.grid_ptr(); }
};

/// Symmetric 2x2 tensor field; B21 is B12 by storage.
template <typename Scalar>
struct SymTensorField {
  ScalarField<Scalar> b11;
  ScalarField<Scalar> b12;
  ScalarField<Scalar> b22;

  SymTensorField() = default;
  explicit SymTensorField(const GridPtr<Scalar>& grid) : b11(grid), b12(grid), b22(grid) {}
  SymTensorField(ScalarField<Scalar> a, ScalarField<Scalar> b, ScalarField<Scalar> c)
      : b11(std::move(a)), b12(std::move(b)), b22(std::move(c)) {}

  /// Spatially constant tensor [[c11, c12], [c12, c22]].
  static SymTensorField constant(const GridPtr<Scalar>& grid, Scalar c11, Scalar c12, Scalar c22) {
    const int n = grid->size();
    return {ScalarField<Scalar>::from_values(grid, RealArray<Scalar>::Constant(n, n, c11)),
            ScalarField<Scalar>::from_values(grid, RealArray<Scalar>::Constant(n, n, c12)),
            ScalarField<Scalar>::from_values(grid, RealArray<Scalar>::Constant(n, n, c22))};
  }
  static SymTensorField identity(const GridPtr<Scalar>& grid) { return constant(grid, 1, 0, 1); }

  const SpectralGrid<Scalar>& grid() const { return b11.grid(); }
  const GridPtr<Scalar>& grid_ptr() const { return b11.grid_ptr(); }

  /// 2x2 matrix at grid point (i, j).
  Eigen::Matrix<Scalar, 2, 2> at(Eigen::Index i, Eigen::Index j) const {
    Eigen::Matrix<Scalar, 2, 2> m;
    m << b11.values()(i, j), b12.values()(i, j), b12.values()(i, j), b22.values()(i, j);
    return m;
  }
};

// ---------------------------------------------------------------------------
// Spectral operators on raw spectra.

/// Derivative along axis 0 (x) or 1 (y); Nyquist modes are zeroed first.
template <typename Scalar>
ComplexArray<Scalar> derivative(const SpectralGrid<Scalar>& grid, const ComplexArray<Scalar>& spec, int axis) {
  grid.check(spec);
  const int n = grid.size();
  ComplexArray<Scalar> out(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (grid.is_nyquist(i) || grid.is_nyquist(j)) {
        out(i, j) = 0;
        continue;
      }
      const Scalar k = grid.physical_wavenumber(axis == 0 ? i : j);
      out(i, j) = std::complex<Scalar>(-k * spec(i, j).imag(), k * spec(i, j).real());
    }
  }
  return out;
}

template <typename Scalar>
ComplexArray<Scalar> laplacian(const SpectralGrid<Scalar>& grid, const ComplexArray<Scalar>& spec) {
  grid.check(spec);
  return spec * (-grid.k_squared()).template cast<std::complex<Scalar>>();
}

/// Zeroes modes with max(|n1|, |n2|) > N/3.
template <typename Scalar>
ComplexArray<Scalar> dealias(const SpectralGrid<Scalar>& grid, ComplexArray<Scalar> spec) {
  grid.check(spec);
  const int n = grid.size();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (!grid.retained(i, j)) spec(i, j) = 0;
  return spec;
}

/// Zeroes modes with |n| > k (Euclidean lattice norm).
template <typename Scalar>
ComplexArray<Scalar> truncate_ball(const SpectralGrid<Scalar>& grid, ComplexArray<Scalar> spec, int k) {
  grid.check(spec);
  const int n = grid.size();
  const long k2 = long(k) * k;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const long ni = grid.wavenumber(i), nj = grid.wavenumber(j);
      if (ni * ni + nj * nj > k2) spec(i, j) = 0;
    }
  }
  return spec;
}

/// Forward transform of a pointwise product, dealiased when the grid asks for it.
template <typename Scalar>
ComplexArray<Scalar> product_spectrum(const SpectralGrid<Scalar>& grid, const RealArray<Scalar>& values) {
  ComplexArray<Scalar> s = grid.forward(values);
  return grid.dealias_enabled() ? dealias(grid, std::move(s)) : s;
}

// ---------------------------------------------------------------------------
// Field-level calculus.

template <typename Scalar>
ScalarField<Scalar> derivative(const ScalarField<Scalar>& f, int axis) {
  return ScalarField<Scalar>::from_spectrum(f.grid_ptr(), derivative(f.grid(), f.spectrum(), axis));
}

template <typename Scalar>
VectorField2<Scalar> gradient(const ScalarField<Scalar>& f) {
  return {derivative(f, 0), derivative(f, 1)};
}

template <typename Scalar>
ScalarField<Scalar> divergence(const VectorField2<Scalar>& u) {
  const auto& g = u.grid();
  return ScalarField<Scalar>::from_spectrum(u.grid_ptr(),
                                            derivative(g, u.x.spectrum(), 0) + derivative(g, u.y.spectrum(), 1));
}

template <typename Scalar>
ScalarField<Scalar> laplacian(const ScalarField<Scalar>& f) {
  return ScalarField<Scalar>::from_spectrum(f.grid_ptr(), laplacian(f.grid(), f.spectrum()));
}

template <typename Scalar>
VectorField2<Scalar> laplacian(const VectorField2<Scalar>& u) {
  return {laplacian(u.x), laplacian(u.y)};
}

template <typename Scalar>
ScalarField<Scalar> dealias(const ScalarField<Scalar>& f) {
  return ScalarField<Scalar>::from_spectrum(f.grid_ptr(), dealias(f.grid(), f.spectrum()));
}

/// Solves Laplace(phi) = rhs for zero-mean phi; the mean of rhs is ignored.
template <typename Scalar>
ScalarField<Scalar> inverse_laplacian(const ScalarField<Scalar>& rhs) {
  const auto& g = rhs.grid();
  ComplexArray<Scalar> s = rhs.spectrum();
  const int n = g.size();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) s(i, j) = (i == 0 && j == 0) ? std::complex<Scalar>(0) : -s(i, j) / g.k_squared()(i, j);
  return ScalarField<Scalar>::from_spectrum(rhs.grid_ptr(), std::move(s));
}

/// Leray projection per mode: u -> u - n (n.u)/|n|^2; mean and Nyquist modes -> 0.
template <typename Scalar>
void leray_project_spectra(const SpectralGrid<Scalar>& grid, ComplexArray<Scalar>& ux, ComplexArray<Scalar>& uy) {
  const int n = grid.size();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if ((i == 0 && j == 0) || grid.is_nyquist(i) || grid.is_nyquist(j)) {
        ux(i, j) = 0;
        uy(i, j) = 0;
        continue;
      }
      const Scalar n1 = grid.wavenumber(i), n2 = grid.wavenumber(j);
      const std::complex<Scalar> proj = (n1 * ux(i, j) + n2 * uy(i, j)) / (n1 * n1 + n2 * n2);
      ux(i, j) -= n1 * proj;
      uy(i, j) -= n2 * proj;
    }
  }
}

template <typename Scalar>
VectorField2<Scalar> leray_project(const VectorField2<Scalar>& u) {
  ComplexArray<Scalar> sx = u.x.spectrum(), sy = u.y.spectrum();
  leray_project_spectra(u.grid(), sx, sy);
  return {ScalarField<Scalar>::from_spectrum(u.grid_ptr(), std::move(sx)),
          ScalarField<Scalar>::from_spectrum(u.grid_ptr(), std::move(sy))};
}

/// Galerkin velocity projector: Leray projection restricted to |n| <= k.
template <typename Scalar>
VectorField2<Scalar> project_Pk(const VectorField2<Scalar>& u, int k) {
  if (k > u.grid().size() / 2) throw OutOfRange("galerkin_k", "must not exceed N/2");
  ComplexArray<Scalar> sx = truncate_ball(u.grid(), u.x.spectrum(), k);
  ComplexArray<Scalar> sy = truncate_ball(u.grid(), u.y.spectrum(), k);
  leray_project_spectra(u.grid(), sx, sy);
  return {ScalarField<Scalar>::from_spectrum(u.grid_ptr(), std::move(sx)),
          ScalarField<Scalar>::from_spectrum(u.grid_ptr(), std::move(sy))};
}

/// Galerkin tensor projector: componentwise truncation to |n| <= k.
template <typename Scalar>
SymTensorField<Scalar> project_Qk(const SymTensorField<Scalar>& b, int k) {
  if (k > b.grid().size() / 2) throw OutOfRange("galerkin_k", "must not exceed N/2");
  const auto& g = b.grid();
  const auto& p = b.grid_ptr();
  return {ScalarField<Scalar>::from_spectrum(p, truncate_ball(g, b.b11.spectrum(), k)),
          ScalarField<Scalar>::from_spectrum(p, truncate_ball(g, b.b12.spectrum(), k)),
          ScalarField<Scalar>::from_spectrum(p, truncate_ball(g, b.b22.spectrum(), k))};
}

// ---------------------------------------------------------------------------
// Discrete L2 quantities (collocation mean, domain area 1).

template <typename Scalar>
Scalar inner(const ScalarField<Scalar>& a, const ScalarField<Scalar>& b) {
  return (a.values() * b.values()).mean();
}

template <typename Scalar>
Scalar inner(const VectorField2<Scalar>& a, const VectorField2<Scalar>& b) {
  return inner(a.x, b.x) + inner(a.y, b.y);
}

/// Frobenius pairing; the off-diagonal entry counts twice.
template <typename Scalar>
Scalar inner(const SymTensorField<Scalar>& a, const SymTensorField<Scalar>& b) {
  return inner(a.b11, b.b11) + Scalar(2) * inner(a.b12, b.b12) + inner(a.b22, b.b22);
}

template <typename Scalar>
Scalar norm_squared(const ScalarField<Scalar>& a) {
  return inner(a, a);
}
template <typename Scalar>
Scalar norm_squared(const VectorField2<Scalar>& a) {
  return inner(a, a);
}
template <typename Scalar>
Scalar norm_squared(const SymTensorField<Scalar>& a) {
  return inner(a, a);
}

}  // namespace visco2d

#endif  // VISCO2D_SPECTRAL_HPP
