#ifndef VISCO2D_FIELDS_HPP
#define VISCO2D_FIELDS_HPP

#include <cmath>
#include <utility>

#include "visco2d/spectral.hpp"

namespace visco2d {

/// Zero-mean, divergence-free velocity; the invariant is restored by
/// leray_project after every update.
template <typename Scalar>
using VelocityField = VectorField2<Scalar>;

template <typename Scalar>
struct State {
  Scalar t = 0;
  VelocityField<Scalar> v;
  SymTensorField<Scalar> B;

  State() = default;
  State(Scalar t_, VelocityField<Scalar> v_, SymTensorField<Scalar> b_) : t(t_), v(std::move(v_)), B(std::move(b_)) {
    if (v.grid().size() != B.grid().size())
      throw SizeMismatch(v.grid().size(), B.grid().size());
  }

  /// Rest state (0, I).
  static State equilibrium(const GridPtr<Scalar>& grid) {
    return {Scalar(0), VelocityField<Scalar>(grid), SymTensorField<Scalar>::identity(grid)};
  }

  const GridPtr<Scalar>& grid_ptr() const { return v.grid_ptr(); }
  const SpectralGrid<Scalar>& grid() const { return v.grid(); }
};

/// B = [[g/2 + e, f], [f, g/2 - e]].
template <typename Scalar>
struct EFGView {
  ScalarField<Scalar> e;
  ScalarField<Scalar> f;
  ScalarField<Scalar> g;
};

template <typename Scalar>
EFGView<Scalar> to_efg(const SymTensorField<Scalar>& b) {
  const auto& p = b.grid_ptr();
  const auto& b11 = b.b11.values();
  const auto& b22 = b.b22.values();
  return {ScalarField<Scalar>::from_values(p, (b11 - b22) / Scalar(2)),
          ScalarField<Scalar>::from_values(p, b.b12.values()),
          ScalarField<Scalar>::from_values(p, b11 + b22)};
}

template <typename Scalar>
SymTensorField<Scalar> from_efg(const EFGView<Scalar>& v) {
  const auto& p = v.e.grid_ptr();
  const auto& e = v.e.values();
  const auto& g = v.g.values();
  return {ScalarField<Scalar>::from_values(p, g / Scalar(2) + e), ScalarField<Scalar>::from_values(p, v.f.values()),
          ScalarField<Scalar>::from_values(p, g / Scalar(2) - e)};
}

/// Symmetric part D(v) and the single entry w = W12 of the skew part,
/// with (grad v)_ij = d v_i / d x_j.
template <typename Scalar>
struct VelocityGradientParts {
  SymTensorField<Scalar> D;
  ScalarField<Scalar> w;
};

template <typename Scalar>
VelocityGradientParts<Scalar> velocity_gradient_parts(const VelocityField<Scalar>& v) {
  const auto& p = v.grid_ptr();
  const auto ux = derivative(v.x, 0).values();
  const auto uy = derivative(v.x, 1).values();
  const auto vx = derivative(v.y, 0).values();
  const auto vy = derivative(v.y, 1).values();
  SymTensorField<Scalar> d{ScalarField<Scalar>::from_values(p, ux),
                           ScalarField<Scalar>::from_values(p, (uy + vx) / Scalar(2)),
                           ScalarField<Scalar>::from_values(p, vy)};
  return {std::move(d), ScalarField<Scalar>::from_values(p, (uy - vx) / Scalar(2))};
}

template <typename Scalar>
struct EigenMinMax {
  ScalarField<Scalar> min;
  ScalarField<Scalar> max;
};

/// lambda = g/2 -+ sqrt(e^2 + f^2), pointwise.
template <typename Scalar>
EigenMinMax<Scalar> eigen_minmax(const SymTensorField<Scalar>& b) {
  const auto& p = b.grid_ptr();
  const auto& b11 = b.b11.values();
  const auto& b12 = b.b12.values();
  const auto& b22 = b.b22.values();
  const RealArray<Scalar> half_trace = (b11 + b22) / Scalar(2);
  const RealArray<Scalar> e = (b11 - b22) / Scalar(2);
  const RealArray<Scalar> radius = (e.square() + b12.square()).sqrt();
  return {ScalarField<Scalar>::from_values(p, half_trace - radius), ScalarField<Scalar>::from_values(p, half_trace + radius)};
}

template <typename Scalar>
Scalar min_eigenvalue(const SymTensorField<Scalar>& b) {
  return eigen_minmax(b).min.values().minCoeff();
}

template <typename Scalar>
bool all_finite(const ScalarField<Scalar>& f) {
  return f.spectrum().allFinite();
}

template <typename Scalar>
bool all_finite(const State<Scalar>& s) {
  return all_finite(s.v.x) && all_finite(s.v.y) && all_finite(s.B.b11) && all_finite(s.B.b12) && all_finite(s.B.b22);
}

}  // namespace visco2d

#endif  // VISCO2D_FIELDS_HPP
