#ifndef VISCO2D_CONSTITUTIVE_HPP
#define VISCO2D_CONSTITUTIVE_HPP

// Pointwise closures of the model.  Each closure exists as a 2x2 function on
// Eigen matrices and as a field map applying it at every collocation point.
// |A| is the Frobenius norm throughout.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Core>
#include <Eigen/LU>

#include "visco2d/config.hpp"
#include "visco2d/errors.hpp"
#include "visco2d/spectral.hpp"

namespace visco2d {

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

namespace pointwise {

template <typename Scalar>
Mat2<Scalar> stress_S(const Mat2<Scalar>& b, Scalar beta) {
  const Mat2<Scalar> id = Mat2<Scalar>::Identity();
  return (Scalar(1) - beta) * (b - id) + beta * (b * b - b);
}

template <typename Scalar>
Mat2<Scalar> relax_R(const Mat2<Scalar>& b, Scalar delta1, Scalar delta2) {
  const Mat2<Scalar> id = Mat2<Scalar>::Identity();
  return delta1 * (b - id) + delta2 * (b * b - b);
}

/// Gradient of the free energy with respect to B.
template <typename Scalar>
Mat2<Scalar> conjugate_J(const Mat2<Scalar>& b, Scalar beta) {
  const Mat2<Scalar> id = Mat2<Scalar>::Identity();
  return (Scalar(1) - beta) * (id - b.inverse()) + beta * (b - id);
}

/// Helmholtz free energy; +inf when det B <= 0.
template <typename Scalar>
Scalar free_energy(const Mat2<Scalar>& b, Scalar beta) {
  const Scalar det = b.determinant();
  if (!(det > 0)) return std::numeric_limits<Scalar>::infinity();
  const Mat2<Scalar> id = Mat2<Scalar>::Identity();
  return (Scalar(1) - beta) * (b.trace() - Scalar(2) - std::log(det)) + beta / Scalar(2) * (b - id).squaredNorm();
}

template <typename Scalar>
Scalar min_eigenvalue(const Mat2<Scalar>& b) {
  const Scalar e = (b(0, 0) - b(1, 1)) / Scalar(2);
  const Scalar f = Scalar(0.5) * (b(0, 1) + b(1, 0));
  return (b(0, 0) + b(1, 1)) / Scalar(2) - std::hypot(e, f);
}

template <typename Scalar>
Scalar max_eigenvalue(const Mat2<Scalar>& b) {
  const Scalar e = (b(0, 0) - b(1, 1)) / Scalar(2);
  const Scalar f = Scalar(0.5) * (b(0, 1) + b(1, 0));
  return (b(0, 0) + b(1, 1)) / Scalar(2) + std::hypot(e, f);
}

/// Closed-form square root of a 2x2 SPD matrix.
template <typename Scalar>
Mat2<Scalar> spd_sqrt(const Mat2<Scalar>& b) {
  const Scalar s = std::sqrt(b.determinant());
  const Scalar t = std::sqrt(b.trace() + Scalar(2) * s);
  return (b + s * Mat2<Scalar>::Identity()) / t;
}

/// Eigenvalue cutoff of the regularized scheme.  epsilon == 0 returns 1.
template <typename Scalar>
Scalar cutoff_rho(const Mat2<Scalar>& b, Scalar epsilon) {
  if (epsilon == Scalar(0)) return Scalar(1);
  const Scalar lambda = min_eigenvalue(b);
  if (lambda <= epsilon) return Scalar(0);
  const Scalar nb = b.norm();
  return (lambda - epsilon) / (lambda * (Scalar(1) + epsilon * nb * nb * nb));
}

/// Relaxation part of the dissipation, i.e. R(B) : J(B) written as a sum of squares.
template <typename Scalar>
Scalar relaxation_dissipation(const Mat2<Scalar>& b, Scalar beta, Scalar delta1, Scalar delta2) {
  const Mat2<Scalar> id = Mat2<Scalar>::Identity();
  const Mat2<Scalar> r = spd_sqrt(b);
  const Mat2<Scalar> rinv = r.inverse();
  return (Scalar(1) - beta) * delta1 * (r - rinv).squaredNorm() + beta * delta2 * (b * r - r).squaredNorm() +
         (beta * delta1 + (Scalar(1) - beta) * delta2) * (b - id).squaredNorm();
}

/// Stress-diffusion part of the dissipation from the two partial derivatives of B.
template <typename Scalar>
Scalar diffusion_dissipation(const Mat2<Scalar>& b, const Mat2<Scalar>& bx, const Mat2<Scalar>& by, Scalar beta) {
  const Mat2<Scalar> rinv = spd_sqrt(b).inverse();
  return (Scalar(1) - beta) * ((rinv * bx * rinv).squaredNorm() + (rinv * by * rinv).squaredNorm()) +
         beta * (bx.squaredNorm() + by.squaredNorm());
}

}  // namespace pointwise

namespace detail {

template <typename Scalar, typename Fn>
SymTensorField<Scalar> map_tensor(const SymTensorField<Scalar>& b, Fn&& fn) {
  const int n = b.grid().size();
  RealArray<Scalar> o11(n, n), o12(n, n), o22(n, n);
  const auto& v11 = b.b11.values();
  const auto& v12 = b.b12.values();
  const auto& v22 = b.b22.values();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      Mat2<Scalar> m;
      m << v11(i, j), v12(i, j), v12(i, j), v22(i, j);
      const Mat2<Scalar> r = fn(m, i, j);
      o11(i, j) = r(0, 0);
      o12(i, j) = r(0, 1);
      o22(i, j) = r(1, 1);
    }
  }
  const auto& g = b.grid_ptr();
  return {ScalarField<Scalar>::from_values(g, std::move(o11)), ScalarField<Scalar>::from_values(g, std::move(o12)),
          ScalarField<Scalar>::from_values(g, std::move(o22))};
}

template <typename Scalar, typename Fn>
ScalarField<Scalar> map_scalar(const SymTensorField<Scalar>& b, Fn&& fn) {
  const int n = b.grid().size();
  RealArray<Scalar> out(n, n);
  const auto& v11 = b.b11.values();
  const auto& v12 = b.b12.values();
  const auto& v22 = b.b22.values();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      Mat2<Scalar> m;
      m << v11(i, j), v12(i, j), v12(i, j), v22(i, j);
      out(i, j) = fn(m, i, j);
    }
  }
  return ScalarField<Scalar>::from_values(b.grid_ptr(), std::move(out));
}

}  // namespace detail

template <typename Scalar>
SymTensorField<Scalar> stress_S(const SymTensorField<Scalar>& b, const ModelParams& p) {
  const Scalar beta(p.beta);
  return detail::map_tensor(b, [&](const Mat2<Scalar>& m, int, int) { return pointwise::stress_S(m, beta); });
}

template <typename Scalar>
SymTensorField<Scalar> relax_R(const SymTensorField<Scalar>& b, const ModelParams& p) {
  const Scalar d1(p.delta1), d2(p.delta2);
  return detail::map_tensor(b, [&](const Mat2<Scalar>& m, int, int) { return pointwise::relax_R(m, d1, d2); });
}

/// Throws Singular where det B == 0.
template <typename Scalar>
SymTensorField<Scalar> conjugate_J(const SymTensorField<Scalar>& b, const ModelParams& p) {
  const Scalar beta(p.beta);
  return detail::map_tensor(b, [&](const Mat2<Scalar>& m, int i, int j) {
    if (m.determinant() == Scalar(0)) throw Singular(i, j);
    return pointwise::conjugate_J(m, beta);
  });
}

/// Pointwise values and the domain integral (collocation mean).
template <typename Scalar>
struct FieldIntegral {
  ScalarField<Scalar> field;
  Scalar integral;
};

/// Throws NonPositiveDeterminant where det B <= 0.
template <typename Scalar>
FieldIntegral<Scalar> free_energy_psi(const SymTensorField<Scalar>& b, const ModelParams& p) {
  const Scalar beta(p.beta);
  auto psi = detail::map_scalar(b, [&](const Mat2<Scalar>& m, int i, int j) {
    if (!(m.determinant() > Scalar(0))) throw NonPositiveDeterminant(i, j);
    return pointwise::free_energy(m, beta);
  });
  const Scalar total = psi.values().mean();
  return {std::move(psi), total};
}

template <typename Scalar>
ScalarField<Scalar> cutoff_rho_eps(const SymTensorField<Scalar>& b, Scalar epsilon) {
  return detail::map_scalar(b, [&](const Mat2<Scalar>& m, int, int) { return pointwise::cutoff_rho(m, epsilon); });
}

/// Full Cauchy stress -pI + 2D(v) + 2a S(B), stored entrywise.
template <typename Scalar>
struct TensorField2 {
  ScalarField<Scalar> t11, t12, t21, t22;
};

template <typename Scalar>
TensorField2<Scalar> cauchy_stress(const VectorField2<Scalar>& v, const ScalarField<Scalar>& pressure,
                                   const SymTensorField<Scalar>& b, const ModelParams& p) {
  const auto s = stress_S(b, p);
  const auto ux = derivative(v.x, 0).values();
  const auto uy = derivative(v.x, 1).values();
  const auto vx = derivative(v.y, 0).values();
  const auto vy = derivative(v.y, 1).values();
  const Scalar two_a = Scalar(2) * Scalar(p.a);
  const auto& pr = pressure.values();
  RealArray<Scalar> t11 = -pr + Scalar(2) * ux + two_a * s.b11.values();
  RealArray<Scalar> t12 = (uy + vx) + two_a * s.b12.values();
  RealArray<Scalar> t22 = -pr + Scalar(2) * vy + two_a * s.b22.values();
  const auto& g = b.grid_ptr();
  auto f12 = ScalarField<Scalar>::from_values(g, t12);
  return {ScalarField<Scalar>::from_values(g, std::move(t11)), f12, f12,
          ScalarField<Scalar>::from_values(g, std::move(t22))};
}

/// Dissipation rate split by mechanism.  `relaxation_weighted` carries the
/// cutoff weight rho_eps on the relaxation terms (equal to `relaxation` when
/// epsilon == 0).  All integrals are collocation means.
template <typename Scalar>
struct Dissipation {
  ScalarField<Scalar> field;  ///< unweighted pointwise xi
  Scalar integral = 0;        ///< unweighted total
  Scalar viscous = 0;         ///< integral of 2|D(v)|^2
  Scalar diffusion = 0;       ///< stress-diffusion terms
  Scalar relaxation = 0;      ///< relaxation terms, unweighted
  Scalar relaxation_weighted = 0;
  Scalar integral_weighted() const { return viscous + diffusion + relaxation_weighted; }
};

/// Throws NonSPD where B is not positive definite.
template <typename Scalar>
Dissipation<Scalar> dissipation_xi(const VectorField2<Scalar>& v, const SymTensorField<Scalar>& b,
                                   const ModelParams& p) {
  const int n = b.grid().size();
  const Scalar beta(p.beta), d1(p.delta1), d2(p.delta2), eps(p.epsilon);
  const auto ux = derivative(v.x, 0).values();
  const auto uy = derivative(v.x, 1).values();
  const auto vx = derivative(v.y, 0).values();
  const auto vy = derivative(v.y, 1).values();
  RealArray<Scalar> dB[2][3];
  for (int axis = 0; axis < 2; ++axis) {
    dB[axis][0] = derivative(b.b11, axis).values();
    dB[axis][1] = derivative(b.b12, axis).values();
    dB[axis][2] = derivative(b.b22, axis).values();
  }
  const auto& v11 = b.b11.values();
  const auto& v12 = b.b12.values();
  const auto& v22 = b.b22.values();

  Dissipation<Scalar> out;
  RealArray<Scalar> xi(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      Mat2<Scalar> m;
      m << v11(i, j), v12(i, j), v12(i, j), v22(i, j);
      if (!(pointwise::min_eigenvalue(m) > Scalar(0))) throw NonSPD(i, j);
      Mat2<Scalar> bx, by;
      bx << dB[0][0](i, j), dB[0][1](i, j), dB[0][1](i, j), dB[0][2](i, j);
      by << dB[1][0](i, j), dB[1][1](i, j), dB[1][1](i, j), dB[1][2](i, j);
      const Scalar d12 = Scalar(0.5) * (uy(i, j) + vx(i, j));
      const Scalar visc = Scalar(2) * (ux(i, j) * ux(i, j) + Scalar(2) * d12 * d12 + vy(i, j) * vy(i, j));
      const Scalar diff = pointwise::diffusion_dissipation(m, bx, by, beta);
      const Scalar rel = pointwise::relaxation_dissipation(m, beta, d1, d2);
      xi(i, j) = visc + diff + rel;
      out.viscous += visc;
      out.diffusion += diff;
      out.relaxation += rel;
      out.relaxation_weighted += pointwise::cutoff_rho(m, eps) * rel;
    }
  }
  const Scalar count = Scalar(n) * Scalar(n);
  out.viscous /= count;
  out.diffusion /= count;
  out.relaxation /= count;
  out.relaxation_weighted /= count;
  out.integral = xi.mean();
  out.field = ScalarField<Scalar>::from_values(b.grid_ptr(), std::move(xi));
  return out;
}

}  // namespace visco2d

#endif  // VISCO2D_CONSTITUTIVE_HPP
