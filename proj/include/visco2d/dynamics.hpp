#ifndef VISCO2D_DYNAMICS_HPP
#define VISCO2D_DYNAMICS_HPP

// Semi-discrete right-hand sides.
//
//   dv/dt = P[ -(v.grad)v + Lap v + 2a div(rho S(B)) + f ]
//   dB/dt = Lap B - (v.grad)B + rho [ a(DB + BD) + (WB - BW) - R(B) ]
//
// rho is the pointwise eigenvalue cutoff, identically 1 when epsilon == 0, so
// one assembly serves the plain and the regularized systems.  Quadratic terms
// are formed on the collocation grid and dealiased when the grid asks for it.

#include <cmath>
#include <utility>

#include "visco2d/config.hpp"
#include "visco2d/constitutive.hpp"
#include "visco2d/fields.hpp"
#include "visco2d/spectral.hpp"

namespace visco2d {

template <typename Scalar>
struct Tendency {
  VelocityField<Scalar> dv;
  SymTensorField<Scalar> dB;
};

struct AssemblyOptions {
  bool diffusion = true;  ///< include the Laplacians (off for the explicit part of IMEX)
  bool momentum = true;
  bool tensor = true;
};

/// Full assembly.  `forcing` and `tensor_source` may be null; the tensor
/// source is a verification hook and is never set by production runs.
template <typename Scalar>
Tendency<Scalar> assemble_rhs(const State<Scalar>& s, const VectorField2<Scalar>* forcing,
                              const SymTensorField<Scalar>* tensor_source, const ModelParams& p,
                              AssemblyOptions opt = {}) {
  const auto& grid = s.grid();
  const auto& gp = s.grid_ptr();
  const int n = grid.size();
  const Scalar a(p.a), beta(p.beta), d1(p.delta1), d2(p.delta2), eps(p.epsilon);

  const auto& U = s.v.x.values();
  const auto& V = s.v.y.values();
  const RealArray<Scalar> ux = grid.inverse(derivative(grid, s.v.x.spectrum(), 0));
  const RealArray<Scalar> uy = grid.inverse(derivative(grid, s.v.x.spectrum(), 1));
  const RealArray<Scalar> vx = grid.inverse(derivative(grid, s.v.y.spectrum(), 0));
  const RealArray<Scalar> vy = grid.inverse(derivative(grid, s.v.y.spectrum(), 1));
  const auto& b11 = s.B.b11.values();
  const auto& b12 = s.B.b12.values();
  const auto& b22 = s.B.b22.values();

  Tendency<Scalar> out;

  // Pointwise stage: rho S(B) for the momentum coupling, the weighted source
  // group for the tensor equation.
  RealArray<Scalar> rs11(n, n), rs12(n, n), rs22(n, n);
  RealArray<Scalar> src11(n, n), src12(n, n), src22(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      Mat2<Scalar> m;
      m << b11(i, j), b12(i, j), b12(i, j), b22(i, j);
      const Scalar rho = pointwise::cutoff_rho(m, eps);
      if (opt.momentum) {
        const Mat2<Scalar> st = rho * pointwise::stress_S(m, beta);
        rs11(i, j) = st(0, 0);
        rs12(i, j) = st(0, 1);
        rs22(i, j) = st(1, 1);
      }
      if (opt.tensor) {
        const Scalar d12 = Scalar(0.5) * (uy(i, j) + vx(i, j));
        const Scalar w = Scalar(0.5) * (uy(i, j) - vx(i, j));
        Mat2<Scalar> grad_part;  // aD + W
        grad_part << a * ux(i, j), a * d12 + w, a * d12 - w, a * vy(i, j);
        const Mat2<Scalar> src =
            rho * (grad_part * m + m * grad_part.transpose() - pointwise::relax_R(m, d1, d2));
        src11(i, j) = src(0, 0);
        src12(i, j) = Scalar(0.5) * (src(0, 1) + src(1, 0));
        src22(i, j) = src(1, 1);
      }
    }
  }

  if (opt.momentum) {
    ComplexArray<Scalar> sx = -product_spectrum(grid, RealArray<Scalar>(U * ux + V * uy));
    ComplexArray<Scalar> sy = -product_spectrum(grid, RealArray<Scalar>(U * vx + V * vy));
    if (a != Scalar(0)) {
      const ComplexArray<Scalar> s11 = product_spectrum(grid, rs11);
      const ComplexArray<Scalar> s12 = product_spectrum(grid, rs12);
      const ComplexArray<Scalar> s22 = product_spectrum(grid, rs22);
      const Scalar two_a = Scalar(2) * a;
      sx += two_a * (derivative(grid, s11, 0) + derivative(grid, s12, 1));
      sy += two_a * (derivative(grid, s12, 0) + derivative(grid, s22, 1));
    }
    if (forcing) {
      sx += forcing->x.spectrum();
      sy += forcing->y.spectrum();
    }
    if (opt.diffusion) {
      sx += laplacian(grid, s.v.x.spectrum());
      sy += laplacian(grid, s.v.y.spectrum());
    }
    leray_project_spectra(grid, sx, sy);
    out.dv = {ScalarField<Scalar>::from_spectrum(gp, std::move(sx)), ScalarField<Scalar>::from_spectrum(gp, std::move(sy))};
  }

  if (opt.tensor) {
    const ScalarField<Scalar>* comps[3] = {&s.B.b11, &s.B.b12, &s.B.b22};
    const RealArray<Scalar>* srcs[3] = {&src11, &src12, &src22};
    const ScalarField<Scalar>* extra[3] = {nullptr, nullptr, nullptr};
    if (tensor_source) {
      extra[0] = &tensor_source->b11;
      extra[1] = &tensor_source->b12;
      extra[2] = &tensor_source->b22;
    }
    ScalarField<Scalar> res[3];
    for (int c = 0; c < 3; ++c) {
      const auto& spec = comps[c]->spectrum();
      const RealArray<Scalar> bx = grid.inverse(derivative(grid, spec, 0));
      const RealArray<Scalar> by = grid.inverse(derivative(grid, spec, 1));
      ComplexArray<Scalar> d = product_spectrum(grid, *srcs[c]) - product_spectrum(grid, RealArray<Scalar>(U * bx + V * by));
      if (extra[c]) d += extra[c]->spectrum();
      if (opt.diffusion) d += laplacian(grid, spec);
      res[c] = ScalarField<Scalar>::from_spectrum(gp, std::move(d));
    }
    out.dB = {std::move(res[0]), std::move(res[1]), std::move(res[2])};
  }
  return out;
}

/// Full right-hand side; regularized when params.epsilon > 0.
template <typename Scalar>
Tendency<Scalar> rhs(const State<Scalar>& s, const VectorField2<Scalar>* forcing, const ModelParams& p) {
  return assemble_rhs(s, forcing, static_cast<const SymTensorField<Scalar>*>(nullptr), p);
}

namespace detail {
inline ModelParams unregularized(ModelParams p) {
  p.epsilon = 0;
  return p;
}
}  // namespace detail

template <typename Scalar>
VelocityField<Scalar> momentum_rhs(const State<Scalar>& s, const VectorField2<Scalar>* forcing, const ModelParams& p) {
  return assemble_rhs(s, forcing, static_cast<const SymTensorField<Scalar>*>(nullptr), detail::unregularized(p),
                      {.diffusion = true, .momentum = true, .tensor = false})
      .dv;
}

template <typename Scalar>
SymTensorField<Scalar> tensor_rhs(const State<Scalar>& s, const ModelParams& p) {
  return assemble_rhs(s, static_cast<const VectorField2<Scalar>*>(nullptr),
                      static_cast<const SymTensorField<Scalar>*>(nullptr), detail::unregularized(p),
                      {.diffusion = true, .momentum = false, .tensor = true})
      .dB;
}

/// Momentum equation with the coupling 2a div(rho_eps(B) S(B)).  epsilon == 0
/// reproduces momentum_rhs exactly.
template <typename Scalar>
VelocityField<Scalar> momentum_rhs_regularized(const State<Scalar>& s, const VectorField2<Scalar>* forcing,
                                               const ModelParams& p) {
  return assemble_rhs(s, forcing, static_cast<const SymTensorField<Scalar>*>(nullptr), p,
                      {.diffusion = true, .momentum = true, .tensor = false})
      .dv;
}

template <typename Scalar>
SymTensorField<Scalar> tensor_rhs_regularized(const State<Scalar>& s, const ModelParams& p) {
  return assemble_rhs(s, static_cast<const VectorField2<Scalar>*>(nullptr),
                      static_cast<const SymTensorField<Scalar>*>(nullptr), p,
                      {.diffusion = true, .momentum = false, .tensor = true})
      .dB;
}

/// Applies P_k to the velocity tendency and Q_k to the tensor tendency.
template <typename Scalar>
Tendency<Scalar> galerkin_truncate_rhs(const Tendency<Scalar>& t, int k) {
  return {project_Pk(t.dv, k), project_Qk(t.dB, k)};
}

/// Zero-mean pressure solving -Lap p = div[(v.grad)v - 2a div(rho S(B)) - f].
template <typename Scalar>
ScalarField<Scalar> pressure_recover(const State<Scalar>& s, const VectorField2<Scalar>* forcing, const ModelParams& p) {
  const auto& grid = s.grid();
  const auto& gp = s.grid_ptr();
  const Scalar a(p.a), beta(p.beta), eps(p.epsilon);
  const auto& U = s.v.x.values();
  const auto& V = s.v.y.values();
  const RealArray<Scalar> ux = grid.inverse(derivative(grid, s.v.x.spectrum(), 0));
  const RealArray<Scalar> uy = grid.inverse(derivative(grid, s.v.x.spectrum(), 1));
  const RealArray<Scalar> vx = grid.inverse(derivative(grid, s.v.y.spectrum(), 0));
  const RealArray<Scalar> vy = grid.inverse(derivative(grid, s.v.y.spectrum(), 1));

  // X = (v.grad)v - 2a div(rho S) - f
  ComplexArray<Scalar> sx = product_spectrum(grid, RealArray<Scalar>(U * ux + V * uy));
  ComplexArray<Scalar> sy = product_spectrum(grid, RealArray<Scalar>(U * vx + V * vy));
  if (a != Scalar(0)) {
    const auto rs = detail::map_tensor(s.B, [&](const Mat2<Scalar>& m, int, int) {
      return Mat2<Scalar>(pointwise::cutoff_rho(m, eps) * pointwise::stress_S(m, beta));
    });
    const ComplexArray<Scalar> s11 = product_spectrum(grid, rs.b11.values());
    const ComplexArray<Scalar> s12 = product_spectrum(grid, rs.b12.values());
    const ComplexArray<Scalar> s22 = product_spectrum(grid, rs.b22.values());
    sx -= Scalar(2) * a * (derivative(grid, s11, 0) + derivative(grid, s12, 1));
    sy -= Scalar(2) * a * (derivative(grid, s12, 0) + derivative(grid, s22, 1));
  }
  if (forcing) {
    sx -= forcing->x.spectrum();
    sy -= forcing->y.spectrum();
  }
  // Lap p = -div X
  ComplexArray<Scalar> div = derivative(grid, sx, 0) + derivative(grid, sy, 1);
  return inverse_laplacian(ScalarField<Scalar>::from_spectrum(gp, ComplexArray<Scalar>(-div)));
}

/// Regularized initial tensor: B0 where its minimal eigenvalue exceeds
/// epsilon, the identity elsewhere.
template <typename Scalar>
SymTensorField<Scalar> regularize_initial_tensor(const SymTensorField<Scalar>& b0, Scalar epsilon) {
  return detail::map_tensor(b0, [&](const Mat2<Scalar>& m, int, int) {
    return pointwise::min_eigenvalue(m) > epsilon ? m : Mat2<Scalar>(Mat2<Scalar>::Identity());
  });
}

}  // namespace visco2d

#endif  // VISCO2D_DYNAMICS_HPP
