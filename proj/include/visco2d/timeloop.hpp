#ifndef VISCO2D_TIMELOOP_HPP
#define VISCO2D_TIMELOOP_HPP

// Integrating-factor IMEX time stepping.  The Laplacians of v and B are
// integrated exactly per Fourier mode through exp(-4 pi^2 |n|^2 h); every
// other term is explicit (forward Euler or explicit midpoint).

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "visco2d/config.hpp"
#include "visco2d/dynamics.hpp"
#include "visco2d/errors.hpp"
#include "visco2d/fields.hpp"

namespace visco2d {

enum class Scheme { imex_euler, imex_midpoint };

inline std::string to_string(Scheme s) { return s == Scheme::imex_euler ? "imex_euler" : "imex_midpoint"; }

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "imex_euler" || s == "euler") return Scheme::imex_euler;
  if (s == "imex_midpoint" || s == "midpoint") return Scheme::imex_midpoint;
  throw OutOfRange("scheme", "unknown scheme '" + s + "'");
}

struct StepperOptions {
  Scheme scheme = Scheme::imex_midpoint;
  double dt = 0;     ///< fixed step; 0 selects adaptive_dt
  double cfl = 0.5;  ///< Courant number for the adaptive step
  int galerkin_k = 0;
};

/// Time-dependent sources.  Empty callables mean zero.  The tensor source
/// exists for manufactured-solution verification only.
template <typename Scalar>
struct Forcing {
  std::function<VectorField2<Scalar>(Scalar)> momentum;
  std::function<SymTensorField<Scalar>(Scalar)> tensor;
};

namespace detail {

template <typename Scalar>
Tendency<Scalar> explicit_tendency(const State<Scalar>& s, const Forcing<Scalar>& forcing, Scalar t,
                                   const ModelParams& p, int galerkin_k) {
  VectorField2<Scalar> f;
  SymTensorField<Scalar> g;
  if (forcing.momentum) f = forcing.momentum(t);
  if (forcing.tensor) g = forcing.tensor(t);
  Tendency<Scalar> out = assemble_rhs(s, forcing.momentum ? &f : nullptr, forcing.tensor ? &g : nullptr, p,
                                      {.diffusion = false, .momentum = true, .tensor = true});
  if (galerkin_k > 0) out = galerkin_truncate_rhs(out, galerkin_k);
  return out;
}

/// exp(L h) applied to (u + c * n), with n optional.
template <typename Scalar>
ComplexArray<Scalar> propagate(const SpectralGrid<Scalar>& g, const ComplexArray<Scalar>& u, Scalar h,
                               const ComplexArray<Scalar>* n, Scalar c) {
  const RealArray<Scalar> decay = (-g.k_squared() * h).exp();
  if (n) return (u + c * *n) * decay.template cast<std::complex<Scalar>>();
  return u * decay.template cast<std::complex<Scalar>>();
}

template <typename Scalar>
ScalarField<Scalar> ev(const ScalarField<Scalar>& u, Scalar h, const ScalarField<Scalar>* n, Scalar c) {
  return ScalarField<Scalar>::from_spectrum(u.grid_ptr(),
                                            propagate(u.grid(), u.spectrum(), h, n ? &n->spectrum() : nullptr, c));
}

/// exp(L h)(s + c N) componentwise.
template <typename Scalar>
State<Scalar> evolve(const State<Scalar>& s, Scalar h, const Tendency<Scalar>* n, Scalar c, Scalar t_new) {
  return {t_new,
          {ev(s.v.x, h, n ? &n->dv.x : nullptr, c), ev(s.v.y, h, n ? &n->dv.y : nullptr, c)},
          {ev(s.B.b11, h, n ? &n->dB.b11 : nullptr, c), ev(s.B.b12, h, n ? &n->dB.b12 : nullptr, c),
           ev(s.B.b22, h, n ? &n->dB.b22 : nullptr, c)}};
}

}  // namespace detail

/// Advances one step of size dt.  Throws NonFinite(step_index) when the new
/// state contains a non-finite value.
template <typename Scalar>
State<Scalar> step(const State<Scalar>& s, const Forcing<Scalar>& forcing, Scalar dt, const StepperOptions& opt,
                   const ModelParams& p, long step_index = 0) {
  if (!(dt > 0)) throw OutOfRange("dt", "step size must be positive");
  const int k = opt.galerkin_k;
  State<Scalar> next;
  const auto n0 = detail::explicit_tendency(s, forcing, s.t, p, k);
  if (opt.scheme == Scheme::imex_euler) {
    next = detail::evolve(s, dt, &n0, dt, s.t + dt);
  } else {
    const Scalar half = dt / Scalar(2);
    const State<Scalar> mid = detail::evolve(s, half, &n0, half, s.t + half);
    const auto n1 = detail::explicit_tendency(mid, forcing, s.t + half, p, k);
    // exp(L dt) u + dt exp(L dt/2) N(mid)
    const State<Scalar> base = detail::evolve(s, dt, static_cast<const Tendency<Scalar>*>(nullptr), Scalar(0), s.t + dt);
    const State<Scalar> kick = detail::evolve(State<Scalar>(s.t, n1.dv, n1.dB), half,
                                              static_cast<const Tendency<Scalar>*>(nullptr), Scalar(0), s.t);
    auto axpy = [&](const ScalarField<Scalar>& a, const ScalarField<Scalar>& b) {
      return ScalarField<Scalar>::from_spectrum(a.grid_ptr(), a.spectrum() + dt * b.spectrum());
    };
    next = State<Scalar>(s.t + dt, {axpy(base.v.x, kick.v.x), axpy(base.v.y, kick.v.y)},
                         {axpy(base.B.b11, kick.B.b11), axpy(base.B.b12, kick.B.b12), axpy(base.B.b22, kick.B.b22)});
  }
  next.v = k > 0 ? project_Pk(next.v, k) : leray_project(next.v);
  if (!all_finite(next)) throw NonFinite(step_index);
  return next;
}

/// dt = cfl * dx / max(|v|_inf, 1e-6), capped at dx / 2.
template <typename Scalar>
Scalar adaptive_dt(const State<Scalar>& s, Scalar cfl) {
  if (!(cfl > 0 && cfl <= 1)) throw OutOfRange("cfl", "must lie in (0, 1]");
  const Scalar dx = s.grid().spacing();
  const Scalar vmax = (s.v.x.values().square() + s.v.y.values().square()).sqrt().maxCoeff();
  const Scalar floor = Scalar(1e-6);
  return std::min(cfl * dx / std::max(vmax, floor), dx / Scalar(2));
}

/// Called with the current state and the step index.
template <typename Scalar>
using Sink = std::function<void(const State<Scalar>&, long)>;

/// Repeated stepping to t_end.  Sinks see the initial state, every
/// `output_every`-th step and the final state.  The last step is shortened to
/// land on t_end.
template <typename Scalar>
State<Scalar> integrate(const State<Scalar>& s0, const Forcing<Scalar>& forcing, Scalar t_end,
                        const StepperOptions& opt, const ModelParams& p, const std::vector<Sink<Scalar>>& sinks = {},
                        int output_every = 1, long first_step = 0) {
  if (t_end < s0.t) throw OutOfRange("t_end", "must not precede the initial time");
  if (output_every < 1) throw OutOfRange("output_every", "must be >= 1");
  auto emit = [&](const State<Scalar>& s, long k) {
    for (const auto& sink : sinks) sink(s, k);
  };
  State<Scalar> s = s0;
  long k = first_step;
  emit(s, k);
  if (t_end == s0.t) return s;
  bool done = false;
  while (!done) {
    Scalar dt = opt.dt > 0 ? Scalar(opt.dt) : adaptive_dt(s, Scalar(opt.cfl));
    const Scalar remaining = t_end - s.t;
    if (remaining <= dt * (Scalar(1) + Scalar(1e-9))) {
      dt = remaining;
      done = true;
    }
    ++k;
    s = step(s, forcing, dt, opt, p, k);
    if (done) s.t = t_end;
    if (done || k % output_every == 0) emit(s, k);
  }
  return s;
}

}  // namespace visco2d

#endif  // VISCO2D_TIMELOOP_HPP
