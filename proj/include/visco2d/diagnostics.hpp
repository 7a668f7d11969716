#ifndef VISCO2D_DIAGNOSTICS_HPP
#define VISCO2D_DIAGNOSTICS_HPP

// Per-record scalars: energies, dissipation, the energy-balance residual, the
// minimal eigenvalue of B, a ladder of norms and the Gronwall functional.
// All integrals are collocation means over the unit torus.

#include <cmath>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

#include "visco2d/config.hpp"
#include "visco2d/constitutive.hpp"
#include "visco2d/dynamics.hpp"
#include "visco2d/errors.hpp"
#include "visco2d/fields.hpp"
#include "visco2d/spectral.hpp"

namespace visco2d {

struct DiagnosticsRecord {
  double t = 0;
  double kinetic = 0;      ///< (1/2)|v|^2
  double elastic = 0;      ///< integral of psi(B)
  double dissipation = 0;  ///< integral of xi, unweighted
  double power_in = 0;     ///< (f, v)
  double energy_residual = 0;
  double lambda_min = 0;  ///< grid minimum, reported even when negative
  double norm_v = 0;
  double norm_gradv = 0;
  double norm_B = 0;
  double norm_gradB = 0;
  double norm_B_l4 = 0;
  double gronwall_g = 1;
  double eps_gap = std::numeric_limits<double>::quiet_NaN();  ///< NaN unless regularized

  double dissipation_weighted = 0;  ///< relaxation part carries rho_eps; equals dissipation when epsilon == 0
  bool positivity_lost = false;     ///< psi and xi were replaced by NaN

  double energy() const { return kinetic + elastic; }
};

/// |grad u|^2 summed over components; tensors count the off-diagonal twice.
template <typename Scalar>
Scalar grad_norm_squared(const ScalarField<Scalar>& u) {
  return norm_squared(gradient(u));
}

template <typename Scalar>
Scalar grad_norm_squared(const VectorField2<Scalar>& u) {
  return grad_norm_squared(u.x) + grad_norm_squared(u.y);
}

template <typename Scalar>
Scalar grad_norm_squared(const SymTensorField<Scalar>& b) {
  return grad_norm_squared(b.b11) + Scalar(2) * grad_norm_squared(b.b12) + grad_norm_squared(b.b22);
}

/// Mean of |B|^4 with the Frobenius norm.
template <typename Scalar>
Scalar l4_norm_fourth(const SymTensorField<Scalar>& b) {
  const auto& b11 = b.b11.values();
  const auto& b12 = b.b12.values();
  const auto& b22 = b.b22.values();
  return (b11.square() + Scalar(2) * b12.square() + b22.square()).square().mean();
}

template <typename Scalar>
Scalar l4_norm_fourth(const ScalarField<Scalar>& u) {
  return u.values().square().square().mean();
}

template <typename Scalar>
Scalar l4_norm_fourth(const VectorField2<Scalar>& u) {
  return (u.x.values().square() + u.y.values().square()).square().mean();
}

/// g(v, B) = 1 + |v|^2 + |grad v|^2 + |B|_4^4 + |grad B|^2.
template <typename Scalar>
Scalar gronwall_g(const VectorField2<Scalar>& v, const SymTensorField<Scalar>& b) {
  return Scalar(1) + norm_squared(v) + grad_norm_squared(v) + l4_norm_fourth(b) + grad_norm_squared(b);
}

template <typename Scalar>
Scalar gronwall_g(const State<Scalar>& s) {
  return gronwall_g(s.v, s.B);
}

/// g(v, B) + g(u, A) - 1 for a pair of trajectories.
template <typename Scalar>
Scalar gronwall_g_twin(const State<Scalar>& a, const State<Scalar>& b) {
  return gronwall_g(a) + gronwall_g(b) - Scalar(1);
}

/// |u|_4^2 / (|u| |u|_{H^1}) with |u|_{H^1}^2 = |u|^2 + |grad u|^2; zero for u == 0.
template <typename Field>
auto ladyzhenskaya_check(const Field& u) {
  using std::sqrt;
  const auto l2 = norm_squared(u);
  const auto h1 = l2 + grad_norm_squared(u);
  using Scalar = std::remove_cv_t<decltype(l2)>;
  if (l2 == Scalar(0)) return Scalar(0);
  return sqrt(l4_norm_fourth(u)) / sqrt(l2 * h1);
}

/// One diagnostics row.  Where B is not positive definite the energy and
/// dissipation become NaN and the record is flagged, unless
/// `abort_on_nonspd` is set, in which case the error propagates.
template <typename Scalar>
DiagnosticsRecord record(const State<Scalar>& s, const VectorField2<Scalar>* forcing, const ModelParams& p,
                         bool abort_on_nonspd = false) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  DiagnosticsRecord r;
  r.t = double(s.t);
  const Scalar v2 = norm_squared(s.v);
  const Scalar gv2 = grad_norm_squared(s.v);
  const Scalar b2 = norm_squared(s.B);
  const Scalar gb2 = grad_norm_squared(s.B);
  const Scalar b4 = l4_norm_fourth(s.B);
  r.kinetic = double(v2 / Scalar(2));
  r.power_in = forcing ? double(inner(*forcing, s.v)) : 0.0;
  r.lambda_min = double(min_eigenvalue(s.B));
  r.norm_v = double(std::sqrt(v2));
  r.norm_gradv = double(std::sqrt(gv2));
  r.norm_B = double(std::sqrt(b2));
  r.norm_gradB = double(std::sqrt(gb2));
  r.norm_B_l4 = double(std::sqrt(std::sqrt(b4)));
  r.gronwall_g = double(Scalar(1) + v2 + gv2 + b4 + gb2);
  try {
    r.elastic = double(free_energy_psi(s.B, p).integral);
    const auto xi = dissipation_xi(s.v, s.B, p);
    r.dissipation = double(xi.integral);
    r.dissipation_weighted = double(xi.integral_weighted());
  } catch (const PointwiseError&) {
    if (abort_on_nonspd) throw;
    r.elastic = r.dissipation = r.dissipation_weighted = nan;
    r.positivity_lost = true;
  }
  return r;
}

struct ResidualValue {
  double absolute = 0;
  double relative = 0;  ///< absolute / (E(t1) + integral of xi)
};

/// Energy-balance residual over a window of consecutive records:
/// E(t_last) - E(t_first) + integral of (xi - f.v), trapezoid rule.
/// `weighted` selects the rho_eps-weighted dissipation.
inline ResidualValue energy_residual(std::span<const DiagnosticsRecord> window, bool weighted = false) {
  if (window.size() < 2) return {};
  double flux = 0, diss = 0;
  for (std::size_t k = 1; k < window.size(); ++k) {
    const auto& a = window[k - 1];
    const auto& b = window[k];
    const double h = b.t - a.t;
    const double xa = weighted ? a.dissipation_weighted : a.dissipation;
    const double xb = weighted ? b.dissipation_weighted : b.dissipation;
    diss += 0.5 * h * (xa + xb);
    flux += 0.5 * h * ((xa - a.power_in) + (xb - b.power_in));
  }
  ResidualValue out;
  out.absolute = window.back().energy() - window.front().energy() + flux;
  const double scale = window.front().energy() + diss;
  out.relative = scale > 0 ? std::abs(out.absolute) / scale : std::abs(out.absolute);
  return out;
}

inline ResidualValue energy_residual(const DiagnosticsRecord& a, const DiagnosticsRecord& b, bool weighted = false) {
  const DiagnosticsRecord w[2] = {a, b};
  return energy_residual(std::span<const DiagnosticsRecord>(w, 2), weighted);
}

/// Running energy ledger.  Fills `energy_residual` with the cumulative
/// residual since the first record and, for regularized runs, `eps_gap` with
/// the cumulative gap of the weighted identity.
class EnergyLedger {
 public:
  explicit EnergyLedger(bool regularized = false) : regularized_(regularized) {}

  void push(DiagnosticsRecord& r) {
    if (have_prev_) {
      residual_ += energy_residual(prev_, r, false).absolute;
      gap_ += energy_residual(prev_, r, true).absolute;
    }
    r.energy_residual = residual_;
    r.eps_gap = regularized_ ? gap_ : std::numeric_limits<double>::quiet_NaN();
    prev_ = r;
    have_prev_ = true;
  }

  double residual() const { return residual_; }
  double gap() const { return gap_; }

 private:
  bool regularized_;
  bool have_prev_ = false;
  DiagnosticsRecord prev_;
  double residual_ = 0;
  double gap_ = 0;
};

/// Gap series of the weighted energy identity for a regularized run, one
/// entry per record (the first is 0), relative to E(t0) + integral of the
/// weighted dissipation up to that record.
inline std::vector<ResidualValue> eps_energy_audit(std::span<const DiagnosticsRecord> records) {
  std::vector<ResidualValue> out;
  out.reserve(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) out.push_back(energy_residual(records.first(k + 1), true));
  return out;
}

/// Instantaneous form of the weighted energy identity:
/// (dv, v) + (dB, J) + xi_eps - (f, v) with the semi-discrete tendencies.
/// No time quadrature enters, so it vanishes up to aliasing of J.
template <typename Scalar>
ResidualValue eps_energy_rate_gap(const State<Scalar>& s, const VectorField2<Scalar>* forcing, const ModelParams& p) {
  const auto t = rhs(s, forcing, p);
  const auto xi = dissipation_xi(s.v, s.B, p);
  const Scalar diss = xi.integral_weighted();
  const Scalar power = forcing ? inner(*forcing, s.v) : Scalar(0);
  ResidualValue out;
  out.absolute = double(inner(t.dv, s.v) + inner(t.dB, conjugate_J(s.B, p)) + diss - power);
  out.relative = diss > 0 ? std::abs(out.absolute) / double(diss) : std::abs(out.absolute);
  return out;
}

}  // namespace visco2d

#endif  // VISCO2D_DIAGNOSTICS_HPP
