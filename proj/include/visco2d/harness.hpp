#ifndef VISCO2D_HARNESS_HPP
#define VISCO2D_HARNESS_HPP

// Verification drivers: manufactured solutions, convergence ladders, twin
// runs, positivity fuzzing and the epsilon sweep.  Everything here runs in
// double precision.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "visco2d/config.hpp"
#include "visco2d/diagnostics.hpp"
#include "visco2d/fields.hpp"
#include "visco2d/timeloop.hpp"

namespace visco2d {

using State2 = State<double>;
using Grid2 = GridPtr<double>;

// ---------------------------------------------------------------------------
// Initial data.

/// v = amp (sin 2pi x cos 2pi y, -cos 2pi x sin 2pi y), B = I.
State2 taylor_green_state(const Grid2& grid, double amp = 1.0);

/// Taylor-Green velocity with a smooth SPD tensor
/// B = I + 0.2 [[sin 2pi x cos 2pi y, 0.5 sin 2pi(x+y)], [., -cos 2pi x sin 2pi y]].
State2 smooth_coupled_state(const Grid2& grid);

/// Random band-limited data (|n| <= 4): a divergence-free velocity with rms
/// `v_rms` and B = I + symmetric perturbation, halved until its minimal
/// eigenvalue is at least `lambda_floor`.
State2 random_smooth_state(const Grid2& grid, std::uint64_t seed, double v_rms = 0.5, double b_amp = 0.4,
                           double lambda_floor = 0.1);

// ---------------------------------------------------------------------------
// Manufactured solutions.

/// Closed-form trajectory (v*, B*) with its time derivative.  The tensor is
/// returned as (b11, b12, b22).
struct ManufacturedCase {
  using Vec2 = std::array<double, 2>;
  using Sym3 = std::array<double, 3>;

  std::string name;
  ModelParams params;
  std::function<Vec2(double t, double x, double y)> v;
  std::function<Vec2(double t, double x, double y)> v_t;
  std::function<Sym3(double t, double x, double y)> B;
  std::function<Sym3(double t, double x, double y)> B_t;
  /// Grid on which the sources are assembled; 0 uses the run grid, which
  /// makes the sources exact for the discrete operators.
  int reference_n = 0;
};

struct Sources {
  VectorField2<double> f;
  SymTensorField<double> G;
};

State2 sample_case(const ManufacturedCase& c, const Grid2& grid, double t);

/// f* = dv*/dt - P[rhs_v(v*, B*)], G* = dB*/dt - rhs_B(v*, B*), assembled on
/// the reference grid and sampled onto `grid`.  The right-hand sides are the
/// regularized ones when params.epsilon > 0.
Sources manufactured_sources(const ManufacturedCase& c, const Grid2& grid, double t);

/// Forcing callables that evaluate manufactured_sources at each stage time.
Forcing<double> manufactured_forcing(const ManufacturedCase& c, const Grid2& grid);

/// Band-limited data that evolves by pure heat flow.  Sources built on the run
/// grid cancel the nonlinear terms exactly, so the scheme reproduces the
/// closed form to roundoff.
ManufacturedCase heat_flow_case(const ModelParams& p);

/// Smooth data that is not band-limited; sources come from a 128 grid.
ManufacturedCase smooth_case(const ModelParams& p);

/// Steady v* = 0, B* = I + 0.1 diag(sin 2pi x, -sin 2pi x).
ManufacturedCase steady_tensor_case(const ModelParams& p);

// ---------------------------------------------------------------------------
// Convergence studies.

struct Rung {
  int n = 32;
  double dt = 1e-3;
};

enum class LadderKind { spatial, temporal };

struct ConvergenceRow {
  std::string case_name;
  int n = 0;
  double dt = 0;
  double eps = 0;
  double error_l2_v = 0;
  double error_l2_B = 0;
  double order = 0;  ///< NaN on the first rung
  bool pass = false;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool pass = false;
};

struct StudySpec {
  LadderKind kind = LadderKind::temporal;
  std::vector<Rung> ladder;
  double t_end = 0.1;
  Scheme scheme = Scheme::imex_midpoint;
  double expected_order = 2;  ///< temporal only
  double tolerance = 0.3;     ///< temporal only
  double min_drop = 100;      ///< spatial only: required error ratio per rung
};

/// L2 distance from the closed form at t_end; velocity and tensor separately
/// (the tensor distance uses the Frobenius norm).
std::array<double, 2> run_case_error(const ManufacturedCase& c, const Rung& r, double t_end, Scheme scheme);

/// Runs every rung; rung failures propagate as Error with the rung index.
ConvergenceReport convergence_study(const ManufacturedCase& c, const StudySpec& spec);

// ---------------------------------------------------------------------------
// Twin run.

struct TwinPoint {
  double t = 0;
  double separation = 0;
  double integral_g = 0;
  double envelope = 0;
};

struct TwinReport {
  std::vector<TwinPoint> series;
  double c_fit = 0;
  double fraction_within = 0;  ///< share of output times with separation <= envelope
  bool pass = false;
};

/// Perturbs `s0` by a random smooth direction of norm `amplitude` (so that
/// sep(0) = amplitude^2) and integrates both trajectories.  C_fit is the
/// largest growth rate seen on the first 10% of the output times.
TwinReport twin_run(const State2& s0, const ModelParams& p, const StepperOptions& opt, double t_end,
                    double amplitude, std::uint64_t seed = 7, int output_every = 1);

// ---------------------------------------------------------------------------
// Positivity fuzz.

struct FuzzCase {
  int index = 0;
  std::uint64_t seed = 0;
  double lambda_min_initial = 0;
  double lambda_floor = 0;
  double dt_used = 0;
  bool retried = false;
  bool pass = false;
  std::string failure;
};

struct FuzzReport {
  std::vector<FuzzCase> cases;
  double floor = 0;  ///< minimum over all cases
  bool pass = false;
};

struct FuzzSpec {
  int n_cases = 20;
  int n = 64;
  double t_end = 0.5;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::imex_midpoint;
};

/// Each case retries once with dt/2 when positivity is lost or the run blows up.
FuzzReport positivity_fuzz(const FuzzSpec& spec, const ModelParams& p);

// ---------------------------------------------------------------------------
// Epsilon sweep.

struct SweepPoint {
  double eps = 0;
  double distance = 0;   ///< L2 in space and time against the plain run
  double audit_gap = 0;  ///< largest relative gap of the weighted energy identity
  bool degenerate = false;  ///< eps above the smallest eigenvalue of the base run
};

struct SweepReport {
  std::vector<SweepPoint> points;
  double base_lambda_min = 0;
  bool decreasing = false;
};

SweepReport epsilon_sweep(const State2& s0, const ModelParams& p, const StepperOptions& opt, double t_end,
                          const std::vector<double>& eps_ladder);

}  // namespace visco2d

#endif  // VISCO2D_HARNESS_HPP
