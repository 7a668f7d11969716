// Acceptance checks.  One PASS/FAIL line per criterion; the exit status is
// the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "visco2d/constitutive.hpp"
#include "visco2d/diagnostics.hpp"
#include "visco2d/harness.hpp"
#include "visco2d/io.hpp"
#include "visco2d/timeloop.hpp"

using namespace visco2d;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
const VectorField2<double>* const kNoForce = nullptr;
using M = Mat2<double>;

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("CRITERION %d %s: %s | %s\n", id, pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StepperOptions fixed(Scheme s, double dt) {
  StepperOptions o;
  o.scheme = s;
  o.dt = dt;
  return o;
}

bool same_bits(const State2& a, const State2& b) {
  if (std::memcmp(&a.t, &b.t, sizeof a.t) != 0) return false;
  const ScalarField<double>* fa[] = {&a.v.x, &a.v.y, &a.B.b11, &a.B.b12, &a.B.b22};
  const ScalarField<double>* fb[] = {&b.v.x, &b.v.y, &b.B.b11, &b.B.b12, &b.B.b22};
  for (int k = 0; k < 5; ++k) {
    const auto& x = fa[k]->values();
    const auto& y = fb[k]->values();
    if (std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) != 0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

void navier_stokes_limit() {
  auto g = make_grid<double>(64);
  ModelParams p;
  p.a = 0;
  const auto s0 = taylor_green_state(g);
  const double e0 = 0.5 * norm_squared(s0.v);
  const double t_end = 0.05;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = integrate(s0, Forcing<double>{}, t_end, fixed(Scheme::imex_midpoint, 2e-4), p);
  const double secs = seconds_since(t0);
  const double ke = 0.5 * norm_squared(s.v);
  const double exact = e0 * std::exp(-16 * pi * pi * t_end);
  const double rel = std::abs(ke - exact) / exact;
  double b_dev = 0;
  b_dev = std::max({(s.B.b11.values() - 1).abs().maxCoeff(), s.B.b12.values().abs().maxCoeff(),
                    (s.B.b22.values() - 1).abs().maxCoeff()});
  report(1, "Navier-Stokes limit", rel <= 1e-3 && b_dev <= 1e-12 && secs <= 10,
         fmt("kinetic rel err %.3e (<= 1e-3), |B - I| %.3e (<= 1e-12), runtime %.2f s (<= 10)", rel, b_dev, secs));
}

// ---------------------------------------------------------------------------

ResidualValue coupled_residual(Scheme scheme, double dt) {
  auto g = make_grid<double>(64);
  ModelParams p;
  p.a = 1;
  p.beta = 0.3;
  p.delta1 = 1;
  p.delta2 = 0.5;
  std::vector<DiagnosticsRecord> recs;
  integrate(smooth_coupled_state(g), Forcing<double>{}, 0.1, fixed(scheme, dt), p,
            {[&](const State2& s, long) { recs.push_back(record(s, kNoForce, p)); }});
  return energy_residual(recs);
}

void energy_balance() {
  const double t_end = 0.1;
  bool pass = true;
  std::string detail;
  for (auto [scheme, lo, hi] : {std::tuple{Scheme::imex_euler, 1.7, 2.3}, std::tuple{Scheme::imex_midpoint, 3.4, 4.6}}) {
    const auto r1 = coupled_residual(scheme, 1e-4);
    const auto r2 = coupled_residual(scheme, 5e-5);
    const double per_time = r1.relative / t_end;
    const double ratio = std::abs(r1.absolute) / std::abs(r2.absolute);
    const bool ok = per_time <= 1e-3 && ratio >= lo && ratio <= hi;
    pass = pass && ok;
    detail += fmt("%s: rel residual/T %.3e (<= 1e-3), ratio %.3f in [%.1f, %.1f]; ", to_string(scheme).c_str(),
                  per_time, ratio, lo, hi);
  }
  report(2, "energy balance", pass, detail);
}

// ---------------------------------------------------------------------------

void positivity() {
  FuzzSpec spec;
  spec.n_cases = 20;
  spec.n = 64;
  spec.t_end = 0.5;
  spec.dt = 1e-3;
  const auto rep = positivity_fuzz(spec, ModelParams{});
  int retried = 0;
  for (const auto& c : rep.cases) retried += c.retried ? 1 : 0;
  report(3, "positivity fuzz", rep.pass && rep.floor > 0,
         fmt("%zu cases, observed lambda_min floor %.6f (> 0), %d retried at dt/2", rep.cases.size(), rep.floor,
             retried));
}

// ---------------------------------------------------------------------------

void uniqueness() {
  auto g = make_grid<double>(64);
  const auto s0 = smooth_coupled_state(g);
  const ModelParams p;
  const auto opt = fixed(Scheme::imex_midpoint, 1e-3);
  const auto rep = twin_run(s0, p, opt, 0.2, 1e-6);
  const auto zero = twin_run(s0, p, opt, 0.2, 0.0);
  bool all_zero = true;
  for (const auto& q : zero.series) all_zero = all_zero && q.separation == 0;
  report(4, "twin-run Gronwall envelope", rep.fraction_within >= 0.95 && all_zero,
         fmt("%.1f%% of %zu output times within envelope (>= 95%%), C_fit %.4g, final sep %.3e; amplitude 0 %s",
             100 * rep.fraction_within, rep.series.size(), rep.c_fit, rep.series.back().separation,
             all_zero ? "identically zero" : "NOT zero"));
}

// ---------------------------------------------------------------------------

void regularization() {
  auto g = make_grid<double>(32);
  const auto rep = epsilon_sweep(smooth_coupled_state(g), ModelParams{}, fixed(Scheme::imex_midpoint, 1e-4), 0.05,
                                 {1e-2, 1e-3, 1e-4});
  double worst_gap = 0;
  bool degenerate = false;
  std::string d;
  for (const auto& pt : rep.points) {
    worst_gap = std::max(worst_gap, pt.audit_gap);
    degenerate = degenerate || pt.degenerate;
    d += fmt("eps %.0e dist %.3e gap %.2e; ", pt.eps, pt.distance, pt.audit_gap);
  }
  report(5, "epsilon consistency", rep.decreasing && worst_gap <= 1e-3 && !degenerate,
         d + fmt("strictly decreasing: %s, worst audit gap %.2e (<= 1e-3), base lambda_min %.3f",
                 rep.decreasing ? "yes" : "no", worst_gap, rep.base_lambda_min));
}

// ---------------------------------------------------------------------------

M random_spd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ev(0.05, 5.0), ang(0, pi);
  const double th = ang(rng);
  M q, d;
  q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  d << ev(rng), 0, 0, ev(rng);
  return q * d * q.transpose();
}

M random_sym(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  M m;
  m(0, 0) = n(rng);
  m(0, 1) = m(1, 0) = n(rng);
  m(1, 1) = n(rng);
  return m;
}

void constitutive() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> beta_dist(0.05, 0.95), delta_dist(0.0, 2.0);
  double worst_bj = 0, worst_sb = 0, worst_grad = 0;
  double min_psi = std::numeric_limits<double>::infinity(), min_xi = min_psi;
  for (int k = 0; k < 1000; ++k) {
    const double beta = beta_dist(rng), d1 = delta_dist(rng), d2 = delta_dist(rng);
    const M b = random_spd(rng);
    const M s = pointwise::stress_S(b, beta);
    const M j = pointwise::conjugate_J(b, beta);
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    worst_bj = std::max({worst_bj, (b * j - s).cwiseAbs().maxCoeff() / scale, (j * b - s).cwiseAbs().maxCoeff() / scale});
    worst_sb = std::max(worst_sb, (s * b - b * s).cwiseAbs().maxCoeff() / (scale * std::max(1.0, b.cwiseAbs().maxCoeff())));
    min_psi = std::min(min_psi, pointwise::free_energy(b, beta));

    const M d = random_sym(rng);
    const M dev = d - 0.5 * d.trace() * M::Identity();
    const double xi = 2 * dev.squaredNorm() + pointwise::diffusion_dissipation(b, random_sym(rng), random_sym(rng), beta) +
                      pointwise::relaxation_dissipation(b, beta, d1, d2);
    min_xi = std::min(min_xi, xi);

    const M e = random_sym(rng);
    const double h = 1e-5 * std::min(1.0, pointwise::min_eigenvalue(b));
    const double fd = (pointwise::free_energy<double>(b + h * e, beta) - pointwise::free_energy<double>(b - h * e, beta)) / (2 * h);
    const double exact = (j.array() * e.array()).sum();
    worst_grad = std::max(worst_grad, std::abs(fd - exact) / std::abs(exact));
  }
  const double psi_id = pointwise::free_energy<double>(M::Identity(), 0.5);
  const bool pass = worst_bj <= 1e-12 && worst_sb <= 1e-12 && min_psi >= 0 && psi_id == 0 && min_xi >= 0 &&
                    worst_grad <= 1e-6;
  report(6, "constitutive identities", pass,
         fmt("1000 samples: |BJ-S|,|JB-S| %.2e, |SB-BS| %.2e (<= 1e-12); min psi %.3e, psi(I) %.1e; min xi %.3e; "
             "grad psi vs J rel %.2e (<= 1e-6)",
             worst_bj, worst_sb, min_psi, psi_id, min_xi, worst_grad));
}

// ---------------------------------------------------------------------------

void spatial_accuracy() {
  StudySpec spec;
  spec.kind = LadderKind::spatial;
  spec.ladder = {{16, 1e-5}, {32, 1e-5}};
  spec.t_end = 0.01;
  spec.scheme = Scheme::imex_midpoint;
  spec.min_drop = 100;
  const auto rep = convergence_study(smooth_case(ModelParams{}), spec);
  const auto e = [&](std::size_t i) { return std::hypot(rep.rows[i].error_l2_v, rep.rows[i].error_l2_B); };
  const double drop = e(0) / e(1);
  report(7, "spatial spectral accuracy", rep.pass && drop >= 100,
         fmt("L2 error N=16 %.3e, N=32 %.3e, drop %.1f (>= 100)", e(0), e(1), drop));
}

// ---------------------------------------------------------------------------

void determinism_io() {
  const fs::path dir = fs::temp_directory_path() / "visco2d_acceptance";
  fs::create_directories(dir);
  auto g = make_grid<double>(32);
  ModelParams p;
  const auto opt = fixed(Scheme::imex_midpoint, 1e-3);
  const Forcing<double> none;
  const auto s0 = random_smooth_state(g, 77, 0.8);

  std::vector<DiagnosticsRecord> recs;
  State2 direct = s0;
  EnergyLedger ledger;
  for (long k = 1; k <= 40; ++k) {
    direct = step(direct, none, opt.dt, opt, p, k);
    auto r = record(direct, kNoForce, p);
    ledger.push(r);
    recs.push_back(r);
  }
  State2 half = s0;
  for (long k = 1; k <= 20; ++k) half = step(half, none, opt.dt, opt, p, k);
  const auto ckpt = (dir / "mid.v2dc").string();
  checkpoint(half, 20, ckpt);
  const auto c = restore(ckpt);
  State2 resumed = c.state;
  for (long k = c.step + 1; k <= 40; ++k) resumed = step(resumed, none, opt.dt, opt, p, k);
  const bool restart_ok = c.step == 20 && same_bits(resumed, direct);

  const auto csv = (dir / "diagnostics.csv").string();
  {
    DiagnosticsWriter w(csv);
    for (const auto& r : recs) w.write(r);
  }
  const auto back = read_diagnostics(csv);
  bool csv_ok = back.size() == recs.size();
  std::size_t values = 0;
  for (std::size_t i = 0; csv_ok && i < recs.size(); ++i) {
    csv_ok = format_diagnostics_row(back[i]) == format_diagnostics_row(recs[i]);
    const double* a = &recs[i].t;
    const double* b = &back[i].t;
    // the 14 CSV columns are the leading doubles of the record
    for (int k = 0; k < 14 && csv_ok; ++k, ++values) csv_ok = std::memcmp(a + k, b + k, sizeof(double)) == 0;
  }
  report(8, "determinism and IO", restart_ok && csv_ok,
         fmt("checkpoint at step 20 then 20 more steps: %s; CSV round trip of %zu values: %s",
             restart_ok ? "bit-identical" : "DIFFERS", values, csv_ok ? "bit-exact" : "MISMATCH"));
}

}  // namespace

int main(int argc, char** argv) {
  // Optional list of criterion numbers to run; all by default.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<std::function<void()>> checks = {navier_stokes_limit, energy_balance, positivity,   uniqueness,
                                                     regularization,      constitutive,   spatial_accuracy, determinism_io};
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const int id = int(k) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    try {
      checks[k]();
    } catch (const std::exception& e) {
      report(id, "exception", false, e.what());
    }
  }
  return failures;
}
