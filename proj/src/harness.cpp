#include "visco2d/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

#include "visco2d/constitutive.hpp"
#include "visco2d/dynamics.hpp"
#include "visco2d/errors.hpp"

namespace visco2d {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;

using Field = ScalarField<double>;

/// Sum of random Fourier modes with |n1|, |n2| <= kmax and weights 1/(1 + |n|^2).
Field random_band_limited(const Grid2& grid, std::mt19937_64& rng, int kmax) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  struct Mode {
    int n1, n2;
    double c, s;
  };
  std::vector<Mode> modes;
  for (int n1 = 0; n1 <= kmax; ++n1) {
    for (int n2 = -kmax; n2 <= kmax; ++n2) {
      if (n1 == 0 && n2 <= 0) continue;
      const double w = 1.0 / (1.0 + n1 * n1 + n2 * n2);
      const double c = w * gauss(rng);
      const double s = w * gauss(rng);
      modes.push_back({n1, n2, c, s});
    }
  }
  return Field::sample(grid, [&](double x, double y) {
    double acc = 0;
    for (const auto& m : modes) {
      const double ph = kTwoPi * (m.n1 * x + m.n2 * y);
      acc += m.c * std::cos(ph) + m.s * std::sin(ph);
    }
    return acc;
  });
}

Field scaled(const Field& f, double c) { return Field::from_values(f.grid_ptr(), c * f.values()); }

Field add(const Field& a, const Field& b) { return Field::from_values(a.grid_ptr(), a.values() + b.values()); }

Field sub(const Field& a, const Field& b) { return Field::from_values(a.grid_ptr(), a.values() - b.values()); }

/// Divergence-free velocity from a stream function: (d/dy psi, -d/dx psi).
VectorField2<double> curl_of(const Field& psi) {
  const auto gx = derivative(psi, 0);
  const auto gy = derivative(psi, 1);
  return {gy, scaled(gx, -1.0)};
}

SymTensorField<double> perturbed_identity(const Grid2& grid, const Field& p11, const Field& p12, const Field& p22,
                                          double amp) {
  const int n = grid->size();
  const RealArray<double> one = RealArray<double>::Ones(n, n);
  return {Field::from_values(grid, one + amp * p11.values()), Field::from_values(grid, amp * p12.values()),
          Field::from_values(grid, one + amp * p22.values())};
}

Field normalized_max(const Field& f) {
  const double m = f.values().abs().maxCoeff();
  return m > 0 ? scaled(f, 1.0 / m) : f;
}

double l2_distance(const VectorField2<double>& a, const VectorField2<double>& b) {
  const RealArray<double> dx = a.x.values() - b.x.values();
  const RealArray<double> dy = a.y.values() - b.y.values();
  return std::sqrt((dx.square() + dy.square()).mean());
}

double l2_distance(const SymTensorField<double>& a, const SymTensorField<double>& b) {
  const RealArray<double> d11 = a.b11.values() - b.b11.values();
  const RealArray<double> d12 = a.b12.values() - b.b12.values();
  const RealArray<double> d22 = a.b22.values() - b.b22.values();
  return std::sqrt((d11.square() + 2.0 * d12.square() + d22.square()).mean());
}

double squared_separation(const State2& a, const State2& b) {
  const double dv = l2_distance(a.v, b.v);
  const double dB = l2_distance(a.B, b.B);
  return dv * dv + dB * dB;
}

/// Point values of `f` at the nodes of a coarser grid whose size divides f's.
Field restrict_to(const Field& f, const Grid2& coarse) {
  const int nf = f.grid().size();
  const int nc = coarse->size();
  if (nf == nc) return f;
  if (nf % nc != 0) throw SizeMismatch(nc, nf);
  const int stride = nf / nc;
  RealArray<double> out(nc, nc);
  const auto& v = f.values();
  for (int j = 0; j < nc; ++j)
    for (int i = 0; i < nc; ++i) out(i, j) = v(i * stride, j * stride);
  return Field::from_values(coarse, std::move(out));
}

double next_dt(const State2& s, const StepperOptions& opt, double t_end, bool& done) {
  double dt = opt.dt > 0 ? opt.dt : adaptive_dt(s, opt.cfl);
  const double remaining = t_end - s.t;
  done = remaining <= dt * (1 + 1e-9);
  return done ? remaining : dt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Initial data.

State2 taylor_green_state(const Grid2& grid, double amp) {
  VectorField2<double> v{
      Field::sample(grid, [&](double x, double y) { return amp * std::sin(kTwoPi * x) * std::cos(kTwoPi * y); }),
      Field::sample(grid, [&](double x, double y) { return -amp * std::cos(kTwoPi * x) * std::sin(kTwoPi * y); })};
  return {0.0, leray_project(v), SymTensorField<double>::identity(grid)};
}

State2 smooth_coupled_state(const Grid2& grid) {
  auto s = taylor_green_state(grid);
  s.B = {Field::sample(grid, [](double x, double y) { return 1 + 0.2 * std::sin(kTwoPi * x) * std::cos(kTwoPi * y); }),
         Field::sample(grid, [](double x, double y) { return 0.1 * std::sin(kTwoPi * (x + y)); }),
         Field::sample(grid, [](double x, double y) { return 1 - 0.2 * std::cos(kTwoPi * x) * std::sin(kTwoPi * y); })};
  return s;
}

State2 random_smooth_state(const Grid2& grid, std::uint64_t seed, double v_rms, double b_amp, double lambda_floor) {
  std::mt19937_64 rng(seed);
  const int kmax = 4;
  auto v = leray_project(curl_of(random_band_limited(grid, rng, kmax)));
  const double rms = std::sqrt(norm_squared(v));
  if (rms > 0) v = {scaled(v.x, v_rms / rms), scaled(v.y, v_rms / rms)};
  const Field p11 = normalized_max(random_band_limited(grid, rng, kmax));
  const Field p12 = normalized_max(random_band_limited(grid, rng, kmax));
  const Field p22 = normalized_max(random_band_limited(grid, rng, kmax));
  double amp = b_amp;
  auto B = perturbed_identity(grid, p11, p12, p22, amp);
  while (min_eigenvalue(B) < lambda_floor) {
    amp /= 2;
    B = perturbed_identity(grid, p11, p12, p22, amp);
  }
  return {0.0, std::move(v), std::move(B)};
}

// ---------------------------------------------------------------------------
// Manufactured solutions.

State2 sample_case(const ManufacturedCase& c, const Grid2& grid, double t) {
  const int n = grid->size();
  RealArray<double> u(n, n), w(n, n), b11(n, n), b12(n, n), b22(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = grid->coordinate(i), y = grid->coordinate(j);
      const auto vv = c.v(t, x, y);
      const auto bb = c.B(t, x, y);
      u(i, j) = vv[0];
      w(i, j) = vv[1];
      b11(i, j) = bb[0];
      b12(i, j) = bb[1];
      b22(i, j) = bb[2];
    }
  }
  return {t,
          {Field::from_values(grid, std::move(u)), Field::from_values(grid, std::move(w))},
          {Field::from_values(grid, std::move(b11)), Field::from_values(grid, std::move(b12)),
           Field::from_values(grid, std::move(b22))}};
}

Sources manufactured_sources(const ManufacturedCase& c, const Grid2& grid, double t) {
  const Grid2 ref = c.reference_n > 0 && c.reference_n != grid->size()
                        ? make_grid<double>(c.reference_n, grid->dealias_enabled())
                        : grid;
  const State2 s = sample_case(c, ref, t);
  ManufacturedCase rate = c;
  rate.v = c.v_t;
  rate.B = c.B_t;
  const State2 ds = sample_case(rate, ref, t);

  const auto r = rhs(s, static_cast<const VectorField2<double>*>(nullptr), c.params);
  const auto& rv = r.dv;
  const auto& rb = r.dB;
  const auto vt = leray_project(ds.v);
  VectorField2<double> f{restrict_to(sub(vt.x, rv.x), grid), restrict_to(sub(vt.y, rv.y), grid)};
  SymTensorField<double> G{restrict_to(sub(ds.B.b11, rb.b11), grid), restrict_to(sub(ds.B.b12, rb.b12), grid),
                           restrict_to(sub(ds.B.b22, rb.b22), grid)};
  return {std::move(f), std::move(G)};
}

Forcing<double> manufactured_forcing(const ManufacturedCase& c, const Grid2& grid) {
  struct Cache {
    double t = std::numeric_limits<double>::quiet_NaN();
    Sources s;
  };
  auto cache = std::make_shared<Cache>();
  auto get = [c, grid, cache](double t) -> const Sources& {
    if (!(cache->t == t)) {
      cache->s = manufactured_sources(c, grid, t);
      cache->t = t;
    }
    return cache->s;
  };
  Forcing<double> out;
  out.momentum = [get](double t) { return get(t).f; };
  out.tensor = [get](double t) { return get(t).G; };
  return out;
}

ManufacturedCase heat_flow_case(const ModelParams& p) {
  // Each Fourier mode n decays as exp(-4 pi^2 |n|^2 t).
  const double k1 = 4 * kPi * kPi, k2 = 2 * k1, k5 = 5 * k1;
  ManufacturedCase c;
  c.name = "heat_flow";
  c.params = p;
  // stream function 0.3 e^{-k2 t} sin 2pi x sin 2pi y + 0.2 e^{-k5 t} cos 2pi(x + 2y)
  auto vel = [=](double t, double x, double y, bool rate) -> ManufacturedCase::Vec2 {
    const double a = 0.3 * std::exp(-k2 * t) * (rate ? -k2 : 1.0);
    const double b = 0.2 * std::exp(-k5 * t) * (rate ? -k5 : 1.0);
    const double sp = std::sin(kTwoPi * (x + 2 * y));
    const double psi_y = a * kTwoPi * std::sin(kTwoPi * x) * std::cos(kTwoPi * y) - b * 2 * kTwoPi * sp;
    const double psi_x = a * kTwoPi * std::cos(kTwoPi * x) * std::sin(kTwoPi * y) - b * kTwoPi * sp;
    return {psi_y, -psi_x};
  };
  auto ten = [=](double t, double x, double y, bool rate) -> ManufacturedCase::Sym3 {
    const double e1 = std::exp(-k1 * t) * (rate ? -k1 : 1.0);
    const double e2 = std::exp(-k2 * t) * (rate ? -k2 : 1.0);
    const double id = rate ? 0.0 : 1.0;
    return {id + 0.2 * e1 * std::cos(kTwoPi * x), 0.1 * e1 * std::sin(kTwoPi * y),
            id + 0.2 * e2 * std::sin(kTwoPi * x) * std::cos(kTwoPi * y)};
  };
  c.v = [=](double t, double x, double y) { return vel(t, x, y, false); };
  c.v_t = [=](double t, double x, double y) { return vel(t, x, y, true); };
  c.B = [=](double t, double x, double y) { return ten(t, x, y, false); };
  c.B_t = [=](double t, double x, double y) { return ten(t, x, y, true); };
  c.reference_n = 0;
  return c;
}

ManufacturedCase smooth_case(const ModelParams& p) {
  ManufacturedCase c;
  c.name = "smooth";
  c.params = p;
  // stream function 0.05 e^{-t} exp(sin 2pi x + cos 2pi y)
  auto vel = [](double t, double x, double y, bool rate) -> ManufacturedCase::Vec2 {
    const double phi = 0.05 * std::exp(-t) * std::exp(std::sin(kTwoPi * x) + std::cos(kTwoPi * y)) * (rate ? -1.0 : 1.0);
    return {-phi * kTwoPi * std::sin(kTwoPi * y), -phi * kTwoPi * std::cos(kTwoPi * x)};
  };
  auto ten = [](double t, double x, double y, bool rate) -> ManufacturedCase::Sym3 {
    const double e = std::exp(-t) * (rate ? -1.0 : 1.0);
    const double id = rate ? 0.0 : 1.0;
    return {id + 0.2 * e * std::sin(kTwoPi * x + std::cos(kTwoPi * y)),
            0.1 * e * std::sin(kTwoPi * (x + y)) * std::exp(std::cos(kTwoPi * x) - 1),
            id + 0.2 * e * std::cos(kTwoPi * y + std::sin(kTwoPi * x))};
  };
  c.v = [=](double t, double x, double y) { return vel(t, x, y, false); };
  c.v_t = [=](double t, double x, double y) { return vel(t, x, y, true); };
  c.B = [=](double t, double x, double y) { return ten(t, x, y, false); };
  c.B_t = [=](double t, double x, double y) { return ten(t, x, y, true); };
  c.reference_n = 128;
  return c;
}

ManufacturedCase steady_tensor_case(const ModelParams& p) {
  ManufacturedCase c;
  c.name = "steady_tensor";
  c.params = p;
  c.v = [](double, double, double) -> ManufacturedCase::Vec2 { return {0.0, 0.0}; };
  c.v_t = c.v;
  c.B = [](double, double x, double) -> ManufacturedCase::Sym3 {
    const double s = 0.1 * std::sin(kTwoPi * x);
    return {1 + s, 0.0, 1 - s};
  };
  c.B_t = [](double, double, double) -> ManufacturedCase::Sym3 { return {0.0, 0.0, 0.0}; };
  c.reference_n = 0;
  return c;
}

// ---------------------------------------------------------------------------
// Convergence studies.

std::array<double, 2> run_case_error(const ManufacturedCase& c, const Rung& r, double t_end, Scheme scheme) {
  if (!(r.dt > 0)) throw OutOfRange("dt", "rung step must be positive");
  const auto grid = make_grid<double>(r.n);
  const State2 s0 = sample_case(c, grid, 0.0);
  StepperOptions opt;
  opt.scheme = scheme;
  opt.dt = r.dt;
  const State2 s = integrate(s0, manufactured_forcing(c, grid), t_end, opt, c.params);
  const State2 exact = sample_case(c, grid, t_end);
  return {l2_distance(s.v, exact.v), l2_distance(s.B, exact.B)};
}

ConvergenceReport convergence_study(const ManufacturedCase& c, const StudySpec& spec) {
  ConvergenceReport rep;
  rep.pass = true;
  double prev_err = 0, prev_h = 0;
  for (std::size_t k = 0; k < spec.ladder.size(); ++k) {
    const Rung& r = spec.ladder[k];
    std::array<double, 2> e;
    try {
      e = run_case_error(c, r, spec.t_end, spec.scheme);
    } catch (const Error& ex) {
      throw Error("convergence rung " + std::to_string(k) + ": " + ex.what());
    }
    ConvergenceRow row;
    row.case_name = c.name;
    row.n = r.n;
    row.dt = r.dt;
    row.eps = c.params.epsilon;
    row.error_l2_v = e[0];
    row.error_l2_B = e[1];
    const double err = std::hypot(e[0], e[1]);
    const double h = spec.kind == LadderKind::spatial ? 1.0 / r.n : r.dt;
    if (k == 0) {
      row.order = std::numeric_limits<double>::quiet_NaN();
      row.pass = true;
    } else {
      row.order = std::log(prev_err / err) / std::log(prev_h / h);
      row.pass = spec.kind == LadderKind::spatial ? prev_err / err >= spec.min_drop
                                                  : std::abs(row.order - spec.expected_order) <= spec.tolerance;
    }
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
    prev_err = err;
    prev_h = h;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Twin run.

TwinReport twin_run(const State2& s0, const ModelParams& p, const StepperOptions& opt, double t_end,
                    double amplitude, std::uint64_t seed, int output_every) {
  if (!(amplitude >= 0)) throw OutOfRange("amplitude", "must be >= 0");
  const auto& grid = s0.grid_ptr();
  std::mt19937_64 rng(seed);
  auto dv = leray_project(curl_of(random_band_limited(grid, rng, 4)));
  SymTensorField<double> dB{random_band_limited(grid, rng, 4), random_band_limited(grid, rng, 4),
                            random_band_limited(grid, rng, 4)};
  const double norm = std::sqrt(norm_squared(dv) + norm_squared(dB));
  const double c = norm > 0 ? amplitude / norm : 0.0;
  State2 a = s0;
  State2 b{s0.t,
           {add(s0.v.x, scaled(dv.x, c)), add(s0.v.y, scaled(dv.y, c))},
           {add(s0.B.b11, scaled(dB.b11, c)), add(s0.B.b12, scaled(dB.b12, c)), add(s0.B.b22, scaled(dB.b22, c))}};
  if (amplitude == 0) b = a;

  TwinReport rep;
  double ig = 0;
  double g_prev = gronwall_g_twin(a, b);
  double t_prev = a.t;
  rep.series.push_back({a.t, squared_separation(a, b), 0.0, 0.0});
  const Forcing<double> none;
  long k = 0;
  bool done = false;
  while (!done && t_end > a.t) {
    const double dt = next_dt(a, opt, t_end, done);
    ++k;
    a = step(a, none, dt, opt, p, k);
    b = step(b, none, dt, opt, p, k);
    if (done) a.t = b.t = t_end;
    if (done || k % output_every == 0) {
      const double g = gronwall_g_twin(a, b);
      ig += 0.5 * (a.t - t_prev) * (g + g_prev);
      g_prev = g;
      t_prev = a.t;
      rep.series.push_back({a.t, squared_separation(a, b), ig, 0.0});
    }
  }

  const double sep0 = rep.series.front().separation;
  const std::size_t m = rep.series.size();
  const std::size_t calib = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.1 * double(m - 1))));
  rep.c_fit = 0;
  if (sep0 > 0) {
    for (std::size_t i = 1; i <= calib && i < m; ++i) {
      const auto& q = rep.series[i];
      if (q.integral_g > 0 && q.separation > 0) rep.c_fit = std::max(rep.c_fit, std::log(q.separation / sep0) / q.integral_g);
    }
  }
  std::size_t within = 0;
  for (auto& q : rep.series) {
    q.envelope = sep0 * std::exp(rep.c_fit * q.integral_g);
    if (q.separation <= q.envelope * (1 + 1e-9)) ++within;
  }
  rep.fraction_within = double(within) / double(m);
  rep.pass = rep.fraction_within >= 0.95;
  return rep;
}

// ---------------------------------------------------------------------------
// Positivity fuzz.

namespace {

/// Smallest eigenvalue seen over the run; -inf when the run blew up.
double lambda_floor_of_run(State2 s, const ModelParams& p, const StepperOptions& opt, double t_end,
                           std::string& failure) {
  double floor = min_eigenvalue(s.B);
  const Forcing<double> none;
  long k = 0;
  bool done = false;
  try {
    while (!done) {
      const double dt = next_dt(s, opt, t_end, done);
      s = step(s, none, dt, opt, p, ++k);
      floor = std::min(floor, min_eigenvalue(s.B));
    }
  } catch (const NonFinite& e) {
    failure = e.what();
    return -std::numeric_limits<double>::infinity();
  }
  return floor;
}

}  // namespace

FuzzReport positivity_fuzz(const FuzzSpec& spec, const ModelParams& p) {
  if (spec.n_cases < 1) throw OutOfRange("cases", "must be >= 1");
  const auto grid = make_grid<double>(spec.n);
  FuzzReport rep;
  rep.floor = std::numeric_limits<double>::infinity();
  rep.pass = true;
  for (int k = 0; k < spec.n_cases; ++k) {
    FuzzCase fc;
    fc.index = k;
    fc.seed = spec.seed + std::uint64_t(k);
    const State2 s0 = random_smooth_state(grid, fc.seed);
    fc.lambda_min_initial = min_eigenvalue(s0.B);
    StepperOptions opt;
    opt.scheme = spec.scheme;
    opt.dt = spec.dt;
    fc.lambda_floor = lambda_floor_of_run(s0, p, opt, spec.t_end, fc.failure);
    if (!(fc.lambda_floor > 0)) {
      fc.retried = true;
      opt.dt /= 2;
      fc.failure.clear();
      fc.lambda_floor = lambda_floor_of_run(s0, p, opt, spec.t_end, fc.failure);
    }
    fc.dt_used = opt.dt;
    fc.pass = fc.lambda_floor > 0;
    rep.floor = std::min(rep.floor, fc.lambda_floor);
    rep.pass = rep.pass && fc.pass;
    rep.cases.push_back(std::move(fc));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Epsilon sweep.

SweepReport epsilon_sweep(const State2& s0, const ModelParams& p, const StepperOptions& opt, double t_end,
                          const std::vector<double>& eps_ladder) {
  SweepReport rep;
  ModelParams plain = p;
  plain.epsilon = 0;
  const Forcing<double> none;

  // The plain run is repeated alongside every regularized run so that no
  // trajectory has to be stored.
  rep.base_lambda_min = std::numeric_limits<double>::infinity();
  for (double eps : eps_ladder) {
    if (!(eps >= 0)) throw OutOfRange("epsilon", "must be >= 0");
    ModelParams reg = p;
    reg.epsilon = eps;
    State2 a = s0;
    State2 b{s0.t, s0.v, regularize_initial_tensor(s0.B, eps)};
    double lam = min_eigenvalue(a.B);
    double d_prev = squared_separation(a, b), dist2 = 0;
    std::vector<DiagnosticsRecord> recs{record(b, static_cast<const VectorField2<double>*>(nullptr), reg)};
    long k = 0;
    bool done = false;
    while (!done && t_end > a.t) {
      const double dt = next_dt(a, opt, t_end, done);
      ++k;
      a = step(a, none, dt, opt, plain, k);
      b = step(b, none, dt, opt, reg, k);
      if (done) a.t = b.t = t_end;
      lam = std::min(lam, min_eigenvalue(a.B));
      const double d = squared_separation(a, b);
      dist2 += 0.5 * dt * (d + d_prev);
      d_prev = d;
      recs.push_back(record(b, static_cast<const VectorField2<double>*>(nullptr), reg));
    }
    SweepPoint pt;
    pt.eps = eps;
    pt.distance = std::sqrt(dist2);
    for (const auto& g : eps_energy_audit(recs)) pt.audit_gap = std::max(pt.audit_gap, g.relative);
    rep.base_lambda_min = std::min(rep.base_lambda_min, lam);
    pt.degenerate = eps >= lam;
    rep.points.push_back(pt);
  }
  rep.decreasing = true;
  for (std::size_t i = 1; i < rep.points.size(); ++i)
    rep.decreasing = rep.decreasing && rep.points[i].distance < rep.points[i - 1].distance;
  return rep;
}

}  // namespace visco2d
