// visco2d command-line driver.
//
//   visco2d run <config> [--scheme S] [--init I] [--restore CKPT]
//   visco2d converge <config>
//   visco2d twin <config> --amp A
//   visco2d fuzz <config> --cases N
//   visco2d sweep <config> --eps 1e-2,1e-3,1e-4
//
// Exit codes: 0 success, 1 usage or validation error, 2 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "visco2d/config.hpp"
#include "visco2d/diagnostics.hpp"
#include "visco2d/errors.hpp"
#include "visco2d/harness.hpp"
#include "visco2d/io.hpp"
#include "visco2d/timeloop.hpp"

namespace fs = std::filesystem;
using namespace visco2d;

namespace {

struct Options {
  std::string out = "out";
  bool quiet = false;
  std::string config;
  std::string scheme = "imex_midpoint";
  std::string init = "taylor_green";
  std::string restore_path;
  bool abort_on_nonspd = false;
  int snapshot_every = 0;
  double amp = 1e-6;
  int cases = 20;
  std::vector<double> eps = {1e-2, 1e-3, 1e-4};
};

/// Raised for problems the user can fix (exit 1).
struct UsageError : Error {
  using Error::Error;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

fs::path output_dir(const Options& o) {
  const char* env = std::getenv("VISCO2D_OUT");
  fs::path dir = env && *env ? fs::path(env) : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), ec.message());
  return dir;
}

ValidatedConfig load(const Options& o) {
  if (!fs::exists(o.config)) throw IoError(o.config, "no such file");
  return validate(load_config(o.config));
}

StepperOptions stepper(const ValidatedConfig& c, Scheme scheme) {
  StepperOptions opt;
  opt.scheme = scheme;
  opt.dt = c.run.dt;
  opt.cfl = c.run.cfl;
  opt.galerkin_k = c.run.galerkin_k;
  return opt;
}

State2 initial_state(const Options& o, const ValidatedConfig& c) {
  const auto grid = make_grid<double>(c.run.grid_size, c.run.dealias);
  State2 s;
  if (o.init == "taylor_green") {
    s = taylor_green_state(grid);
  } else if (o.init == "coupled") {
    s = smooth_coupled_state(grid);
  } else if (o.init == "random") {
    s = random_smooth_state(grid, c.run.seed);
  } else if (o.init == "rest") {
    s = State2::equilibrium(grid);
  } else {
    throw UsageError("--init: unknown initial state '" + o.init + "'");
  }
  if (c.model.epsilon > 0) s.B = regularize_initial_tensor(s.B, c.model.epsilon);
  if (c.run.galerkin_k > 0) {
    s.v = project_Pk(s.v, c.run.galerkin_k);
    s.B = project_Qk(s.B, c.run.galerkin_k);
  }
  return s;
}

void say(const Options& o, const std::string& msg) {
  if (!o.quiet) std::cout << msg << '\n';
}

int cmd_run(const Options& o) {
  const auto cfg = load(o);
  const Scheme scheme = scheme_from_string(o.scheme);
  const auto dir = output_dir(o);
  State2 s0;
  long first = 0;
  if (!o.restore_path.empty()) {
    auto c = restore(o.restore_path);
    if (c.state.grid().size() != cfg.run.grid_size) throw UsageError("--restore: grid size differs from the config");
    s0 = std::move(c.state);
    first = c.step;
  } else {
    s0 = initial_state(o, cfg);
  }

  DiagnosticsWriter csv((dir / "diagnostics.csv").string());
  EnergyLedger ledger(cfg.model.epsilon > 0);
  long outputs = 0;
  auto sink = [&](const State2& s, long k) {
    auto r = record(s, static_cast<const VectorField2<double>*>(nullptr), cfg.model, o.abort_on_nonspd);
    ledger.push(r);
    csv.write(r);
    if (o.snapshot_every > 0 && outputs % o.snapshot_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%08ld.v2ds", k);
      write_snapshot(s, (dir / name).string());
    }
    ++outputs;
  };
  write_snapshot(s0, (dir / "snapshot_initial.v2ds").string());
  State2 last = s0;
  long last_step = first;
  auto track = [&](const State2& s, long k) {
    last = s;
    last_step = k;
  };
  try {
    const State2 s = integrate(s0, Forcing<double>{}, cfg.run.t_end, stepper(cfg, scheme), cfg.model,
                               {sink, track}, cfg.run.output_every, first);
    write_snapshot(s, (dir / "snapshot_final.v2ds").string());
    checkpoint(s, last_step, (dir / "checkpoint.v2dc").string());
  } catch (const NonFinite&) {
    csv.flush();
    checkpoint(last, last_step, (dir / "checkpoint_last_good.v2dc").string());
    throw;
  }
  csv.flush();
  say(o, "run: " + std::to_string(outputs) + " records written to " + (dir / "diagnostics.csv").string());
  return 0;
}

void write_convergence(std::ostream& out, const ConvergenceReport& rep, bool header) {
  if (header) out << "case,N,dt,eps,error_l2_v,error_l2_B,order,pass\n";
  for (const auto& r : rep.rows)
    out << r.case_name << ',' << r.n << ',' << fmt(r.dt) << ',' << fmt(r.eps) << ',' << fmt(r.error_l2_v) << ','
        << fmt(r.error_l2_B) << ',' << fmt(r.order) << ',' << (r.pass ? "true" : "false") << '\n';
}

int cmd_converge(const Options& o) {
  const auto cfg = load(o);
  const auto dir = output_dir(o);
  auto c = smooth_case(cfg.model);
  c.params.epsilon = 0;
  StudySpec spatial;
  spatial.kind = LadderKind::spatial;
  spatial.ladder = {{16, 1e-5}, {32, 1e-5}};
  spatial.t_end = 0.01;
  spatial.min_drop = 100;
  StudySpec euler;
  euler.ladder = {{32, 4e-3}, {32, 2e-3}, {32, 1e-3}};
  euler.t_end = 0.1;
  euler.scheme = Scheme::imex_euler;
  euler.expected_order = 1;
  euler.tolerance = 0.2;
  StudySpec mid = euler;
  mid.scheme = Scheme::imex_midpoint;
  mid.expected_order = 2;
  mid.tolerance = 0.3;

  const auto path = (dir / "convergence.csv").string();
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  bool ok = true;
  bool header = true;
  for (auto* spec : {&spatial, &euler, &mid}) {
    const auto rep = convergence_study(c, *spec);
    write_convergence(out, rep, header);
    header = false;
    ok = ok && rep.pass;
  }
  say(o, std::string("converge: ") + (ok ? "all rungs pass" : "some rungs fail") + ", report in " + path);
  return 0;
}

int cmd_twin(const Options& o) {
  const auto cfg = load(o);
  const auto dir = output_dir(o);
  const auto s0 = initial_state(o, cfg);
  const auto rep = twin_run(s0, cfg.model, stepper(cfg, scheme_from_string(o.scheme)), cfg.run.t_end, o.amp,
                            cfg.run.seed, cfg.run.output_every);
  const auto path = (dir / "twin.csv").string();
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "t,separation,integral_g,envelope\n";
  for (const auto& q : rep.series)
    out << fmt(q.t) << ',' << fmt(q.separation) << ',' << fmt(q.integral_g) << ',' << fmt(q.envelope) << '\n';
  say(o, "twin: C_fit = " + fmt(rep.c_fit) + ", within envelope at " + fmt(100 * rep.fraction_within) + "% of times");
  return 0;
}

int cmd_fuzz(const Options& o) {
  const auto cfg = load(o);
  const auto dir = output_dir(o);
  FuzzSpec spec;
  spec.n_cases = o.cases;
  spec.n = cfg.run.grid_size;
  spec.t_end = cfg.run.t_end;
  spec.dt = cfg.run.dt > 0 ? cfg.run.dt : 1e-3;
  spec.seed = cfg.run.seed;
  spec.scheme = scheme_from_string(o.scheme);
  const auto rep = positivity_fuzz(spec, cfg.model);
  const auto path = (dir / "fuzz.csv").string();
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "case,seed,lambda_min_initial,lambda_floor,dt,retried,pass\n";
  for (const auto& c : rep.cases)
    out << c.index << ',' << c.seed << ',' << fmt(c.lambda_min_initial) << ',' << fmt(c.lambda_floor) << ','
        << fmt(c.dt_used) << ',' << (c.retried ? "true" : "false") << ',' << (c.pass ? "true" : "false") << '\n';
  say(o, "fuzz: " + std::string(rep.pass ? "all cases positive" : "positivity lost") + ", floor " + fmt(rep.floor));
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto cfg = load(o);
  const auto dir = output_dir(o);
  auto plain = cfg;
  plain.model.epsilon = 0;
  Options base = o;
  const auto s0 = initial_state(base, plain);
  const auto rep = epsilon_sweep(s0, cfg.model, stepper(cfg, scheme_from_string(o.scheme)), cfg.run.t_end, o.eps);
  const auto path = (dir / "sweep.csv").string();
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << "eps,distance,audit_gap,degenerate\n";
  for (const auto& p : rep.points)
    out << fmt(p.eps) << ',' << fmt(p.distance) << ',' << fmt(p.audit_gap) << ',' << (p.degenerate ? "true" : "false")
        << '\n';
  say(o, std::string("sweep: distances ") + (rep.decreasing ? "decrease" : "do not decrease") + " along the ladder");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral solver for 2D viscoelastic rate-type fluids with stress diffusion"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--out", o.out, "output directory (VISCO2D_OUT overrides)");
  app.add_flag("--quiet", o.quiet, "suppress progress messages");

  auto* run = app.add_subcommand("run", "integrate a configuration and write diagnostics and snapshots");
  auto* converge = app.add_subcommand("converge", "manufactured-solution convergence study");
  auto* twin = app.add_subcommand("twin", "twin-run stability experiment");
  auto* fuzz = app.add_subcommand("fuzz", "positivity fuzzing over random initial data");
  auto* sweep = app.add_subcommand("sweep", "epsilon-regularization sweep");
  for (auto* sub : {run, converge, twin, fuzz, sweep}) {
    sub->add_option("config", o.config, "configuration file")->required();
    sub->add_option("--scheme", o.scheme, "imex_euler or imex_midpoint");
    sub->add_option("--init", o.init, "taylor_green, coupled, random or rest");
  }
  run->add_flag("--abort-on-nonspd", o.abort_on_nonspd, "stop when B loses positive definiteness");
  run->add_option("--snapshot-every", o.snapshot_every, "snapshot every n-th record (0: initial and final only)");
  run->add_option("--restore", o.restore_path, "continue from a checkpoint");
  twin->add_option("--amp", o.amp, "perturbation amplitude")->required();
  fuzz->add_option("--cases", o.cases, "number of random cases")->required();
  sweep->add_option("--eps", o.eps, "comma-separated epsilon ladder")->delimiter(',')->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(o);
    if (*converge) return cmd_converge(o);
    if (*twin) return cmd_twin(o);
    if (*fuzz) return cmd_fuzz(o);
    if (*sweep) return cmd_sweep(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const OutOfRange& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IncompatibleOptions& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
