#include "visco2d/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "visco2d/errors.hpp"

namespace visco2d {

namespace {

constexpr double kPresetBeta = 0.01;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) throw OutOfRange(key, "not a finite number: '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw OutOfRange(key, "not an integer: '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw OutOfRange(key, "expected true or false, got '" + v + "'");
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string to_string(Preset p) {
  switch (p) {
    case Preset::custom: return "custom";
    case Preset::oldroyd_b: return "oldroyd_b";
    case Preset::giesekus: return "giesekus";
    case Preset::johnson_segalman: return "johnson_segalman";
  }
  return "custom";
}

Preset preset_from_string(const std::string& s) {
  if (s == "custom") return Preset::custom;
  if (s == "oldroyd_b") return Preset::oldroyd_b;
  if (s == "giesekus") return Preset::giesekus;
  if (s == "johnson_segalman") return Preset::johnson_segalman;
  throw OutOfRange("preset", "unknown preset '" + s + "'");
}

ValidatedConfig validate(const ModelParams& params, const RunConfig& run) {
  ValidatedConfig c{params, run};
  ModelParams& m = c.model;
  RunConfig& r = c.run;

  switch (r.preset) {
    case Preset::custom: break;
    case Preset::oldroyd_b:
      m.a = 1.0;
      m.delta2 = 0.0;
      if (!(m.delta1 > 0.0)) throw IncompatibleOptions("delta1", "oldroyd_b requires delta1 > 0");
      break;
    case Preset::giesekus:
      m.a = 1.0;
      m.delta1 = 0.0;
      if (!(m.delta2 > 0.0)) throw IncompatibleOptions("delta2", "giesekus requires delta2 > 0");
      break;
    case Preset::johnson_segalman:
      if (!(m.a >= -1.0 && m.a <= 1.0)) throw OutOfRange("a", "johnson_segalman requires a in [-1, 1]");
      break;
  }

  if (!std::isfinite(m.a)) throw OutOfRange("a", "must be finite");
  if (!(m.beta >= 0.0 && m.beta <= 1.0)) throw OutOfRange("beta", "must lie in [0, 1]");
  if ((m.beta == 0.0 || m.beta == 1.0) && !m.extended_range)
    throw IncompatibleOptions("beta", "beta in {0, 1} requires extended_range = true");
  if (!(m.delta1 >= 0.0) || !std::isfinite(m.delta1)) throw OutOfRange("delta1", "must be finite and >= 0");
  if (!(m.delta2 >= 0.0) || !std::isfinite(m.delta2)) throw OutOfRange("delta2", "must be finite and >= 0");
  if (!(m.epsilon >= 0.0) || !std::isfinite(m.epsilon)) throw OutOfRange("epsilon", "must be finite and >= 0");

  if (r.grid_size < 8 || r.grid_size % 2 != 0) throw OutOfRange("grid_size", "must be an even integer >= 8");
  if (!(r.t_end >= 0.0) || !std::isfinite(r.t_end)) throw OutOfRange("t_end", "must be finite and >= 0");
  if (!(r.dt >= 0.0) || !std::isfinite(r.dt)) throw OutOfRange("dt", "must be finite and >= 0");
  if (r.dt == 0.0 && !(r.cfl > 0.0 && r.cfl <= 1.0)) throw OutOfRange("cfl", "adaptive stepping requires cfl in (0, 1]");
  if (r.galerkin_k < 0 || r.galerkin_k > r.grid_size / 2) throw OutOfRange("galerkin_k", "must lie in [0, grid_size/2]");
  if (r.output_every < 1) throw OutOfRange("output_every", "must be >= 1");
  return c;
}

ValidatedConfig parse_config(const std::string& text) {
  ValidatedConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw OutOfRange("line " + std::to_string(lineno), "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw IncompatibleOptions(key, "duplicate key");

    if (key == "a") c.model.a = parse_double(key, val);
    else if (key == "beta") c.model.beta = parse_double(key, val);
    else if (key == "delta1") c.model.delta1 = parse_double(key, val);
    else if (key == "delta2") c.model.delta2 = parse_double(key, val);
    else if (key == "epsilon") c.model.epsilon = parse_double(key, val);
    else if (key == "extended_range") c.model.extended_range = parse_bool(key, val);
    else if (key == "grid_size") c.run.grid_size = static_cast<int>(parse_int(key, val));
    else if (key == "t_end") c.run.t_end = parse_double(key, val);
    else if (key == "dt") c.run.dt = parse_double(key, val);
    else if (key == "cfl") c.run.cfl = parse_double(key, val);
    else if (key == "dealias") c.run.dealias = parse_bool(key, val);
    else if (key == "galerkin_k") c.run.galerkin_k = static_cast<int>(parse_int(key, val));
    else if (key == "output_every") c.run.output_every = static_cast<int>(parse_int(key, val));
    else if (key == "seed") {
      const long long s = parse_int(key, val);
      if (s < 0) throw OutOfRange(key, "must be >= 0");
      c.run.seed = static_cast<std::uint64_t>(s);
    } else if (key == "preset") c.run.preset = preset_from_string(val);
    else throw OutOfRange(key, "unknown config key");
  }
  if (c.run.preset != Preset::custom && !seen.count("beta")) c.model.beta = kPresetBeta;
  return c;
}

ValidatedConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError(path, "cannot open config file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ValidatedConfig& c) {
  std::ostringstream o;
  o << "a = " << fmt(c.model.a) << "\n"
    << "beta = " << fmt(c.model.beta) << "\n"
    << "delta1 = " << fmt(c.model.delta1) << "\n"
    << "delta2 = " << fmt(c.model.delta2) << "\n"
    << "epsilon = " << fmt(c.model.epsilon) << "\n"
    << "extended_range = " << (c.model.extended_range ? "true" : "false") << "\n"
    << "grid_size = " << c.run.grid_size << "\n"
    << "t_end = " << fmt(c.run.t_end) << "\n"
    << "dt = " << fmt(c.run.dt) << "\n"
    << "cfl = " << fmt(c.run.cfl) << "\n"
    << "dealias = " << (c.run.dealias ? "true" : "false") << "\n"
    << "galerkin_k = " << c.run.galerkin_k << "\n"
    << "output_every = " << c.run.output_every << "\n"
    << "seed = " << c.run.seed << "\n"
    << "preset = " << to_string(c.run.preset) << "\n";
  return o.str();
}

}  // namespace visco2d
