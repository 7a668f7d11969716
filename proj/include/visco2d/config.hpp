#ifndef VISCO2D_CONFIG_HPP
#define VISCO2D_CONFIG_HPP

#include <cstdint>
#include <string>

namespace visco2d {

/// Model constants of the coupled velocity / conformation system.  Viscosity,
/// density and the stress-diffusion coefficient are fixed to one.
struct ModelParams {
  double a = 1.0;       ///< slip parameter of the objective derivative
  double beta = 0.5;    ///< free-energy interpolation weight, in (0,1)
  double delta1 = 1.0;  ///< linear relaxation rate
  double delta2 = 0.5;  ///< quadratic relaxation rate
  double epsilon = 0.0; ///< eigenvalue cutoff of the regularized scheme; 0 disables it
  bool extended_range = false;  ///< admit beta in {0, 1}

  bool operator==(const ModelParams&) const = default;
};

enum class Preset { custom, oldroyd_b, giesekus, johnson_segalman };

struct RunConfig {
  int grid_size = 64;
  double t_end = 0.1;
  double dt = 1e-4;  ///< 0 selects the adaptive CFL step
  double cfl = 0.5;
  bool dealias = true;
  int galerkin_k = 0;  ///< 0 keeps the full grid
  int output_every = 10;
  std::uint64_t seed = 1;
  Preset preset = Preset::custom;

  bool operator==(const RunConfig&) const = default;
};

struct ValidatedConfig {
  ModelParams model;
  RunConfig run;

  bool operator==(const ValidatedConfig&) const = default;
};

/// Applies the preset and checks every range.  Throws OutOfRange or
/// IncompatibleOptions naming the offending field.
ValidatedConfig validate(const ModelParams& params, const RunConfig& run);
inline ValidatedConfig validate(const ValidatedConfig& c) { return validate(c.model, c.run); }

std::string to_string(Preset p);
Preset preset_from_string(const std::string& s);

/// Parses the flat `key = value` format.  Unknown keys, duplicate keys and
/// malformed values throw.  When a preset is named and `beta` is absent the
/// preset default 0.01 is used.  The result is not validated.
ValidatedConfig parse_config(const std::string& text);
ValidatedConfig load_config(const std::string& path);

/// Writes every key; doubles use 17 significant digits so parsing is exact.
std::string serialize_config(const ValidatedConfig& c);

}  // namespace visco2d

#endif  // VISCO2D_CONFIG_HPP
