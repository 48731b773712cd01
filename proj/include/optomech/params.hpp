#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace optomech {

/// One experimental scenario. All values in SI base units.
struct ExperimentParams {
  double L = 0.067;        // cavity length, m
  double lambda = 0.0;     // laser wavelength, m
  double F = 0.0;          // cavity finesse
  double P_in = 0.0;       // incident power, W
  double T = 0.0;          // bath temperature, K
  double m = 0.0;          // motional mass, kg
  double omega_m = 0.0;    // mechanical angular frequency, rad/s
  double Q = 0.0;          // mechanical quality factor
  double r_c = 0.0;        // membrane field reflectivity
  double x0 = 0.0;         // residual offset from the detuning extremum, m

  bool operator==(const ExperimentParams&) const = default;
};

/// Parameter keys in the config file, ASCII-sorted.
inline constexpr std::array<std::string_view, 10> kParamKeys = {
    "F", "L", "P_in", "Q", "T", "lambda", "m", "omega_m", "r_c", "x0"};

/// Reads a field by its config key. Throws ConfigError for an unknown key.
double get_param(const ExperimentParams& p, std::string_view key);
void set_param(ExperimentParams& p, std::string_view key, double value);

struct Violation {
  std::string field;
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Every violated invariant, one entry per field, sorted by field name.
std::vector<Violation> validate(const ExperimentParams& p);

/// Throws ConfigError naming the first violation, if any.
void require_valid(const ExperimentParams& p);

ExperimentParams parse_config(std::string_view text);
ExperimentParams load_config(const std::filesystem::path& path);

/// `key = value` lines with 17 significant digits; parse_config(format_config(p)) == p.
std::string format_config(const ExperimentParams& p);
void save_config(const ExperimentParams& p, const std::filesystem::path& path);

/// The two parameter sets for observing a single ground-state quantum jump,
/// with L = 6.7 cm.
ExperimentParams table1_row1();
ExperimentParams table1_row2();

/// Dielectric slab membrane.
struct MembraneSpec {
  double n_index = 1.0;
  double d = 0.0;  // thickness, m
};

std::vector<Violation> validate(const MembraneSpec& spec);

}  // namespace optomech
