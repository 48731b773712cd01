#pragma once

#include <filesystem>
#include <optional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "optomech/cavity.hpp"
#include "optomech/cooling.hpp"
#include "optomech/jumpsim.hpp"
#include "optomech/params.hpp"
#include "optomech/qnd.hpp"
#include "optomech/sweep.hpp"

namespace optomech::io {

using Json = nlohmann::ordered_json;

/// Ordered key/value pairs written as `# key: value` lines ahead of CSV data
/// and as a "metadata" object in JSON.
using Metadata = std::vector<std::pair<std::string, std::string>>;

/// %.17g: doubles survive a text round trip unchanged.
std::string format_number(double v);

Metadata base_metadata(std::string_view command);
void append_params(Metadata& meta, const ExperimentParams& p);

/// Columns of a CSV file, keyed by header name. `#` lines and blank lines are skipped.
struct CsvTable {
  Metadata metadata;  // `# key: value` lines
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::optional<std::string> meta(std::string_view key) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

void write_metadata(std::ostream& out, const Metadata& meta);
void write_csv(std::ostream& out, const Metadata& meta, std::span<const std::string> header,
               std::span<const std::vector<double>> columns);

void write_band_structure_csv(std::ostream& out, const cavity::BandStructure& bands, const Metadata& meta);
/// Long form: detuning_rad_s, x_m, intensity.
void write_transmission_csv(std::ostream& out, const cavity::TransmissionMap& map, const Metadata& meta);
/// t_s, n: the initial state at t = 0 followed by one row per event.
void write_trajectory_csv(std::ostream& out, const jumpsim::JumpTrajectory& traj, const Metadata& meta);
/// t_s, freq_estimate_rad_s, true_n.
void write_readout_csv(std::ostream& out, const jumpsim::ReadoutTrace& trace, const Metadata& meta);
/// Rebuilds a readout from its CSV; bin width from the header, else from the bin-center spacing.
jumpsim::ReadoutTrace readout_from_csv(const CsvTable& table, double delta_omega);
/// One row per grid point: every parameter, every budget field and the flags.
void write_sweep_csv(std::ostream& out, const sweep::SweepResult& result, const Metadata& meta);

Json to_json(const Metadata& meta);
Json to_json(const ExperimentParams& p);
Json to_json(const qnd::QndBudget& b);
Json to_json(const cooling::PsdFit& fit);
Json to_json(const jumpsim::DetectionStats& stats);

void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace optomech::io
