#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phasor_sentinel/decorrelation.hpp"
#include "phasor_sentinel/detection.hpp"

namespace phasor_sentinel {

/// Effective configuration of a full run. Persisted in the run manifest.
struct RunConfig {
  int pmus = 10;
  int minutes = 14;
  std::uint64_t seed = 7;
  std::int64_t spoof_start = kCyclesPerMinute / 2;
  std::vector<std::string> spoofs;  // suite codes; empty = all nine
  std::string features = "five";
  int window = 300;
  std::string train_timing = "late";
  int stride = 20;
  std::vector<int> train_minutes;  // empty = 1..minutes-3
  std::vector<int> test_minutes;   // empty = the rest
  double C = 1.0;
  double gamma = 0.2;
  double tol = 1e-3;
  int max_passes = 1000;
  bool ensemble = true;
  /// Spoof whose first test minute feeds the MCD/MCOOB tables and plots.
  std::string severity_spoof = "S1";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Fills defaulted fields (spoof list, split) and validates the result.
RunConfig resolve(RunConfig config);

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(std::string_view text);
/// FNV-1a 64 of the canonical config JSON, as 16 hex digits.
std::string config_hash(const RunConfig& config);

FleetConfig fleet_config(const RunConfig& config);
SvmParams svm_params(const RunConfig& config);

struct RunResult {
  RunConfig config;
  std::vector<SvmModel> models;
  std::vector<DetectionReport> reports;
  std::optional<EnsembleTable> ensemble;
  std::vector<SeverityRow> severity;
  /// Frequency correlation at W=300 for the severity minute.
  TrajectoryBundle trajectory;
};

/// Generate, spoof, featurize, train one model per spoof, evaluate, and
/// (with all nine spoofs) run the leave-one-out ensemble.
RunResult run_pipeline(const RunConfig& config, int jobs = 0);

/// Writes manifest.json, models/, and report/ under `dir`.
void write_run(const std::filesystem::path& dir, const RunResult& result, bool force, bool emit_svg);

/// Reads the config recorded in a run manifest.
RunConfig load_manifest_config(const std::filesystem::path& manifest);

// On-disk layout shared by the CLI subcommands.
std::string minute_file_name(int minute_id);
std::filesystem::path labels_path_for(const std::filesystem::path& frames);
std::filesystem::path spec_path_for(const std::filesystem::path& frames);
/// Loads frames and, when present, the spoof spec and labels written next
/// to them; genuine minutes come back with an all-false label track.
SpoofedMinute load_spoofed_minute(const std::filesystem::path& frames);
/// Frames files (minute_NN.csv) in a directory, restricted to `minutes`
/// when non-empty. Throws ValidationError if a requested minute is missing.
std::vector<std::filesystem::path> minute_files(const std::filesystem::path& dir, const std::vector<int>& minutes);

/// "1-11" or "12,13,14" or a mix.
std::vector<int> parse_minute_list(const std::string& text);

}  // namespace phasor_sentinel
