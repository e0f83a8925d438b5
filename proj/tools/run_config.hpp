#pragma once

#include "spoc/study.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spoc::cli {

/**
 * Everything a `run` needs. Keys are "section.name"; a bare name is accepted
 * when it is unambiguous. Units follow the paper's tables: MW/m^2 for the heating
 * rate limit, kPa for dynamic pressure, degrees for angles.
 */
struct RunConfig {
  /// case1, case2, rotating, sweep or custom.
  std::string study = "case1";
  rlve::StudyConfig study_config;
  rlve::StudySettings settings;
  /// Heating-rate limits of a sweep, MW/m^2.
  std::vector<double> sweep_values{0.85, 0.80, 0.75, 0.70};
  std::string out_dir = "spoc_out";
  bool write_csv = true;
  bool write_json = true;
  std::optional<std::string> warm_start;
};

/// Known keys with a one-line description, for --help and diagnostics.
const std::vector<std::pair<std::string, std::string>>& config_keys();

/// key=value pair as given on the command line. Throws Error(Config).
std::pair<std::string, std::string> split_assignment(const std::string& text);

/**
 * Build a RunConfig from an optional config file, then the command-line
 * overrides in order. The study comes from `study` when set, else from the file,
 * else case1. Throws Error(Config) naming the field and, for file entries, the line.
 */
RunConfig load_run_config(const std::optional<std::string>& study, const std::optional<std::string>& config_path,
                          const std::vector<std::pair<std::string, std::string>>& overrides);

/// Apply one setting. Throws Error(Config) on an unknown key or a bad value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace spoc::cli
