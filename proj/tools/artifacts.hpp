#pragma once

#include "spoc/study.hpp"

#include "json.hpp"

#include <map>
#include <string>
#include <vector>

namespace spoc::cli {

/// Trajectory columns; angles in degrees, heat rate in W/m^2, dynamic pressure in Pa.
const std::vector<std::string>& trajectory_columns();

/// One row per support point of every domain, 17 significant digits.
std::string trajectory_csv(const rlve::StudyResult& result);

/**
 * Guess from a trajectory CSV: each domain becomes a chain of degree-1 intervals
 * through its rows. Throws Error(Io) or Error(Config) with the offending line.
 */
TrajectorySolution read_trajectory_csv(const std::string& path);
TrajectorySolution parse_trajectory_csv(const std::string& text, const std::string& origin = "<csv>");

/// Objective, final time, ranges, heating load and arcs; no timings, so identical runs give identical files.
nlohmann::json summary_json(const rlve::StudyResult& result);

std::string summary_text(const rlve::StudyResult& result);

/// Default per-field tolerances of compare(), keyed by the last path component.
const std::map<std::string, double>& default_tolerances();

struct Comparison {
  /// One line per field outside its tolerance.
  std::vector<std::string> failures;
  int fields = 0;
};

/**
 * Field-by-field comparison of two summaries. Numbers pass within the tolerance of
 * their full path or last component (exact when neither is listed); other values
 * must match. Throws Error(Config) when the two documents have different fields.
 */
Comparison compare_summaries(const nlohmann::json& a, const nlohmann::json& b,
                             const std::map<std::string, double>& tolerances);

}  // namespace spoc::cli
