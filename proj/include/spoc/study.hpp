#pragma once

/**
 * @file
 * @brief End-to-end runs of the RLVE studies: initial mesh, seeding and the SPOC loop.
 */

#include "spoc/refinement.hpp"
#include "spoc/rlve.hpp"

#include <optional>

namespace spoc::rlve {

struct StudySettings {
  /// Initial mesh; unset means 30 x 5 for nonrotating studies and 10 x 4 for rotating ones.
  std::optional<int> intervals;
  std::optional<int> degree;
  SpocOptions spoc;
};

Mesh initial_mesh(const StudyConfig& config, const StudySettings& settings);

/// One domain on [0, tf] with t0 fixed and tf free within the configured limits.
DomainLayout initial_layout(const StudyConfig& config, const Mesh& mesh, double tf_guess);

struct StudyResult {
  StudyConfig config;
  OcpDefinition problem;
  TrajectorySolution solution;
  DerivedQuantities derived;
};

/// Nonrotating, unlimited-control solve from the straight-line guess, used to seed rotating studies.
TrajectorySolution seed_solution(const StudyConfig& config, const StudySettings& settings);

/**
 * Run the SPOC loop for `config`. Without a seed, nonrotating studies start from
 * initial_guess() and rotating ones from seed_solution().
 */
StudyResult run_study(const StudyConfig& config, const StudySettings& settings,
                      const TrajectorySolution* seed = nullptr);

}  // namespace spoc::rlve
