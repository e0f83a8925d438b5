#include "spoc/study.hpp"

namespace spoc::rlve {

Mesh initial_mesh(const StudyConfig& config, const StudySettings& settings) {
  return Mesh::uniform(settings.intervals.value_or(config.rotating ? 10 : 30),
                       settings.degree.value_or(config.rotating ? 4 : 5));
}

DomainLayout initial_layout(const StudyConfig& config, const Mesh& mesh, double tf_guess) {
  return DomainLayout::single(mesh, {0.0, 0.0, 0.0}, {config.tf_min, config.tf_max, tf_guess});
}

TrajectorySolution seed_solution(const StudyConfig& config, const StudySettings& settings) {
  StudyConfig base = preset("case1");
  base.params = config.params;
  base.tf_guess = config.tf_guess;
  base.tf_min = config.tf_min;
  base.tf_max = config.tf_max;
  StudySettings s = settings;
  s.intervals.reset();
  s.degree.reset();
  s.spoc.on_iteration = nullptr;
  return run_study(base, s).solution;
}

StudyResult run_study(const StudyConfig& config, const StudySettings& settings, const TrajectorySolution* seed) {
  StudyResult r;
  r.config = config;
  r.problem = build_study(config);
  TrajectorySolution guess;
  if (seed)
    guess = *seed;
  else if (config.rotating)
    guess = seed_solution(config, settings);
  else
    guess = initial_guess(config);
  const double tf_guess = seed || config.rotating ? guess.tf() : config.tf_guess;
  r.solution = solve_spoc(r.problem, initial_layout(config, initial_mesh(config, settings), tf_guess), guess,
                          settings.spoc);
  r.derived = derived_quantities(r.solution, config.params, config.rotating);
  return r;
}

}  // namespace spoc::rlve
