// spoc: run the RLVE studies and compare result summaries.
//
//   spoc run --study case1 --out results/case1
//   spoc run --study sweep --override sweep.heat_rate_values=0.85,0.70
//   spoc compare a/summary.json b/summary.json --tolerance entry_s=1
//
// Exit status: 0 converged (or summaries agree), 2 not converged (or a field
// outside its tolerance), 1 on any error.

#include "artifacts.hpp"
#include "run_config.hpp"

#include "spoc/detection.hpp"
#include "spoc/error.hpp"
#include "spoc/nlp.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace spoc;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

std::string suffix_for(double heat_rate_mw) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%.3f", heat_rate_mw);
  return buf;
}

void write_artifacts(const cli::RunConfig& c, const rlve::StudyResult& r, const std::string& suffix) {
  const fs::path dir(c.out_dir);
  if (c.write_csv) write_file(dir / ("trajectory" + suffix + ".csv"), cli::trajectory_csv(r));
  if (c.write_json)
    write_file(dir / ("arc_report" + suffix + ".json"),
               report_json(r.solution.arc_report, r.solution.iteration_log, r.problem) + "\n");
  write_file(dir / ("arc_table" + suffix + ".txt"), arc_table(r.solution.iteration_log, r.problem));
}

int run(const cli::RunConfig& c, bool quiet) {
  fs::create_directories(c.out_dir);
  rlve::StudySettings settings = c.settings;
  if (!quiet)
    settings.spoc.on_iteration = [](const IterationRecord& rec) {
      std::fprintf(stderr, "  M=%d  NLP %s (%d it)  e_max %.2e  violation %.2e  domains %d  %.1f s  %s\n",
                   rec.iteration, to_string(rec.status), rec.nlp_iterations, rec.mesh_error, rec.constraint_error,
                   rec.domains, rec.wall_time, rec.action.c_str());
    };

  std::optional<TrajectorySolution> seed;
  if (c.warm_start) seed = cli::read_trajectory_csv(*c.warm_start);

  std::vector<rlve::StudyConfig> configs;
  if (c.study == "sweep") {
    for (double q : c.sweep_values) {
      rlve::StudyConfig s = c.study_config;
      s.heat_rate_max = q * 1e6;
      configs.push_back(s);
    }
    // Every sweep member starts from the same nonrotating solution.
    if (!seed) {
      if (!quiet) std::fprintf(stderr, "seed: nonrotating solve\n");
      seed = rlve::seed_solution(c.study_config, settings);
    }
  } else {
    configs.push_back(c.study_config);
  }

  bool all_converged = true;
  nlohmann::json summary;
  for (const auto& cfg : configs) {
    if (!quiet) std::fprintf(stderr, "%s: heat-rate limit %.2f MW/m^2\n", c.study.c_str(), cfg.heat_rate_max / 1e6);
    const rlve::StudyResult r = rlve::run_study(cfg, settings, seed ? &*seed : nullptr);
    all_converged = all_converged && r.solution.converged;
    const std::string suffix = c.study == "sweep" ? suffix_for(cfg.heat_rate_max / 1e6) : "";
    write_artifacts(c, r, suffix);
    std::cout << cli::summary_text(r);
    if (c.study == "sweep")
      summary["runs"].push_back(cli::summary_json(r));
    else
      summary = cli::summary_json(r);
  }
  if (c.study == "sweep") summary["study"] = "sweep";
  if (c.write_json) write_file(fs::path(c.out_dir) / "summary.json", summary.dump(2) + "\n");
  return all_converged ? 0 : 2;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential path-constrained optimal control of the reusable launch vehicle entry problem"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "solve a study and write trajectory, arc report and summary");
  std::optional<std::string> study, config_path, warm_start, backend, out_dir;
  std::optional<int> max_iterations;
  std::vector<std::string> overrides;
  bool quiet = false, list_keys = false;
  run_cmd->add_option("--study", study, "case1, case2, rotating, sweep or custom");
  run_cmd->add_option("--config", config_path, "INI-style study configuration")->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "output directory (default spoc_out)");
  run_cmd->add_option("--override", overrides, "section.key=value, repeatable");
  run_cmd->add_option("--warm-start", warm_start, "trajectory CSV from an earlier run used as the guess")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--max-iterations", max_iterations, "mesh iteration cap");
  run_cmd->add_option("--backend", backend, "NLP backend (default: SPOC_NLP_BACKEND, then the first available)");
  run_cmd->add_flag("--quiet", quiet, "no per-iteration log on stderr");
  run_cmd->add_flag("--list-keys", list_keys, "print the configuration keys and exit");

  auto* cmp_cmd = app.add_subcommand("compare", "compare two summary.json files field by field");
  std::string file_a, file_b;
  std::vector<std::string> tolerance_args;
  cmp_cmd->add_option("a", file_a)->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("b", file_b)->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--tolerance", tolerance_args, "field=value, by full path or last component; repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run_cmd) {
      if (list_keys) {
        for (const auto& [k, help] : cli::config_keys()) std::printf("%-40s %s\n", k.c_str(), help.c_str());
        return 0;
      }
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& o : overrides) pairs.push_back(cli::split_assignment(o));
      if (out_dir) pairs.emplace_back("output.dir", *out_dir);
      if (warm_start) pairs.emplace_back("output.warm_start", *warm_start);
      if (max_iterations) pairs.emplace_back("mesh.max_iterations", std::to_string(*max_iterations));
      if (backend) pairs.emplace_back("solver.backend", *backend);
      const cli::RunConfig c = cli::load_run_config(study, config_path, pairs);
      if (!quiet) std::fprintf(stderr, "NLP backend: %s\n", resolve_backend(c.settings.spoc.nlp).c_str());
      return run(c, quiet);
    }
    std::map<std::string, double> tol = cli::default_tolerances();
    for (const auto& t : tolerance_args) {
      const auto [k, v] = cli::split_assignment(t);
      try {
        tol[k] = std::stod(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::Config, "tolerance '" + t + "' is not numeric");
      }
    }
    const cli::Comparison cmp = cli::compare_summaries(read_json(file_a), read_json(file_b), tol);
    for (const auto& f : cmp.failures) std::cout << f << "\n";
    std::cout << cmp.fields << " fields compared, " << cmp.failures.size() << " outside tolerance\n";
    return cmp.failures.empty() ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
