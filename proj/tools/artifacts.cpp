#include "artifacts.hpp"

#include "spoc/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spoc::cli {

using nlohmann::json;

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> c = {"t_s",       "h_m",       "theta_deg", "phi_deg",          "v_mps",
                                             "gamma_deg", "psi_deg",   "alpha_deg", "sigma_deg",        "heat_rate_Wm2",
                                             "dynamic_pressure_Pa", "load_factor", "domain"};
  return c;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool is_angle_state(int i) { return i != rlve::kH && i != rlve::kV; }

}  // namespace

std::string trajectory_csv(const rlve::StudyResult& result) {
  std::ostringstream out;
  const auto& cols = trajectory_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  const auto& p = result.config.params;
  for (std::size_t di = 0; di < result.solution.domains.size(); ++di) {
    const auto& d = result.solution.domains[di];
    for (int j = 0; j < d.times.size(); ++j) {
      const Eigen::VectorXd y = d.states.row(j).transpose();
      const Eigen::VectorXd u =
          j < d.collocation_points() ? Eigen::VectorXd(d.controls.row(j).transpose()) : d.control_at(d.t_end);
      const auto c = rlve::path_constraint_values({y.data(), 6}, {u.data(), 2}, p);
      out << num(d.times[j]);
      for (int i = 0; i < rlve::kNumStates; ++i) out << "," << num(is_angle_state(i) ? rlve::deg(y[i]) : y[i]);
      out << "," << num(rlve::deg(u[rlve::kAlpha])) << "," << num(rlve::deg(u[rlve::kSigma]));
      out << "," << num(c.heat_rate) << "," << num(c.dynamic_pressure) << "," << num(c.load_factor) << "," << di
          << "\n";
    }
  }
  return out.str();
}

TrajectorySolution parse_trajectory_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Config, origin + ": empty trajectory file");
  const auto& cols = trajectory_columns();
  {
    std::string expected;
    for (std::size_t i = 0; i < cols.size(); ++i) expected += (i ? "," : "") + cols[i];
    if (line != expected) throw Error(ErrorCode::Config, origin + ":1: unexpected header");
  }
  struct Row {
    double t;
    Eigen::VectorXd y, u;
  };
  std::vector<std::vector<Row>> domains;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    try {
      while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::Config, origin + ":" + std::to_string(number) + ": non-numeric field '" + cell + "'");
    }
    if (v.size() != cols.size())
      throw Error(ErrorCode::Config, origin + ":" + std::to_string(number) + ": expected " +
                                         std::to_string(cols.size()) + " fields");
    const int d = static_cast<int>(v.back());
    if (d < 0 || d > static_cast<int>(domains.size()))
      throw Error(ErrorCode::Config, origin + ":" + std::to_string(number) + ": domain indices must be consecutive");
    if (d == static_cast<int>(domains.size())) domains.emplace_back();
    Row r{v[0], Eigen::VectorXd(rlve::kNumStates), Eigen::VectorXd(rlve::kNumControls)};
    for (int i = 0; i < rlve::kNumStates; ++i)
      r.y[i] = is_angle_state(i) ? rlve::rad(v[static_cast<size_t>(i) + 1]) : v[static_cast<size_t>(i) + 1];
    r.u[rlve::kAlpha] = rlve::rad(v[7]);
    r.u[rlve::kSigma] = rlve::rad(v[8]);
    auto& rows = domains.back();
    if (!rows.empty() && !(r.t > rows.back().t)) {
      if (r.t < rows.back().t)
        throw Error(ErrorCode::Config, origin + ":" + std::to_string(number) + ": time goes backwards");
      continue;
    }
    rows.push_back(std::move(r));
  }
  if (domains.empty()) throw Error(ErrorCode::Config, origin + ": no trajectory rows");

  TrajectorySolution s;
  for (const auto& rows : domains) {
    if (rows.size() < 2) throw Error(ErrorCode::Config, origin + ": every domain needs two distinct times");
    const int n = static_cast<int>(rows.size()) - 1;
    DomainSolution d;
    d.t_start = rows.front().t;
    d.t_end = rows.back().t;
    d.mesh.degrees.assign(static_cast<size_t>(n), 1);
    d.times.resize(n + 1);
    d.states.resize(n + 1, rlve::kNumStates);
    d.controls.resize(n, rlve::kNumControls);
    for (int j = 0; j <= n; ++j) {
      const Row& r = rows[static_cast<size_t>(j)];
      d.mesh.breakpoints.push_back(j == n ? 1.0 : -1.0 + 2.0 * (r.t - d.t_start) / (d.t_end - d.t_start));
      d.times[j] = r.t;
      d.states.row(j) = r.y.transpose();
      if (j < n) d.controls.row(j) = r.u.transpose();
    }
    s.domains.push_back(std::move(d));
  }
  return s;
}

TrajectorySolution read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open trajectory file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_trajectory_csv(buffer.str(), path);
}

json summary_json(const rlve::StudyResult& r) {
  const auto& s = r.solution;
  json j;
  j["study"] = r.config.name;
  j["rotating"] = r.config.rotating;
  j["control_limits"] = r.config.control_limits;
  j["heat_rate_max_MWm2"] = r.config.heat_rate_max / 1e6;
  j["converged"] = s.converged;
  j["nlp_status"] = to_string(s.nlp_status);
  j["mesh_iterations"] = s.iteration_log.size();
  j["objective_deg"] = r.derived.crossrange_deg;
  j["final_time_s"] = r.derived.final_time;
  j["downrange_deg"] = r.derived.downrange_deg;
  j["inertial_longitude_deg"] = r.derived.inertial_longitude_deg;
  j["heating_load_MJm2"] = r.derived.heating_load / 1e6;
  j["max_mesh_error"] = s.mesh_error;
  j["max_constraint_error"] = s.constraint_error;
  j["domains"] = s.domains.size();
  j["arcs"] = json::array();
  for (const Arc& a : s.constrained_arcs())
    j["arcs"].push_back({{"constraint", r.problem.path_constraints[static_cast<size_t>(a.constraint)].name},
                         {"bound", to_string(a.side)},
                         {"entry_s", a.entry},
                         {"exit_s", a.exit}});
  return j;
}

std::string summary_text(const rlve::StudyResult& r) {
  const auto& s = r.solution;
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "study %s: %s after %zu mesh iterations (NLP %s)\n", r.config.name.c_str(),
                s.converged ? "converged" : "NOT converged", s.iteration_log.size(), to_string(s.nlp_status));
  out << buf;
  std::snprintf(buf, sizeof buf, "  phi(tf) %.4f deg  theta(tf) %.4f deg  theta_I(tf) %.4f deg  tf %.2f s\n",
                r.derived.crossrange_deg, r.derived.downrange_deg, r.derived.inertial_longitude_deg,
                r.derived.final_time);
  out << buf;
  std::snprintf(buf, sizeof buf, "  heating load %.1f MJ/m^2  e_max %.2e  max violation %.2e\n",
                r.derived.heating_load / 1e6, s.mesh_error, s.constraint_error);
  out << buf;
  for (const Arc& a : s.constrained_arcs()) {
    std::snprintf(buf, sizeof buf, "  %-18s %s  entry %9.2f s  exit %9.2f s\n",
                  r.problem.path_constraints[static_cast<size_t>(a.constraint)].name.c_str(), to_string(a.side),
                  a.entry, a.exit);
    out << buf;
  }
  return out.str();
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"objective_deg", 0.02},          {"downrange_deg", 0.05},     {"inertial_longitude_deg", 0.2},
      {"final_time_s", 5.0},            {"entry_s", 3.0},            {"exit_s", 3.0},
      {"heating_load_MJm2", 12.5},      {"max_mesh_error", 1e-7},    {"max_constraint_error", 1e-7},
      {"heat_rate_max_MWm2", 1e-12},
  };
  return t;
}

namespace {

void flatten(const json& j, const std::string& path, std::map<std::string, json>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
  } else if (j.is_array()) {
    out[path + ".length"] = j.size();
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", out);
  } else {
    out[path] = j;
  }
}

std::string leaf(const std::string& path) {
  const auto dot = path.find_last_of('.');
  return dot == std::string::npos ? path : path.substr(dot + 1);
}

}  // namespace

Comparison compare_summaries(const json& a, const json& b, const std::map<std::string, double>& tolerances) {
  std::map<std::string, json> fa, fb;
  flatten(a, "", fa);
  flatten(b, "", fb);
  for (const auto& [k, v] : fa)
    if (!fb.count(k)) throw Error(ErrorCode::Config, "schema mismatch: field '" + k + "' missing from the second summary");
  for (const auto& [k, v] : fb)
    if (!fa.count(k)) throw Error(ErrorCode::Config, "schema mismatch: field '" + k + "' missing from the first summary");

  Comparison c;
  for (const auto& [k, va] : fa) {
    const json& vb = fb.at(k);
    ++c.fields;
    if (va.is_number() && vb.is_number()) {
      const double x = va.get<double>(), y = vb.get<double>();
      double tol = 0.0;
      if (auto it = tolerances.find(k); it != tolerances.end())
        tol = it->second;
      else if (auto jt = tolerances.find(leaf(k)); jt != tolerances.end())
        tol = jt->second;
      const double diff = std::abs(x - y);
      if (!(diff <= tol)) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s: %.10g vs %.10g, difference %.3g exceeds %.3g", k.c_str(), x, y, diff, tol);
        c.failures.push_back(buf);
      }
    } else if (va != vb) {
      c.failures.push_back(k + ": " + va.dump() + " vs " + vb.dump());
    }
  }
  return c;
}

}  // namespace spoc::cli
