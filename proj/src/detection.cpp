#include "spoc/detection.hpp"

#include "spoc/error.hpp"
#include "spoc/transcription.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace spoc {

Eigen::VectorXd relative_difference(const Eigen::VectorXd& samples, double bound) {
  return (samples.array() - bound).abs() / (1.0 + std::abs(bound));
}

std::pair<double, double> bound_switch_time(std::optional<double> prev, double at,
                                            std::optional<double> next, double nu) {
  if (!(nu > 0.0)) throw Error(ErrorCode::InvalidParameter, "switch-time window size must be positive");
  const double lo = prev ? at + nu * (*prev - at) : at;
  const double hi = next ? at + nu * (*next - at) : at;
  return {lo, hi};
}

ConstraintSamples sample_constraint(const TrajectorySolution& solution, const PathConstraint& constraint) {
  int total = 1;
  for (const auto& d : solution.domains) total += d.collocation_points();
  ConstraintSamples s;
  s.times.resize(total);
  s.values.resize(total);
  s.domain.resize(static_cast<size_t>(total));
  int j = 0;
  for (std::size_t di = 0; di < solution.domains.size(); ++di) {
    const auto& d = solution.domains[di];
    for (int i = 0; i < d.collocation_points(); ++i, ++j) {
      const Eigen::VectorXd y = d.states.row(i).transpose();
      const Eigen::VectorXd u = d.controls.row(i).transpose();
      s.times[j] = d.times[i];
      s.values[j] = constraint.evaluate({y.data(), static_cast<size_t>(y.size())},
                                        {u.data(), static_cast<size_t>(u.size())}, d.times[i]);
      s.domain[static_cast<size_t>(j)] = static_cast<int>(di);
    }
  }
  const auto& last = solution.domains.back();
  const Eigen::VectorXd y = solution.final_state();
  const Eigen::VectorXd u = last.control_at(last.t_end);
  s.times[j] = last.t_end;
  s.values[j] = constraint.evaluate({y.data(), static_cast<size_t>(y.size())},
                                    {u.data(), static_cast<size_t>(u.size())}, last.t_end);
  s.domain[static_cast<size_t>(j)] = static_cast<int>(solution.domains.size()) - 1;
  return s;
}

std::vector<std::pair<int, int>> active_runs(const std::vector<bool>& active) {
  std::vector<std::pair<int, int>> runs;
  const int n = static_cast<int>(active.size());
  for (int j = 0; j < n;) {
    if (!active[static_cast<size_t>(j)]) {
      ++j;
      continue;
    }
    int k = j;
    while (k + 1 < n && active[static_cast<size_t>(k) + 1]) ++k;
    if (!runs.empty() && j - runs.back().second == 2)
      runs.back().second = k;
    else
      runs.emplace_back(j, k);
    j = k + 1;
  }
  return runs;
}

namespace {

bool domain_has(const DomainSolution& d, int constraint, BoundSide side) {
  return std::any_of(d.active.begin(), d.active.end(), [&](const ActiveConstraint& a) {
    return a.index == constraint && a.side == side;
  });
}

}  // namespace

ArcReport detect_arcs(const TrajectorySolution& solution, const OcpDefinition& problem) {
  ArcReport report;
  for (int c : state_constraint_indices(problem)) {
    const PathConstraint& pc = problem.path_constraints[static_cast<size_t>(c)];
    const ConstraintSamples s = sample_constraint(solution, pc);
    const int n = static_cast<int>(s.times.size());
    for (BoundSide side : {BoundSide::Lower, BoundSide::Upper}) {
      const double bound = pc.bound(side);
      if (!std::isfinite(bound)) continue;
      const Eigen::VectorXd delta = relative_difference(s.values, bound);
      std::vector<bool> active(static_cast<size_t>(n));
      for (int j = 0; j < n; ++j) active[static_cast<size_t>(j)] = delta[j] <= pc.detection_tolerance;
      const auto neighbor = [&](int j) -> std::optional<double> {
        if (j < 0 || j >= n) return std::nullopt;
        return s.times[j];
      };
      // First sample at or after t.
      const auto index_of = [&](double t) {
        int j = 0;
        while (j + 1 < n && s.times[j] < t) ++j;
        return j;
      };
      for (auto [first, last] : active_runs(active)) {
        Arc a;
        a.constraint = c;
        a.side = side;
        a.entry = s.times[first];
        a.exit = s.times[last];
        a.touch = first == last;
        int d_first = -1, d_last = -1;
        for (int j = first; j <= last; ++j) {
          const int d = s.domain[static_cast<size_t>(j)];
          if (!domain_has(solution.domains[static_cast<size_t>(d)], c, side)) continue;
          if (d_first < 0) d_first = d;
          d_last = d;
        }
        if (d_first >= 0) {
          // Optimized interface times of the constrained domains replace the sample times.
          a.existing = true;
          a.touch = false;
          a.entry = solution.domains[static_cast<size_t>(d_first)].t_start;
          a.exit = solution.domains[static_cast<size_t>(d_last)].t_end;
          first = index_of(a.entry);
          last = index_of(a.exit);
        }
        std::tie(a.entry_lower, a.entry_upper) =
            bound_switch_time(neighbor(first - 1), a.entry, neighbor(first + 1), pc.bound_width);
        std::tie(a.exit_lower, a.exit_upper) =
            bound_switch_time(neighbor(last - 1), a.exit, neighbor(last + 1), pc.bound_width);
        report.arcs.push_back(a);
      }
    }
  }
  std::sort(report.arcs.begin(), report.arcs.end(), [](const Arc& a, const Arc& b) {
    return a.entry < b.entry || (a.entry == b.entry && a.constraint < b.constraint);
  });
  return report;
}

namespace {

struct Piece {
  double a, b;
  int degree;
};

/// Intervals of the layout's meshes placed on the solution's domain times.
std::vector<Piece> physical_intervals(const DomainLayout& layout, const TrajectorySolution& s) {
  if (layout.domains.size() != s.domains.size())
    throw Error(ErrorCode::InvalidLayout, "layout and solution have different domain counts");
  std::vector<Piece> out;
  for (std::size_t di = 0; di < s.domains.size(); ++di) {
    const auto& d = s.domains[di];
    const Mesh& mesh = layout.domains[di].mesh;
    const double half = (d.t_end - d.t_start) / 2.0;
    for (int k = 0; k < mesh.intervals(); ++k)
      out.push_back({d.t_start + (mesh.breakpoints[static_cast<size_t>(k)] + 1.0) * half,
                     d.t_start + (mesh.breakpoints[static_cast<size_t>(k) + 1] + 1.0) * half,
                     mesh.degrees[static_cast<size_t>(k)]});
  }
  return out;
}

/// Mesh on [a, b] made of the clipped source intervals; slivers below a quarter of
/// their source interval are absorbed by a neighbor.
Mesh carry_mesh(const std::vector<Piece>& source, double a, double b) {
  std::vector<Piece> clipped;
  for (const auto& p : source) {
    const double lo = std::max(p.a, a), hi = std::min(p.b, b);
    if (hi <= lo) continue;
    const bool sliver = (hi - lo) < 0.25 * (p.b - p.a);
    if (sliver && !clipped.empty()) {
      clipped.back().b = hi;
      continue;
    }
    clipped.push_back({lo, hi, p.degree});
  }
  // A leading sliver has no left neighbor; fold it into the next piece.
  if (clipped.size() > 1) {
    const Piece& f = clipped.front();
    const auto src = std::find_if(source.begin(), source.end(), [&](const Piece& p) { return p.b > f.a; });
    if (src != source.end() && (f.b - f.a) < 0.25 * (src->b - src->a)) {
      clipped[1].a = f.a;
      clipped.erase(clipped.begin());
    }
  }
  Mesh m;
  if (clipped.empty()) {
    int degree = source.empty() ? 4 : source.front().degree;
    for (const auto& p : source)
      if (p.a <= a && a < p.b) degree = p.degree;
    m.breakpoints = {-1.0, 1.0};
    m.degrees = {degree};
    return m;
  }
  m.breakpoints.push_back(-1.0);
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    m.degrees.push_back(clipped[i].degree);
    m.breakpoints.push_back(i + 1 == clipped.size() ? 1.0 : -1.0 + 2.0 * (clipped[i].b - a) / (b - a));
  }
  return m;
}

}  // namespace

DomainLayout decompose(const DomainLayout& previous, const TrajectorySolution& solution,
                       const ArcReport& report) {
  std::vector<Arc> arcs = report.finite_arcs();
  std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) { return x.entry < y.entry; });
  for (std::size_t i = 1; i < arcs.size(); ++i) {
    if (arcs[i].entry <= arcs[i - 1].exit) {
      if (arcs[i].constraint != arcs[i - 1].constraint)
        throw Error(ErrorCode::UnsupportedStructure,
                    "arcs of constraints " + std::to_string(arcs[i - 1].constraint) + " and " +
                        std::to_string(arcs[i].constraint) + " overlap in time");
      throw Error(ErrorCode::UnsupportedStructure, "overlapping arcs of one constraint");
    }
  }

  const double t0 = solution.t0(), tf = solution.tf();
  const std::vector<Piece> source = physical_intervals(previous, solution);

  struct Segment {
    double a, b;
    std::optional<ActiveConstraint> active;
    bool tangency = true;
  };
  std::vector<Segment> segments;
  std::vector<InterfaceTime> times;
  InterfaceTime first = previous.times.front();
  first.guess = t0;
  times.push_back(first);
  double cursor = t0;
  for (const Arc& arc : arcs) {
    if (arc.entry > cursor) {
      segments.push_back({cursor, arc.entry, std::nullopt, true});
      times.push_back({arc.entry_lower, arc.entry_upper, arc.entry});
    }
    const bool to_end = arc.exit >= tf;
    segments.push_back({arc.entry, to_end ? tf : arc.exit, ActiveConstraint{arc.constraint, arc.side},
                        arc.entry > t0});
    if (!to_end) times.push_back({arc.exit_lower, arc.exit_upper, arc.exit});
    cursor = to_end ? tf : arc.exit;
  }
  if (cursor < tf) segments.push_back({cursor, tf, std::nullopt, true});
  InterfaceTime last = previous.times.back();
  last.guess = tf;
  times.push_back(last);

  // Adjacent windows must leave room for every domain.
  for (std::size_t i = 1; i + 1 < times.size(); ++i) {
    InterfaceTime& t = times[i];
    const InterfaceTime& prev = times[i - 1];
    if (t.lower < prev.guess + kMinDomainDuration) t.lower = std::min(t.guess, prev.guess + kMinDomainDuration);
    InterfaceTime& next = times[i + 1];
    if (i + 2 < times.size() && t.upper > next.lower) {
      const double mid = 0.5 * (t.guess + next.guess);
      t.upper = std::max(t.guess, mid);
      next.lower = std::min(next.guess, mid);
    }
  }

  DomainLayout layout;
  layout.times = times;
  for (const Segment& seg : segments) {
    DomainSpec spec;
    spec.mesh = carry_mesh(source, seg.a, seg.b);
    if (seg.active) spec.active = {*seg.active};
    spec.tangency_at_entry = seg.tangency;
    layout.domains.push_back(spec);
  }
  layout.check();
  return layout;
}

namespace {

std::string side_name(const PathConstraint& pc, BoundSide side) {
  return pc.name + (side == BoundSide::Upper ? " = max" : " = min");
}

nlohmann::json arc_json(const Arc& a, const OcpDefinition& problem) {
  return {{"constraint", problem.path_constraints[static_cast<size_t>(a.constraint)].name},
          {"constraint_index", a.constraint},
          {"bound", to_string(a.side)},
          {"entry", a.entry},
          {"exit", a.exit},
          {"entry_window", {a.entry_lower, a.entry_upper}},
          {"exit_window", {a.exit_lower, a.exit_upper}},
          {"touch_point", a.touch},
          {"existing", a.existing}};
}

/// Columns: arcs of the final history row in time order; earlier rows are matched
/// to the column of the same constraint with the nearest midpoint.
std::vector<Arc> table_columns(const std::vector<IterationRecord>& history) {
  std::vector<Arc> cols;
  for (const auto& rec : history)
    for (const Arc& a : rec.arcs) {
      const auto near = std::find_if(cols.begin(), cols.end(), [&](const Arc& c) {
        return c.constraint == a.constraint && c.side == a.side && a.entry <= c.exit + 1e-9 &&
               c.entry <= a.exit + 1e-9;
      });
      if (near == cols.end())
        cols.push_back(a);
      else
        *near = a;
    }
  std::sort(cols.begin(), cols.end(), [](const Arc& x, const Arc& y) { return x.entry < y.entry; });
  return cols;
}

int match_column(const std::vector<Arc>& cols, const Arc& a, std::vector<bool>& used) {
  int best = -1;
  double gap = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (used[i] || cols[i].constraint != a.constraint || cols[i].side != a.side) continue;
    const double g = std::abs(0.5 * (cols[i].entry + cols[i].exit) - 0.5 * (a.entry + a.exit));
    if (best < 0 || g < gap) {
      best = static_cast<int>(i);
      gap = g;
    }
  }
  if (best >= 0) used[static_cast<size_t>(best)] = true;
  return best;
}

}  // namespace

std::string report_json(const ArcReport& report, const std::vector<IterationRecord>& history,
                        const OcpDefinition& problem) {
  nlohmann::json j;
  j["arcs"] = nlohmann::json::array();
  for (const Arc& a : report.arcs) j["arcs"].push_back(arc_json(a, problem));
  j["iterations"] = nlohmann::json::array();
  for (const auto& rec : history) {
    nlohmann::json r = {{"iteration", rec.iteration},
                        {"nlp_status", to_string(rec.status)},
                        {"nlp_iterations", rec.nlp_iterations},
                        {"objective", rec.objective},
                        {"max_mesh_error", rec.mesh_error},
                        {"max_constraint_error", rec.constraint_error},
                        {"domains", rec.domains},
                        {"intervals", rec.intervals},
                        {"collocation_points", rec.collocation_points},
                        {"wall_time", rec.wall_time},
                        {"action", rec.action}};
    r["optimized_arcs"] = nlohmann::json::array();
    for (const Arc& a : rec.arcs) r["optimized_arcs"].push_back(arc_json(a, problem));
    r["detected"] = nlohmann::json::array();
    for (const Arc& a : rec.detected) r["detected"].push_back(arc_json(a, problem));
    j["iterations"].push_back(r);
  }
  return j.dump(2);
}

std::string arc_table(const std::vector<IterationRecord>& history, const OcpDefinition& problem) {
  const std::vector<Arc> cols = table_columns(history);
  std::ostringstream out;
  char buf[64];
  out << "   M";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const auto& pc = problem.path_constraints[static_cast<size_t>(cols[i].constraint)];
    std::snprintf(buf, sizeof buf, " | arc %zu (%s)", i + 1, side_name(pc, cols[i].side).c_str());
    out << buf;
  }
  out << " | e_max\n    ";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    std::snprintf(buf, sizeof buf, " | %10s %10s", "entry [s]", "exit [s]");
    out << buf;
  }
  out << " |\n";
  for (const auto& rec : history) {
    std::snprintf(buf, sizeof buf, "%4d", rec.iteration);
    out << buf;
    std::vector<std::string> cells(cols.size(), "");
    std::vector<bool> used(cols.size(), false);
    for (const Arc& a : rec.arcs) {
      const int c = match_column(cols, a, used);
      if (c < 0) continue;
      std::snprintf(buf, sizeof buf, " | %10.2f %10.2f", a.entry, a.exit);
      cells[static_cast<size_t>(c)] = buf;
    }
    for (auto& cell : cells) {
      if (cell.empty()) {
        std::snprintf(buf, sizeof buf, " | %10s %10s", "--", "--");
        cell = buf;
      }
      out << cell;
    }
    std::snprintf(buf, sizeof buf, " | %.2e\n", rec.mesh_error);
    out << buf;
  }
  return out.str();
}

}  // namespace spoc
