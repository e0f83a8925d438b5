#include "spoc/solution.hpp"

#include "spoc/error.hpp"
#include "spoc/lgr.hpp"

#include <algorithm>
#include <cmath>

namespace spoc {

Mesh Mesh::uniform(int intervals, int degree) {
  if (intervals < 1) throw Error(ErrorCode::InvalidLayout, "mesh needs at least one interval");
  if (degree < 1 || degree > lgr::kMaxDegree)
    throw Error(ErrorCode::InvalidDegree, "mesh degree " + std::to_string(degree));
  Mesh m;
  m.degrees.assign(static_cast<size_t>(intervals), degree);
  m.breakpoints.resize(static_cast<size_t>(intervals) + 1);
  for (int k = 0; k <= intervals; ++k) m.breakpoints[static_cast<size_t>(k)] = -1.0 + 2.0 * k / intervals;
  m.breakpoints.back() = 1.0;
  return m;
}

int Mesh::collocation_points() const {
  int n = 0;
  for (int d : degrees) n += d;
  return n;
}

void DomainLayout::check() const {
  if (domains.empty()) throw Error(ErrorCode::InvalidLayout, "layout has no domains");
  if (times.size() != domains.size() + 1)
    throw Error(ErrorCode::InvalidLayout, "layout needs one interface time per domain boundary");
  for (std::size_t d = 0; d < domains.size(); ++d) {
    const Mesh& m = domains[d].mesh;
    const std::string label = "domain " + std::to_string(d);
    if (m.degrees.empty()) throw Error(ErrorCode::InvalidLayout, label + " has zero intervals");
    if (m.breakpoints.size() != m.degrees.size() + 1)
      throw Error(ErrorCode::InvalidLayout, label + " breakpoint count mismatch");
    if (m.breakpoints.front() != -1.0 || m.breakpoints.back() != 1.0)
      throw Error(ErrorCode::InvalidLayout, label + " mesh does not span [-1, 1]");
    for (std::size_t k = 0; k + 1 < m.breakpoints.size(); ++k)
      if (!(m.breakpoints[k] < m.breakpoints[k + 1]))
        throw Error(ErrorCode::InvalidLayout, label + " breakpoints not increasing");
    for (int n : m.degrees)
      if (n < 1 || n > lgr::kMaxDegree)
        throw Error(ErrorCode::InvalidDegree, label + " has degree " + std::to_string(n));
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& t = times[i];
    if (t.lower > t.upper)
      throw Error(ErrorCode::InvalidLayout, "interface time " + std::to_string(i) + " has inverted bounds");
    if (i > 0 && times[i - 1].lower >= t.upper)
      throw Error(ErrorCode::InvalidLayout,
                  "interface windows " + std::to_string(i - 1) + " and " + std::to_string(i) +
                      " permit a collapsed domain");
  }
}

DomainLayout DomainLayout::single(const Mesh& mesh, InterfaceTime t0, InterfaceTime tf) {
  DomainLayout l;
  l.domains.push_back({mesh, {}, true});
  l.times = {t0, tf};
  return l;
}

int DomainSolution::interval_offset(int k) const {
  int off = 0;
  for (int j = 0; j < k; ++j) off += mesh.degrees[static_cast<size_t>(j)];
  return off;
}

int DomainSolution::locate(double t) const {
  int off = 0;
  const int last = mesh.intervals() - 1;
  for (int k = 0; k < last; ++k) {
    off += mesh.degrees[static_cast<size_t>(k)];
    if (t < times[off]) return k;
  }
  return last;
}

Eigen::VectorXd DomainSolution::state_at(double t) const {
  const int k = locate(t);
  const int off = interval_offset(k);
  const int n = mesh.degrees[static_cast<size_t>(k)];
  return lgr::interpolate({times.data() + off, static_cast<size_t>(n + 1)},
                          states.middleRows(off, n + 1), t)
      .value;
}

Eigen::VectorXd DomainSolution::control_at(double t) const {
  const int k = locate(t);
  const int off = interval_offset(k);
  const int n = mesh.degrees[static_cast<size_t>(k)];
  if (controls.cols() == 0) return Eigen::VectorXd();
  if (n == 1) return controls.row(off).transpose();
  return lgr::interpolate({times.data() + off, static_cast<size_t>(n)}, controls.middleRows(off, n), t)
      .value;
}

std::vector<Arc> ArcReport::arcs_of(int constraint) const {
  std::vector<Arc> out;
  for (const auto& a : arcs)
    if (a.constraint == constraint) out.push_back(a);
  return out;
}

std::vector<Arc> ArcReport::finite_arcs() const {
  std::vector<Arc> out;
  for (const auto& a : arcs)
    if (!a.touch) out.push_back(a);
  return out;
}

std::vector<Arc> ArcReport::touch_points() const {
  std::vector<Arc> out;
  for (const auto& a : arcs)
    if (a.touch) out.push_back(a);
  return out;
}

const Eigen::VectorXd TrajectorySolution::initial_state() const {
  return domains.front().states.row(0).transpose();
}

const Eigen::VectorXd TrajectorySolution::final_state() const {
  const auto& d = domains.back();
  return d.states.row(d.states.rows() - 1).transpose();
}

int TrajectorySolution::locate(double t) const {
  for (std::size_t d = 0; d + 1 < domains.size(); ++d)
    if (t < domains[d].t_end) return static_cast<int>(d);
  return static_cast<int>(domains.size()) - 1;
}

Eigen::VectorXd TrajectorySolution::state_at(double t) const {
  return domains[static_cast<size_t>(locate(t))].state_at(t);
}

Eigen::VectorXd TrajectorySolution::control_at(double t) const {
  return domains[static_cast<size_t>(locate(t))].control_at(t);
}

std::vector<Arc> TrajectorySolution::constrained_arcs() const {
  std::vector<Arc> out;
  for (const auto& d : domains) {
    for (const auto& ac : d.active) {
      auto it = std::find_if(out.begin(), out.end(), [&](const Arc& a) {
        return a.constraint == ac.index && a.side == ac.side && a.exit == d.t_start;
      });
      if (it != out.end()) {
        it->exit = d.t_end;
        continue;
      }
      Arc a;
      a.constraint = ac.index;
      a.side = ac.side;
      a.entry = d.t_start;
      a.exit = d.t_end;
      a.existing = true;
      out.push_back(a);
    }
  }
  std::sort(out.begin(), out.end(), [](const Arc& a, const Arc& b) {
    return a.entry < b.entry || (a.entry == b.entry && a.constraint < b.constraint);
  });
  return out;
}

TrajectorySolution straight_line_guess(const Eigen::VectorXd& y0, const Eigen::VectorXd& yf,
                                       const Eigen::VectorXd& u, double t0, double tf) {
  TrajectorySolution s;
  DomainSolution d;
  d.t_start = t0;
  d.t_end = tf;
  d.mesh = Mesh::uniform(1, 1);
  d.times.resize(2);
  d.times << t0, tf;
  d.states.resize(2, y0.size());
  d.states.row(0) = y0.transpose();
  d.states.row(1) = yf.transpose();
  d.controls = u.transpose();
  s.domains.push_back(d);
  return s;
}

}  // namespace spoc
