#include "spoc/rlve.hpp"

#include "spoc/error.hpp"
#include "spoc/lgr.hpp"

#include <cmath>
#include <numbers>

namespace spoc::rlve {

double deg(double r) { return r * 180.0 / std::numbers::pi; }
double rad(double d) { return d * std::numbers::pi / 180.0; }

Aero atmosphere_and_aero(ConstSpan y, ConstSpan u, const VehicleParams& p) {
  Aero a;
  a.rho = p.rho0 * std::exp(-y[kH] / p.scale_height);
  a.q = 0.5 * a.rho * y[kV] * y[kV];
  const double alpha = u[kAlpha];
  a.cl = p.cl0 + p.cl1 * alpha;
  a.cd = p.cd0 + p.cd1 * alpha + p.cd2 * alpha * alpha;
  a.lift = a.q * p.area * a.cl / p.mass;
  a.drag = a.q * p.area * a.cd / p.mass;
  return a;
}

namespace {

struct Kinetics {
  double vdot, gdot, pdot;
};

Kinetics kinetics(ConstSpan y, ConstSpan u, const VehicleParams& p, bool rotating, const Aero& a) {
  const double r = p.earth_radius + y[kH];
  const double v = y[kV];
  const double gam = y[kGamma], phi = y[kPhi], psi = y[kPsi], sigma = u[kSigma];
  const double g = p.mu / (r * r);
  const double cg = std::cos(gam), sg = std::sin(gam);
  if (cg == 0.0) throw Error(ErrorCode::Singularity, "cos(gamma) = 0 in the azimuth rate");
  Kinetics k;
  k.vdot = -a.drag - g * sg;
  k.gdot = a.lift * std::cos(sigma) / v + cg * (v / r - g / v);
  k.pdot = a.lift * std::sin(sigma) / (v * cg) + v / r * cg * std::sin(psi) * std::tan(phi);
  if (rotating) {
    const double w = p.omega_e;
    const double cp = std::cos(phi), sp = std::sin(phi);
    const double cs = std::cos(psi), ss = std::sin(psi);
    k.vdot += r * w * w * cp * (sg * cp - cg * sp * cs);
    k.gdot += 2.0 * w * cp * ss + r * w * w / v * cp * (cg * cp + sg * sp * cs);
    k.pdot += -2.0 * w * (std::tan(gam) * cp * cs - sp) + r * w * w / (v * cg) * sp * cp * ss;
  }
  return k;
}

}  // namespace

void dynamics(ConstSpan y, ConstSpan u, const VehicleParams& p, bool rotating, OutSpan rates) {
  const Aero a = atmosphere_and_aero(y, u, p);
  const double r = p.earth_radius + y[kH];
  const double v = y[kV];
  const double cg = std::cos(y[kGamma]);
  const Kinetics k = kinetics(y, u, p, rotating, a);
  rates[kH] = v * std::sin(y[kGamma]);
  rates[kTheta] = v * cg * std::sin(y[kPsi]) / (r * std::cos(y[kPhi]));
  rates[kPhi] = v * cg * std::cos(y[kPsi]) / r;
  rates[kV] = k.vdot;
  rates[kGamma] = k.gdot;
  rates[kPsi] = k.pdot;
}

State dynamics(const State& y, const Control& u, const VehicleParams& p, bool rotating) {
  State out{};
  dynamics(y, u, p, rotating, out);
  return out;
}

ConstraintValues path_constraint_values(ConstSpan y, ConstSpan u, const VehicleParams& p) {
  const Aero a = atmosphere_and_aero(y, u, p);
  ConstraintValues c;
  const double v = y[kV];
  c.heat_rate = p.heat_k * std::sqrt(a.rho / p.nose_radius) * v * v * v;
  c.dynamic_pressure = a.q;
  c.load_factor = std::sqrt(a.lift * a.lift + a.drag * a.drag) / p.g0;
  c.alpha = u[kAlpha];
  c.sigma = u[kSigma];
  return c;
}

ConstraintRates constraint_time_derivatives(ConstSpan y, ConstSpan u, const VehicleParams& p,
                                            bool rotating) {
  const double v = y[kV];
  if (v == 0.0) throw Error(ErrorCode::Singularity, "zero speed in constraint derivative");
  const Aero a = atmosphere_and_aero(y, u, p);
  const Kinetics k = kinetics(y, u, p, rotating, a);
  const double hdot = v * std::sin(y[kGamma]);
  const double heat = p.heat_k * std::sqrt(a.rho / p.nose_radius) * v * v * v;
  ConstraintRates d;
  d.heat_rate = heat * (3.0 * k.vdot / v - hdot / (2.0 * p.scale_height));
  d.dynamic_pressure = a.q * (2.0 * k.vdot / v - hdot / p.scale_height);
  return d;
}

StudyConfig preset(const std::string& study) {
  StudyConfig c;
  c.name = study;
  if (study == "case1") return c;
  if (study == "case2") {
    c.control_limits = true;
    return c;
  }
  if (study == "rotating") {
    c.rotating = true;
    return c;
  }
  throw Error(ErrorCode::Config, "unknown study '" + study + "'");
}

OcpDefinition build_study(const StudyConfig& cfg) {
  if (!(cfg.heat_rate_max > 0.0) || !(cfg.dynamic_pressure_max > 0.0) || !(cfg.load_factor_max > 0.0))
    throw Error(ErrorCode::Config, "path constraint limits must be positive");
  const VehicleParams p = cfg.params;
  const bool rot = cfg.rotating;

  OcpDefinition o;
  o.name = cfg.name;
  o.n_y = kNumStates;
  o.n_u = kNumControls;
  o.state_names = {"h", "theta", "phi", "v", "gamma", "psi"};
  o.control_names = {"alpha", "sigma"};
  o.dynamics = [p, rot](ConstSpan y, ConstSpan u, double, OutSpan dy) { dynamics(y, u, p, rot, dy); };
  o.mayer_cost = [](ConstSpan, double, ConstSpan yf, double) { return -yf[kPhi]; };

  o.state_bounds.lower.resize(kNumStates);
  o.state_bounds.upper.resize(kNumStates);
  o.state_bounds.lower << 0.0, rad(-180.0), rad(-89.0), 100.0, rad(-80.0), rad(-180.0);
  o.state_bounds.upper << 120e3, rad(360.0), rad(89.0), 9000.0, rad(80.0), rad(540.0);
  o.control_bounds.lower.resize(kNumControls);
  o.control_bounds.upper.resize(kNumControls);
  o.control_bounds.lower << rad(cfg.alpha_box_deg[0]), rad(cfg.sigma_box_deg[0]);
  o.control_bounds.upper << rad(cfg.alpha_box_deg[1]), rad(cfg.sigma_box_deg[1]);

  o.initial_state = o.state_bounds;
  o.initial_state.lower << cfg.h0, rad(cfg.theta0_deg), rad(cfg.phi0_deg), cfg.v0, rad(cfg.gamma0_deg),
      rad(cfg.psi0_deg);
  o.initial_state.upper = o.initial_state.lower;
  o.final_state = o.state_bounds;
  o.final_state.lower[kH] = o.final_state.upper[kH] = cfg.hf;
  o.final_state.lower[kV] = o.final_state.upper[kV] = cfg.vf;
  o.final_state.lower[kGamma] = o.final_state.upper[kGamma] = rad(cfg.gammaf_deg);
  o.t0_lower = o.t0_upper = 0.0;
  o.tf_lower = cfg.tf_min;
  o.tf_upper = cfg.tf_max;

  PathConstraint heat;
  heat.name = "heat_rate";
  heat.kind = ConstraintKind::StateOnly;
  heat.evaluate = [p](ConstSpan y, ConstSpan u, double) { return path_constraint_values(y, u, p).heat_rate; };
  heat.upper = cfg.heat_rate_max;
  heat.order = 1;
  heat.time_derivatives = {[p, rot](ConstSpan y, ConstSpan u, double) {
    return constraint_time_derivatives(y, u, p, rot).heat_rate;
  }};
  heat.detection_tolerance = cfg.heat_rate_tolerance;
  heat.bound_width = cfg.heat_rate_width;
  heat.scale = cfg.heat_rate_max;

  PathConstraint dyn;
  dyn.name = "dynamic_pressure";
  dyn.kind = ConstraintKind::StateOnly;
  dyn.evaluate = [p](ConstSpan y, ConstSpan u, double) {
    return path_constraint_values(y, u, p).dynamic_pressure;
  };
  dyn.upper = cfg.dynamic_pressure_max;
  dyn.order = 1;
  dyn.time_derivatives = {[p, rot](ConstSpan y, ConstSpan u, double) {
    return constraint_time_derivatives(y, u, p, rot).dynamic_pressure;
  }};
  dyn.detection_tolerance = cfg.dynamic_pressure_tolerance;
  dyn.bound_width = cfg.dynamic_pressure_width;
  dyn.scale = cfg.dynamic_pressure_max;

  PathConstraint load;
  load.name = "load_factor";
  load.kind = ConstraintKind::Mixed;
  load.evaluate = [p](ConstSpan y, ConstSpan u, double) { return path_constraint_values(y, u, p).load_factor; };
  load.upper = cfg.load_factor_max;

  PathConstraint bank;
  bank.name = "bank_angle";
  bank.kind = ConstraintKind::ControlOnly;
  bank.evaluate = [](ConstSpan, ConstSpan u, double) { return u[kSigma]; };
  bank.lower = cfg.control_limits ? rad(cfg.sigma_min_deg) : -kInf;
  bank.control_component = kSigma;

  PathConstraint aoa;
  aoa.name = "angle_of_attack";
  aoa.kind = ConstraintKind::ControlOnly;
  aoa.evaluate = [](ConstSpan, ConstSpan u, double) { return u[kAlpha]; };
  aoa.upper = cfg.control_limits ? rad(cfg.alpha_max_deg) : kInf;
  aoa.control_component = kAlpha;

  o.path_constraints = {heat, dyn, load, bank, aoa};
  o.scaling = Scaling::from_bounds(o.state_bounds, o.control_bounds, o.t0_lower, o.tf_upper);
  return o;
}

double max_lift_to_drag_alpha(const VehicleParams& p) {
  // d/da (C_L / C_D) = 0 reduces to a quadratic in alpha.
  const double a = p.cl1 * p.cd2;
  const double b = 2.0 * p.cl0 * p.cd2;
  const double c = p.cl0 * p.cd1 - p.cl1 * p.cd0;
  return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

TrajectorySolution initial_guess(const StudyConfig& cfg) {
  Eigen::VectorXd y0(kNumStates), yf(kNumStates);
  y0 << cfg.h0, rad(cfg.theta0_deg), rad(cfg.phi0_deg), cfg.v0, rad(cfg.gamma0_deg), rad(cfg.psi0_deg);
  yf = y0;
  yf[kH] = cfg.hf;
  yf[kV] = cfg.vf;
  yf[kGamma] = rad(cfg.gammaf_deg);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(kNumControls);
  u[kAlpha] = max_lift_to_drag_alpha(cfg.params);
  return straight_line_guess(y0, yf, u, 0.0, cfg.tf_guess);
}

DerivedQuantities derived_quantities(const TrajectorySolution& s, const VehicleParams& p, bool rotating) {
  DerivedQuantities d;
  const Eigen::VectorXd yf = s.final_state();
  d.final_time = s.tf();
  d.crossrange_deg = deg(yf[kPhi]);
  d.downrange_deg = deg(yf[kTheta]);
  d.inertial_longitude_deg = deg(yf[kTheta] + (rotating ? p.omega_e : 0.0) * (s.tf() - s.t0()));
  for (const auto& dom : s.domains) {
    const double half = (dom.t_end - dom.t_start) / 2.0;
    int off = 0;
    for (int k = 0; k < dom.mesh.intervals(); ++k) {
      const int n = dom.mesh.degrees[static_cast<size_t>(k)];
      const lgr::LgrRule rule = lgr::lgr_points(n);
      const double dtau = dom.mesh.breakpoints[static_cast<size_t>(k) + 1] - dom.mesh.breakpoints[static_cast<size_t>(k)];
      for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd y = dom.states.row(off + i).transpose();
        const Eigen::VectorXd u = dom.controls.row(off + i).transpose();
        const double heat = path_constraint_values({y.data(), kNumStates}, {u.data(), kNumControls}, p).heat_rate;
        d.heating_load += half * dtau / 2.0 * rule.weights[i] * heat;
      }
      off += n;
    }
  }
  return d;
}

}  // namespace spoc::rlve
