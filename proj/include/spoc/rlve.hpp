#pragma once

/**
 * @file
 * @brief Reusable launch vehicle entry benchmark: point-mass dynamics over a
 * spherical (optionally rotating) Earth, exponential atmosphere, quadratic
 * aerodynamics and the heating-rate / dynamic-pressure / load-factor limits.
 *
 * State  y = (h, theta, phi, v, gamma, psi) in m, rad, rad, m/s, rad, rad.
 * Control u = (alpha, sigma) in rad.
 */

#include "spoc/ocp.hpp"
#include "spoc/solution.hpp"

#include <array>
#include <string>

namespace spoc::rlve {

enum StateIndex { kH = 0, kTheta, kPhi, kV, kGamma, kPsi };
enum ControlIndex { kAlpha = 0, kSigma };
enum ConstraintIndex { kHeatRate = 0, kDynamicPressure, kLoadFactor, kBankLimit, kAlphaLimit };

inline constexpr int kNumStates = 6;
inline constexpr int kNumControls = 2;

struct VehicleParams {
  double earth_radius = 6371.2039e3;    // m
  double scale_height = 7254.24;        // m
  double rho0 = 1.2256;                 // kg/m^3
  double mu = 3.986031954e5 * 1e9;      // m^3/s^2
  double omega_e = 7.292115856e-5;      // rad/s
  double g0 = 9.8066498;                // m/s^2
  double mass = 92079.2525;             // kg
  double area = 249.9092;               // m^2
  double heat_k = 1.7415e-4;            // kg^(1/2)/m^2
  double nose_radius = 1.0;             // m
  double cl0 = -0.2070;
  double cl1 = 1.6756;
  double cd0 = 0.0785;
  double cd1 = -0.3529;
  double cd2 = 2.0400;
};

struct Aero {
  double rho = 0.0;
  double q = 0.0;  // dynamic pressure, Pa
  double lift = 0.0;  // specific force, m/s^2
  double drag = 0.0;
  double cl = 0.0;
  double cd = 0.0;
};

struct ConstraintValues {
  double heat_rate = 0.0;  // W/m^2
  double dynamic_pressure = 0.0;  // Pa
  double load_factor = 0.0;
  double alpha = 0.0;
  double sigma = 0.0;
};

using State = std::array<double, kNumStates>;
using Control = std::array<double, kNumControls>;

Aero atmosphere_and_aero(ConstSpan y, ConstSpan u, const VehicleParams& p);

/// Writes the six state rates. Throws Error(Singularity) when cos(gamma) == 0.
void dynamics(ConstSpan y, ConstSpan u, const VehicleParams& p, bool rotating, OutSpan rates);
State dynamics(const State& y, const Control& u, const VehicleParams& p, bool rotating);

ConstraintValues path_constraint_values(ConstSpan y, ConstSpan u, const VehicleParams& p);

struct ConstraintRates {
  double heat_rate = 0.0;  // W/m^2/s
  double dynamic_pressure = 0.0;  // Pa/s
};

/// First time derivatives with the dynamics substituted. Throws Error(Singularity) when v == 0.
ConstraintRates constraint_time_derivatives(ConstSpan y, ConstSpan u, const VehicleParams& p,
                                            bool rotating);

struct StudyConfig {
  std::string name = "case1";
  bool rotating = false;
  bool control_limits = false;
  double heat_rate_max = 0.85e6;  // W/m^2
  double dynamic_pressure_max = 12.53e3;  // Pa
  double load_factor_max = 1.15;
  double sigma_min_deg = -75.0;
  double alpha_max_deg = 19.0;
  /// Search box for the controls, separate from the limits above. The sigma box keeps
  /// the lift vector upright; with an unbounded bank the negative-alpha inverted branch
  /// (L/D near 2.9 against 1.9 upright) dominates.
  std::array<double, 2> alpha_box_deg{-90.0, 90.0};
  std::array<double, 2> sigma_box_deg{-120.0, 1.0};

  double h0 = 79.248e3, hf = 24.384e3;
  double theta0_deg = 0.0, phi0_deg = 0.0;
  double v0 = 7802.88, vf = 762.0;
  double gamma0_deg = -1.0, gammaf_deg = -5.0;
  double psi0_deg = 90.0;

  double tf_guess = 2000.0;
  double tf_min = 500.0, tf_max = 4000.0;

  double heat_rate_tolerance = 1e-5;
  double heat_rate_width = 0.5;
  double dynamic_pressure_tolerance = 1e-4;
  double dynamic_pressure_width = 1.0;

  VehicleParams params;
};

/// Named presets: case1, case2, rotating.
StudyConfig preset(const std::string& study);

OcpDefinition build_study(const StudyConfig& config);

/// Angle of attack maximizing C_L / C_D (positive root), rad.
double max_lift_to_drag_alpha(const VehicleParams& p);

/// Straight line between the doubly specified boundary values, constants elsewhere.
/// Controls: alpha at maximum L/D, zero bank. A zero alpha has negative lift.
TrajectorySolution initial_guess(const StudyConfig& config);

struct DerivedQuantities {
  double final_time = 0.0;
  double crossrange_deg = 0.0;  // phi(tf)
  double downrange_deg = 0.0;   // theta(tf)
  double inertial_longitude_deg = 0.0;
  double heating_load = 0.0;    // J/m^2, LGR quadrature of the heating rate
};

DerivedQuantities derived_quantities(const TrajectorySolution& solution, const VehicleParams& p,
                                     bool rotating);

double deg(double rad);
double rad(double deg);

}  // namespace spoc::rlve
