#include "spoc/error.hpp"
#include "spoc/rlve.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace {

using namespace spoc;
using namespace spoc::rlve;

const VehicleParams kParams{};

State entry_state() { return {79.248e3, 0.0, 0.0, 7802.88, rad(-1.0), rad(90.0)}; }

/// Random point inside the flight envelope of the studies.
struct Sample {
  State y;
  Control u;
};

Sample random_sample(std::mt19937_64& rng) {
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  Sample s;
  s.y = {uni(25e3, 80e3), rad(uni(0, 100)), rad(uni(-60, 60)), uni(800, 7800), rad(uni(-10, 5)), rad(uni(0, 180))};
  s.u = {rad(uni(0, 40)), rad(uni(-90, 0))};
  return s;
}

double heat_rate(const State& y, const Control& u) { return path_constraint_values(y, u, kParams).heat_rate; }
double dyn_pressure(const State& y, const Control& u) { return path_constraint_values(y, u, kParams).dynamic_pressure; }

/// d/dt of f along the flow by a Richardson-extrapolated central difference.
template <class F>
double along_flow(F f, const State& y, const Control& u, bool rotating) {
  const State rate = dynamics(y, u, kParams, rotating);
  auto at = [&](double dt) {
    State z = y;
    for (int i = 0; i < kNumStates; ++i) z[static_cast<size_t>(i)] += dt * rate[static_cast<size_t>(i)];
    return f(z, u);
  };
  auto central = [&](double dt) { return (at(dt) - at(-dt)) / (2 * dt); };
  const double h = 0.05;
  return (4 * central(h / 2) - central(h)) / 3;
}

TEST(RlveDynamics, VerticalFlightHasNoGroundTrack) {
  State y = entry_state();
  y[kGamma] = rad(-90.0);
  for (double psi : {0.0, 40.0, 123.0}) {
    y[kPsi] = rad(psi);
    const State r = dynamics(y, Control{0.3, 0.0}, kParams, false);
    EXPECT_NEAR(r[kTheta], 0.0, 1e-15);
    EXPECT_NEAR(r[kPhi], 0.0, 1e-15);
  }
}

TEST(RlveDynamics, EntryAltitudeRate) {
  const State r = dynamics(entry_state(), Control{0.3, 0.0}, kParams, false);
  EXPECT_NEAR(r[kH], 7802.88 * std::sin(-std::numbers::pi / 180.0), 1e-12);
  EXPECT_NEAR(r[kH], -136.18, 5e-3);
}

TEST(RlveDynamics, ZeroRotationRateMatchesNonrotating) {
  VehicleParams still = kParams;
  still.omega_e = 0.0;
  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const Sample s = random_sample(rng);
    const State a = dynamics(s.y, s.u, still, true);
    const State b = dynamics(s.y, s.u, still, false);
    for (int i = 0; i < kNumStates; ++i)
      EXPECT_LE(std::abs(a[static_cast<size_t>(i)] - b[static_cast<size_t>(i)]), 1e-14 * (1 + std::abs(b[static_cast<size_t>(i)])));
  }
}

TEST(RlveDynamics, RotationChangesOnlyKinetics) {
  std::mt19937_64 rng(2);
  const Sample s = random_sample(rng);
  const State a = dynamics(s.y, s.u, kParams, true);
  const State b = dynamics(s.y, s.u, kParams, false);
  EXPECT_EQ(a[kH], b[kH]);
  EXPECT_EQ(a[kTheta], b[kTheta]);
  EXPECT_EQ(a[kPhi], b[kPhi]);
  EXPECT_NE(a[kV], b[kV]);
  EXPECT_NE(a[kGamma], b[kGamma]);
  EXPECT_NE(a[kPsi], b[kPsi]);
}

TEST(RlveDynamics, MirrorSymmetry) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const Sample s = random_sample(rng);
    State m = s.y;
    m[kPhi] = -s.y[kPhi];
    m[kPsi] = std::numbers::pi - s.y[kPsi];
    const Control mu = {s.u[kAlpha], -s.u[kSigma]};
    const State a = dynamics(s.y, s.u, kParams, false);
    const State b = dynamics(m, mu, kParams, false);
    const double tol = 1e-12;
    EXPECT_NEAR(b[kH], a[kH], tol * std::abs(a[kH]) + 1e-15);
    EXPECT_NEAR(b[kTheta], a[kTheta], tol * std::abs(a[kTheta]) + 1e-18);
    EXPECT_NEAR(b[kPhi], -a[kPhi], tol * std::abs(a[kPhi]) + 1e-18);
    EXPECT_NEAR(b[kV], a[kV], tol * std::abs(a[kV]) + 1e-15);
    EXPECT_NEAR(b[kGamma], a[kGamma], tol * std::abs(a[kGamma]) + 1e-18);
    EXPECT_NEAR(b[kPsi], -a[kPsi], tol * std::abs(a[kPsi]) + 1e-18);
  }
}

TEST(RlveDynamics, DragDissipatesEnergy) {
  // E = v^2/2 - mu/r, so dE/dt = -v D without rotation.
  std::mt19937_64 rng(4);
  for (int k = 0; k < 500; ++k) {
    const Sample s = random_sample(rng);
    const State rate = dynamics(s.y, s.u, kParams, false);
    const double r = kParams.earth_radius + s.y[kH];
    const double edot = s.y[kV] * rate[kV] + kParams.mu / (r * r) * rate[kH];
    const double drag = atmosphere_and_aero(s.y, s.u, kParams).drag;
    EXPECT_NEAR(edot, -s.y[kV] * drag, 1e-9 * (1 + s.y[kV] * drag));
    EXPECT_LE(edot, 0.0);
  }
}

TEST(RlveAero, SeaLevelDensity) {
  State y = entry_state();
  y[kH] = 0.0;
  EXPECT_EQ(atmosphere_and_aero(y, Control{0.0, 0.0}, kParams).rho, 1.2256);
}

TEST(RlveAero, DensityAt50km) {
  State y = entry_state();
  y[kH] = 50e3;
  EXPECT_NEAR(atmosphere_and_aero(y, Control{0.0, 0.0}, kParams).rho, 1.2256 * std::exp(-50000.0 / 7254.24), 1e-18);
}

TEST(RlveAero, ZeroLiftAngle) {
  const Aero a = atmosphere_and_aero(entry_state(), Control{0.2070 / 1.6756, 0.0}, kParams);
  EXPECT_NEAR(a.cl, 0.0, 1e-16);
  EXPECT_NEAR(a.lift, 0.0, 1e-14);
  EXPECT_GT(a.drag, 0.0);
}

TEST(RlveAero, ForcesAreSpecific) {
  const Aero a = atmosphere_and_aero(entry_state(), Control{0.3, 0.0}, kParams);
  EXPECT_NEAR(a.lift, a.q * kParams.area * a.cl / kParams.mass, 1e-15 * a.lift);
  EXPECT_NEAR(a.q, 0.5 * a.rho * 7802.88 * 7802.88, 1e-12 * a.q);
}

TEST(RlveConstraints, ZeroSpeed) {
  State y = entry_state();
  y[kV] = 0.0;
  const auto c = path_constraint_values(y, Control{0.3, 0.0}, kParams);
  EXPECT_EQ(c.heat_rate, 0.0);
  EXPECT_EQ(c.dynamic_pressure, 0.0);
}

TEST(RlveConstraints, VanishingDensity) {
  State y = entry_state();
  y[kH] = 1e7;
  const auto c = path_constraint_values(y, Control{0.3, 0.0}, kParams);
  EXPECT_LT(c.heat_rate, 1e-200);
  EXPECT_LT(c.dynamic_pressure, 1e-200);
  EXPECT_LT(c.load_factor, 1e-200);
}

TEST(RlveConstraints, HeatRateFormula) {
  State y = entry_state();
  y[kH] = 60e3;
  y[kV] = 7000.0;
  const double rho = 1.2256 * std::exp(-60000.0 / 7254.24);
  const double expected = 1.7415e-4 * std::sqrt(rho / 1.0) * 7000.0 * 7000.0 * 7000.0;
  EXPECT_NEAR(path_constraint_values(y, Control{0.3, 0.0}, kParams).heat_rate, expected, 1e-12 * expected);
}

TEST(RlveConstraints, LoadFactorUsesSpecificForces) {
  const Control u = {0.3, 0.0};
  const Aero a = atmosphere_and_aero(entry_state(), u, kParams);
  EXPECT_NEAR(path_constraint_values(entry_state(), u, kParams).load_factor,
              std::hypot(a.lift, a.drag) / 9.8066498, 1e-15);
}

TEST(RlveDerivatives, LevelFlightReducesToSpeedTerm) {
  State y = entry_state();
  y[kGamma] = 0.0;
  const Control u = {0.3, 0.0};
  const double vdot = dynamics(y, u, kParams, false)[kV];
  const auto d = constraint_time_derivatives(y, u, kParams, false);
  EXPECT_NEAR(d.heat_rate, 3 * heat_rate(y, u) * vdot / y[kV], 1e-12 * std::abs(d.heat_rate));
  EXPECT_NEAR(d.dynamic_pressure, 2 * dyn_pressure(y, u) * vdot / y[kV], 1e-12 * std::abs(d.dynamic_pressure));
}

TEST(RlveDerivatives, ZeroSpeedIsSingular) {
  State y = entry_state();
  y[kV] = 0.0;
  try {
    (void)constraint_time_derivatives(y, Control{0.3, 0.0}, kParams, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Singularity);
  }
}

TEST(RlveDerivatives, ChainRuleAt1000Points) {
  for (bool rotating : {false, true}) {
    std::mt19937_64 rng(rotating ? 11 : 10);
    double worst_heat = 0.0, worst_q = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Sample s = random_sample(rng);
      const auto d = constraint_time_derivatives(s.y, s.u, kParams, rotating);
      const double fd_heat = along_flow(heat_rate, s.y, s.u, rotating);
      const double fd_q = along_flow(dyn_pressure, s.y, s.u, rotating);
      worst_heat = std::max(worst_heat, std::abs(fd_heat - d.heat_rate) / std::abs(d.heat_rate));
      worst_q = std::max(worst_q, std::abs(fd_q - d.dynamic_pressure) / std::abs(d.dynamic_pressure));
    }
    EXPECT_LE(worst_heat, 1e-6) << "rotating=" << rotating;
    EXPECT_LE(worst_q, 1e-6) << "rotating=" << rotating;
  }
}

TEST(RlveDerivatives, FirstOrderInAlpha) {
  std::mt19937_64 rng(12);
  const Sample s = random_sample(rng);
  const double h = 1e-6;
  Control up = s.u, dn = s.u;
  up[kAlpha] += h;
  dn[kAlpha] -= h;
  const auto a = constraint_time_derivatives(s.y, up, kParams, false);
  const auto b = constraint_time_derivatives(s.y, dn, kParams, false);
  EXPECT_GT(std::abs(a.heat_rate - b.heat_rate) / (2 * h), 1e-3);
  EXPECT_GT(std::abs(a.dynamic_pressure - b.dynamic_pressure) / (2 * h), 1e-3);
}

TEST(RlveStudies, Case1HasNoControlLimits) {
  const auto p = build_study(preset("case1"));
  ASSERT_EQ(p.path_constraints.size(), 5u);
  EXPECT_EQ(p.path_constraints[kBankLimit].lower, -kInf);
  EXPECT_EQ(p.path_constraints[kAlphaLimit].upper, kInf);
  EXPECT_EQ(p.path_constraints[kHeatRate].upper, 0.85e6);
  EXPECT_EQ(p.path_constraints[kDynamicPressure].upper, 12.53e3);
  EXPECT_EQ(p.path_constraints[kLoadFactor].upper, 1.15);
  EXPECT_EQ(p.path_constraints[kHeatRate].order, 1);
  EXPECT_EQ(p.path_constraints[kDynamicPressure].order, 1);
  EXPECT_EQ(p.path_constraints[kHeatRate].kind, ConstraintKind::StateOnly);
  EXPECT_EQ(p.path_constraints[kLoadFactor].kind, ConstraintKind::Mixed);
}

TEST(RlveStudies, Case2ControlLimits) {
  const auto p = build_study(preset("case2"));
  EXPECT_NEAR(p.path_constraints[kBankLimit].lower, rad(-75.0), 1e-15);
  EXPECT_NEAR(p.path_constraints[kAlphaLimit].upper, rad(19.0), 1e-15);
}

TEST(RlveStudies, BoundaryConditionsAndObjective) {
  const auto p = build_study(preset("case1"));
  EXPECT_EQ(p.initial_state.lower[kH], 79.248e3);
  EXPECT_EQ(p.initial_state.lower[kV], 7802.88);
  EXPECT_EQ(p.final_state.lower[kH], 24.384e3);
  EXPECT_EQ(p.final_state.upper[kV], 762.0);
  EXPECT_NEAR(p.final_state.lower[kGamma], rad(-5.0), 1e-16);
  EXPECT_LT(p.final_state.lower[kPhi], p.final_state.upper[kPhi]);
  const State yf = {24.384e3, 1.0, 0.5, 762.0, rad(-5.0), 0.0};
  EXPECT_EQ(p.mayer_cost({}, 0.0, yf, 2000.0), -0.5);
}

TEST(RlveStudies, SweepLimits) {
  for (double q : {0.85, 0.80, 0.75, 0.70}) {
    StudyConfig c = preset("rotating");
    c.heat_rate_max = q * 1e6;
    EXPECT_EQ(build_study(c).path_constraints[kHeatRate].upper, q * 1e6);
  }
}

TEST(RlveStudies, UnknownPreset) { EXPECT_THROW((void)preset("case9"), Error); }

TEST(RlveStudies, MaxLiftToDragAngle) {
  // Dense scan oracle on C_L / C_D over [0, 1] rad, then a local refinement.
  auto ld = [](double a) {
    return (kParams.cl0 + kParams.cl1 * a) / (kParams.cd0 + kParams.cd1 * a + kParams.cd2 * a * a);
  };
  double best = 0.0;
  for (double a = 0.0; a <= 1.0; a += 1e-5)
    if (ld(a) > ld(best)) best = a;
  EXPECT_NEAR(max_lift_to_drag_alpha(kParams), best, 2e-5);
}

TEST(RlveDerived, InertialLongitude) {
  Eigen::VectorXd y0(6), yf(6);
  y0 << 79.248e3, 0.0, 0.0, 7802.88, rad(-1.0), rad(90.0);
  yf << 24.384e3, rad(100.0), rad(37.01), 762.0, rad(-5.0), 0.0;
  const auto s = straight_line_guess(y0, yf, Eigen::Vector2d(0.3, 0.0), 0.0, 2388.62);
  const auto d = derived_quantities(s, kParams, true);
  EXPECT_NEAR(d.inertial_longitude_deg, 100.0 + 7.292115856e-5 * 2388.62 * 180.0 / std::numbers::pi, 1e-10);
  EXPECT_NEAR(d.inertial_longitude_deg, 109.98, 0.01);
  EXPECT_NEAR(d.crossrange_deg, 37.01, 1e-12);
  EXPECT_EQ(d.final_time, 2388.62);

  VehicleParams still = kParams;
  still.omega_e = 0.0;
  EXPECT_NEAR(derived_quantities(s, still, true).inertial_longitude_deg, 100.0, 1e-12);
  EXPECT_NEAR(derived_quantities(s, kParams, false).inertial_longitude_deg, 100.0, 1e-12);
}

TEST(RlveDerived, HeatingLoadOfConstantState) {
  Eigen::VectorXd y(6);
  y << 60e3, 0.0, 0.0, 6000.0, 0.0, rad(90.0);
  const Eigen::Vector2d u(0.3, 0.0);
  const auto s = straight_line_guess(y, y, u, 0.0, 100.0);
  const double q = heat_rate({60e3, 0.0, 0.0, 6000.0, 0.0, rad(90.0)}, {0.3, 0.0});
  EXPECT_NEAR(derived_quantities(s, kParams, false).heating_load, 100.0 * q, 1e-10 * 100.0 * q);
}

}  // namespace
