#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "pushmpc/modes.hpp"
#include "pushmpc/trajectory.hpp"

using namespace pushmpc;

namespace {

Model point_model() { return Model::make(PhysicalParams{}); }

Model line_model() {
  PhysicalParams p;
  p.shape = ShapeKind::Square;
  p.pusher = PusherKind::Line;
  return Model::make(p);
}

constexpr double kSpeed = 0.05;
constexpr double kRadius = 0.15;

// Path tangent reconstructed from the sample position alone, so the check
// below closes the loop position -> tangent -> forward dynamics.
Eigen::Vector2d tangent_from_position(const SystemState& s, double t, double radius, double period) {
  const double tau = std::fmod(t, period);
  if (tau < 0.5 * period) {
    const double c = (radius - s.y) / radius;
    const double sn = s.x / radius;
    return {c, sn};
  }
  const double c = (radius + s.y) / radius;
  const double sn = s.x / radius;
  return {c, -sn};
}

}  // namespace

TEST_CASE("steady turn input realizes the requested twist through the forward dynamics") {
  for (const Model& model : {point_model(), line_model()}) {
    for (double omega : {kSpeed / kRadius, -kSpeed / kRadius, 0.0}) {
      const ControlInput u = steady_turn_input(model, kSpeed, omega, 0.0);
      double beta = 0.0;
      steady_turn_input(model, kSpeed, omega, 0.0, &beta);
      SystemState s;
      s.theta = 0.7 - beta;  // heading 0.7 after the constant yaw offset
      const Eigen::Vector4d dx = state_derivative(model, s, u);
      CHECK(dx.head<2>().norm() == doctest::Approx(kSpeed).epsilon(1e-12));
      CHECK(dx(0) == doctest::Approx(kSpeed * std::cos(0.7)).epsilon(1e-9));
      CHECK(dx(1) == doctest::Approx(kSpeed * std::sin(0.7)).epsilon(1e-9));
      CHECK(dx(2) == doctest::Approx(omega).epsilon(1e-12));
      CHECK(dx(3) == 0.0);
    }
  }
}

TEST_CASE("point pusher steady turn matches the limit-surface force balance") {
  const Model model = point_model();
  const double omega = kSpeed / kRadius;
  double beta = 0.0;
  const ControlInput u = steady_turn_input(model, kSpeed, omega, 0.0, &beta);
  const double rho2 = (model.ls.m_max / model.ls.f_max) * (model.ls.m_max / model.ls.f_max);
  const double ft_expected = -omega * model.ls.f_max * rho2 / model.params.radius;
  CHECK(u.ft(0) == doctest::Approx(ft_expected).epsilon(1e-12));
  CHECK(u.fn(0) * u.fn(0) + u.ft(0) * u.ft(0) ==
        doctest::Approx(kSpeed * model.ls.f_max * kSpeed * model.ls.f_max).epsilon(1e-12));
  CHECK(std::sin(beta) == doctest::Approx(-rho2 * omega / (model.params.radius * kSpeed)).epsilon(1e-9));
  CHECK(u.phidot() == 0.0);
  // Strictly inside the friction cone.
  CHECK(model.params.mu_p * u.fn(0) - std::abs(u.ft(0)) > 0.0);
}

TEST_CASE("line pusher steady turn balances force and torque with zero tangential force") {
  const Model model = line_model();
  const double omega = kSpeed / kRadius;
  const ControlInput u = steady_turn_input(model, kSpeed, omega, 0.0);
  const double rho2 = (model.ls.m_max / model.ls.f_max) * (model.ls.m_max / model.ls.f_max);
  CHECK(u.fn(0) + u.fn(1) == doctest::Approx(kSpeed * model.ls.f_max).epsilon(1e-12));
  const double half = 0.5 * model.params.width;
  CHECK(half * (u.fn(0) - u.fn(1)) == doctest::Approx(omega * model.ls.f_max * rho2).epsilon(1e-9));
  CHECK(u.ft(0) == 0.0);
  CHECK(u.ft(1) == 0.0);
  CHECK(u.fn(0) > 0.0);
  CHECK(u.fn(1) > 0.0);
  // The tighter contact loses load first as the turn sharpens.
  CHECK(u.fn(1) < u.fn(0));
}

TEST_CASE("nominal inputs satisfy the sticking mode constraints at zero deviation") {
  for (const Model& model : {point_model(), line_model()}) {
    for (double omega : {kSpeed / kRadius, -kSpeed / kRadius}) {
      const ControlInput u = steady_turn_input(model, kSpeed, omega, 0.0);
      const LinearConstraintSet cs = step_constraints(model, ContactMode::Sticking, u);
      CHECK(cs.satisfied(Eigen::VectorXd::Zero(model.input_dim()), 1e-12));
    }
  }
}

TEST_CASE("infeasible steady turns are rejected") {
  // Point pusher: torque demand beyond the force the speed budget allows.
  CHECK_THROWS_AS(steady_turn_input(point_model(), kSpeed, 60.0, 0.0), std::runtime_error);
  // Line pusher: the trailing contact would need to pull.
  CHECK_THROWS_AS(steady_turn_input(line_model(), kSpeed, 8.0, 0.0), std::runtime_error);
  CHECK_THROWS_AS(steady_turn_input(point_model(), -1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("figure eight samples stay on the two circles and respect the forward dynamics") {
  const Model model = point_model();
  const double dt = 0.01;
  const double period = 4.0 * M_PI * kRadius / kSpeed;
  const NominalTrajectory traj = figure_eight_trajectory(model, kSpeed, kRadius, dt, period);
  REQUIRE(traj.size() == int(std::ceil(period / dt - 1e-9)) + 1);
  REQUIRE(traj.dt == dt);

  const Eigen::Vector2d c_left(0.0, kRadius);
  const Eigen::Vector2d c_right(0.0, -kRadius);
  int on_left = 0;
  for (int i = 0; i < traj.size(); i += 7) {
    const TrajectoryPoint& p = traj.at(i);
    const Eigen::Vector2d pos(p.state.x, p.state.y);
    const double d_left = std::abs((pos - c_left).norm() - kRadius);
    const double d_right = std::abs((pos - c_right).norm() - kRadius);
    CHECK(std::min(d_left, d_right) < 1e-9);
    if (d_left < d_right) ++on_left;

    const Eigen::Vector2d tangent = tangent_from_position(p.state, p.t, kRadius, period);
    const Eigen::Vector4d dx = state_derivative(model, p.state, p.input);
    CHECK((dx.head<2>() - kSpeed * tangent).norm() < 1e-9);
    CHECK(std::abs(std::abs(dx(2)) - kSpeed / kRadius) < 1e-12);
    CHECK(dx(3) == 0.0);
    CHECK(p.state.phi == 0.0);
  }
  CHECK(on_left > 0.3 * traj.size() / 7);
  CHECK(on_left < 0.7 * traj.size() / 7);
}

TEST_CASE("figure eight is continuous in position and periodic") {
  const Model model = point_model();
  const double dt = 0.01;
  const double period = 4.0 * M_PI * kRadius / kSpeed;
  const NominalTrajectory traj = figure_eight_trajectory(model, kSpeed, kRadius, dt, 2.0 * period);

  double max_step = 0.0;
  for (int i = 0; i + 1 < traj.size(); ++i) {
    const double step = std::hypot(traj.at(i + 1).state.x - traj.at(i).state.x,
                                   traj.at(i + 1).state.y - traj.at(i).state.y);
    max_step = std::max(max_step, step);
  }
  CHECK(max_step < kSpeed * dt * 1.0001);

  const int lap = int(std::round(period / dt));
  // period/dt is not an integer, so compare against the closed-form shift.
  for (int i : {3, 500, 1200}) {
    const TrajectoryPoint& a = traj.at(i);
    const TrajectoryPoint& b = traj.at(i + lap);
    const double shift = std::fmod(b.t, period) - a.t;
    CHECK(std::abs(b.state.x - a.state.x) < kSpeed * std::abs(shift) + 1e-9);
    CHECK(std::abs(b.state.y - a.state.y) < kSpeed * std::abs(shift) + 1e-9);
  }
}

TEST_CASE("object yaw jumps by the offset difference at the circle transition") {
  const Model model = point_model();
  const double dt = 0.01;
  const double period = 4.0 * M_PI * kRadius / kSpeed;
  double beta_left = 0.0;
  double beta_right = 0.0;
  steady_turn_input(model, kSpeed, kSpeed / kRadius, 0.0, &beta_left);
  steady_turn_input(model, kSpeed, -kSpeed / kRadius, 0.0, &beta_right);
  CHECK(beta_left == doctest::Approx(-beta_right).epsilon(1e-12));
  CHECK(beta_left < 0.0);

  const NominalTrajectory traj = figure_eight_trajectory(model, kSpeed, kRadius, dt, period);
  const int i_switch = int(std::floor(0.5 * period / dt));
  const double jump = traj.at(i_switch + 1).state.theta - traj.at(i_switch).state.theta;
  const double expected = beta_left - beta_right;
  CHECK(std::abs(jump - expected) < 2.0 * (kSpeed / kRadius) * dt);

  // Away from transitions the yaw rate matches the turn rate.
  const double rate = (traj.at(10).state.theta - traj.at(9).state.theta) / dt;
  CHECK(rate == doctest::Approx(kSpeed / kRadius).epsilon(1e-9));
}

TEST_CASE("line pusher figure eight keeps yaw aligned with the path tangent") {
  const Model model = line_model();
  const double period = 4.0 * M_PI * kRadius / kSpeed;
  const NominalTrajectory traj = figure_eight_trajectory(model, kSpeed, kRadius, 0.01, period);
  double max_step = 0.0;
  for (int i = 0; i + 1 < traj.size(); ++i) {
    max_step = std::max(max_step, std::abs(traj.at(i + 1).state.theta - traj.at(i).state.theta));
  }
  // No offset jump: the largest yaw step is just the turn rate times dt.
  CHECK(max_step < (kSpeed / kRadius) * 0.01 * 1.0001);
}

TEST_CASE("straight line trajectory pushes along x with zero tangential force") {
  const Model model = point_model();
  const NominalTrajectory traj = straight_line_trajectory(model, kSpeed, 0.1, 2.0);
  REQUIRE(traj.size() == 21);
  for (int i = 0; i < traj.size(); ++i) {
    CHECK(traj.at(i).state.x == doctest::Approx(kSpeed * 0.1 * i).epsilon(1e-12));
    CHECK(traj.at(i).state.y == 0.0);
    CHECK(traj.at(i).state.theta == 0.0);
    CHECK(traj.at(i).input.ft(0) == 0.0);
  }
  const Eigen::Vector4d dx = state_derivative(model, traj.at(0).state, traj.at(0).input);
  CHECK((dx - Eigen::Vector4d(kSpeed, 0.0, 0.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("at_or_last clamps indices past the end") {
  const Model model = point_model();
  const NominalTrajectory traj = straight_line_trajectory(model, kSpeed, 0.1, 1.0);
  CHECK(traj.at_or_last(5).t == traj.at(5).t);
  CHECK(traj.at_or_last(10000).t == traj.at(traj.size() - 1).t);
}

TEST_CASE("trajectory CSV round trip is exact") {
  const Model model = line_model();
  const NominalTrajectory traj = figure_eight_trajectory(model, kSpeed, kRadius, 0.3, 40.0, 0.004);
  const std::string path = "test_traj_roundtrip.csv";
  save_trajectory_csv(traj, path);
  const NominalTrajectory back = load_trajectory_csv(path, model);
  REQUIRE(back.size() == traj.size());
  CHECK(back.dt == traj.dt);
  CHECK(back.contacts == traj.contacts);
  for (int i = 0; i < traj.size(); ++i) {
    CHECK(back.at(i).t == traj.at(i).t);
    CHECK((back.at(i).state.vec() - traj.at(i).state.vec()).norm() == 0.0);
    CHECK((back.at(i).input.v - traj.at(i).input.v).norm() == 0.0);
    CHECK(back.at(i).input.contacts == 2);
  }
  // A point-pusher model expects a different column layout.
  CHECK_THROWS_AS(load_trajectory_csv(path, point_model()), std::runtime_error);
  std::remove(path.c_str());
}
