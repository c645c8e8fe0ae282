#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include "pushmpc/modes.hpp"
#include "pushmpc/qp.hpp"

using namespace pushmpc;

namespace {

Model point_model() {
  PhysicalParams p;
  p.shape = ShapeKind::Disc;
  p.pusher = PusherKind::Point;
  return Model::make(p);
}

Model line_model() {
  PhysicalParams p;
  p.shape = ShapeKind::Square;
  p.pusher = PusherKind::Line;
  return Model::make(p);
}

ControlInput nominal_point() {
  ControlInput u = ControlInput::zero(1);
  u.fn(0) = 1.0;
  u.ft(0) = 0.1;
  u.phidot() = 0.05;
  return u;
}

}  // namespace

TEST_CASE("mode letters round trip") {
  for (auto m : {ContactMode::Sticking, ContactMode::SlidingLeft, ContactMode::SlidingRight}) {
    CHECK(mode_from_letter(mode_letter(m)) == m);
  }
  CHECK(mode_letter(ContactMode::Sticking) == 'S');
  CHECK(mode_letter(ContactMode::SlidingLeft) == 'L');
  CHECK(mode_letter(ContactMode::SlidingRight) == 'R');
  CHECK_THROWS(mode_from_letter('X'));
}

TEST_CASE("mode schedule indexing and text forms") {
  std::vector<int> lens{1, 5, 5, 5, 5, 5, 5, 4};
  ModeSchedule s = ModeSchedule::parse("S,L,L,R,S,S,S,S", lens);
  CHECK(s.horizon() == 35);
  CHECK(s.segment_count() == 8);
  CHECK(s.mode_at_step(0) == ContactMode::Sticking);
  CHECK(s.mode_at_step(1) == ContactMode::SlidingLeft);
  CHECK(s.mode_at_step(5) == ContactMode::SlidingLeft);
  CHECK(s.segment_of_step(6) == 2);
  CHECK(s.mode_at_step(15) == ContactMode::SlidingRight);
  CHECK(s.mode_at_step(34) == ContactMode::Sticking);
  CHECK(s.to_string() == "S,L,L,R,S,S,S,S");
  CHECK(s.to_compact() == "SLLRSSSS");
  CHECK(ModeSchedule::parse("SLLRSSSS", lens) == s);
  CHECK(ModeSchedule::uniform(ContactMode::Sticking, lens).horizon() == 35);
  CHECK_THROWS(ModeSchedule::parse("S,L", lens));
  CHECK_THROWS(ModeSchedule::parse("SLXRSSSS", lens));
}

TEST_CASE("friction cone rows bound the total contact force") {
  Model m = point_model();
  ControlInput u = nominal_point();
  LinearConstraintSet cone = mode_independent_constraints(m, 0, u);
  CHECK(cone.E.rows() == 0);
  REQUIRE(cone.G.rows() == 3);

  Eigen::Vector3d inside(0.0, 0.0, 0.0);  // stays at the nominal, strictly inside
  CHECK(cone.satisfied(inside, 1e-12));
  Eigen::Vector3d negative_fn(-1.0 - 1e-6, 0.0, 0.0);
  CHECK_FALSE(cone.satisfied(negative_fn, 1e-9));
  Eigen::Vector3d past_edge(0.0, 0.3 * 1.0 - 0.1 + 1e-6, 0.0);  // f_t just past +mu f_n
  CHECK_FALSE(cone.satisfied(past_edge, 1e-9));
  Eigen::Vector3d on_edge(0.0, 0.3 * 1.0 - 0.1, 0.0);
  CHECK(cone.satisfied(on_edge, 1e-9));
}

TEST_CASE("sticking pins the placement rate") {
  Model m = point_model();
  ControlInput u = nominal_point();
  LinearConstraintSet s = mode_constraints(m, ContactMode::Sticking, 0, u);
  REQUIRE(s.E.rows() == 1);
  CHECK(s.G.rows() == 0);
  CHECK(s.E(0, 2) == doctest::Approx(1.0));
  CHECK(s.e(0) == doctest::Approx(-0.05));  // phidot deviation cancels the nominal
  LinearConstraintSet none = mode_constraints(m, ContactMode::Sticking, 0, u, false);
  CHECK(none.E.rows() == 0);
  CHECK(none.G.rows() == 0);
}

TEST_CASE("sliding pins the force to a cone edge and signs the rate") {
  Model m = point_model();
  ControlInput u = nominal_point();

  LinearConstraintSet left = mode_constraints(m, ContactMode::SlidingLeft, 0, u);
  REQUIRE(left.E.rows() == 1);
  REQUIRE(left.G.rows() == 1);
  // Deviation with f_t on the +mu edge and positive total rate.
  Eigen::Vector3d ubar(0.0, 0.3 * 1.0 - 0.1, 0.1);
  CHECK(left.satisfied(ubar, 1e-12));
  Eigen::Vector3d bad_rate(0.0, 0.2, -0.1);  // total rate 0.05 - 0.1 < 0
  CHECK_FALSE(left.satisfied(bad_rate, 1e-9));

  LinearConstraintSet right = mode_constraints(m, ContactMode::SlidingRight, 0, u);
  Eigen::Vector3d ubar_r(0.0, -0.3 * 1.0 - 0.1, -0.1);
  CHECK(right.satisfied(ubar_r, 1e-12));
  Eigen::Vector3d bad_rate_r(0.0, -0.4, 0.0);  // total rate stays +0.05
  CHECK_FALSE(right.satisfied(bad_rate_r, 1e-9));
}

TEST_CASE("step constraints assemble cone and mode rows") {
  Model pm = point_model();
  ControlInput up = nominal_point();
  LinearConstraintSet stick = step_constraints(pm, ContactMode::Sticking, up);
  CHECK(stick.E.rows() == 1);
  CHECK(stick.G.rows() == 3);
  LinearConstraintSet slide = step_constraints(pm, ContactMode::SlidingLeft, up);
  CHECK(slide.E.rows() == 1);
  CHECK(slide.G.rows() == 4);

  Model lm = line_model();
  ControlInput ul = ControlInput::zero(2);
  ul.fn(0) = 0.4;
  ul.fn(1) = 0.5;
  LinearConstraintSet lstick = step_constraints(lm, ContactMode::Sticking, ul);
  CHECK(lstick.E.rows() == 1);  // shared rate row appears once
  CHECK(lstick.G.rows() == 6);
  LinearConstraintSet lslide = step_constraints(lm, ContactMode::SlidingRight, ul);
  CHECK(lslide.E.rows() == 2);  // one cone-edge row per contact
  CHECK(lslide.G.rows() == 7);
}

TEST_CASE("the three mode sets intersect exactly at zero total input") {
  Model m = point_model();
  ControlInput u = nominal_point();
  LinearConstraintSet all = mode_independent_constraints(m, 0, u);
  for (auto mode : {ContactMode::Sticking, ContactMode::SlidingLeft, ContactMode::SlidingRight}) {
    all.append(mode_constraints(m, mode, 0, u));
  }
  QpProblem p;
  p.H = Eigen::Matrix3d::Identity();
  p.f = Eigen::Vector3d::Zero();
  p.E = all.E;
  p.e = all.e;
  p.G = all.G;
  p.g = all.g;
  QpSolution sol = solve_qp(p);
  REQUIRE(sol.status == QpStatus::Optimal);
  CHECK((sol.z + u.v).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("constraint sets append") {
  LinearConstraintSet a = LinearConstraintSet::empty(3);
  CHECK(a.dim() == 3);
  CHECK(a.E.rows() == 0);
  LinearConstraintSet b = LinearConstraintSet::empty(3);
  b.G = Eigen::MatrixXd::Ones(2, 3);
  b.g = Eigen::VectorXd::Ones(2);
  a.append(b);
  a.append(b);
  CHECK(a.G.rows() == 4);
  CHECK(a.satisfied(Eigen::Vector3d::Zero(), 1e-12));
  CHECK_FALSE(a.satisfied(Eigen::Vector3d::Ones(), 1e-9));
}
