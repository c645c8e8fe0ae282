#pragma once

#include <Eigen/Dense>

#include "pushmpc/params.hpp"
#include "pushmpc/types.hpp"

namespace pushmpc {

// Ellipsoidal limit surface H(w) = 1/2 w' A w for quasi-static sliding.
// The body twist under wrench w is t = A w (gradient of H), so the twist is
// normal to the limit surface and vanishes with the wrench.
struct LimitSurfaceModel {
  double f_max = 0.0;  // maximal ground friction force, N
  double m_max = 0.0;  // maximal ground friction torque, N m
  double k = 0.0;      // curvature scale of the surface
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d A_inv = Eigen::Matrix3d::Zero();
};

LimitSurfaceModel build_limit_surface(const PhysicalParams& p);

inline Twist twist_from_wrench(const LimitSurfaceModel& ls, const Wrench& w) {
  return Twist::from(ls.A * w.vec());
}

inline Wrench wrench_from_twist(const LimitSurfaceModel& ls, const Twist& t) {
  return Wrench::from(ls.A_inv * t.vec());
}

}  // namespace pushmpc
