#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace pushmpc {

// Planar wrench on the object, expressed in the body frame.
struct Wrench {
  double fx = 0.0;
  double fy = 0.0;
  double tau = 0.0;

  Eigen::Vector3d vec() const { return {fx, fy, tau}; }
  static Wrench from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

// Planar body twist of the object, expressed in the body frame.
struct Twist {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  Eigen::Vector3d vec() const { return {vx, vy, omega}; }
  static Twist from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

// Object pose in the world frame plus the pusher placement coordinate:
// contact angle for a point pusher, lateral offset for a line pusher.
struct SystemState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double phi = 0.0;

  Eigen::Vector4d vec() const { return {x, y, theta, phi}; }
  static SystemState from(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

// Control input [f_n per contact..., f_t per contact..., placement rate].
struct ControlInput {
  Eigen::VectorXd v;
  int contacts = 0;

  static ControlInput zero(int contacts) {
    ControlInput u;
    u.contacts = contacts;
    u.v = Eigen::VectorXd::Zero(2 * contacts + 1);
    return u;
  }
  static ControlInput from(const Eigen::VectorXd& vec, int contacts) {
    ControlInput u;
    u.contacts = contacts;
    u.v = vec;
    return u;
  }

  int dim() const { return int(v.size()); }
  double fn(int c) const { return v[c]; }
  double& fn(int c) { return v[c]; }
  double ft(int c) const { return v[contacts + c]; }
  double& ft(int c) { return v[contacts + c]; }
  double phidot() const { return v[2 * contacts]; }
  double& phidot() { return v[2 * contacts]; }
};

inline Eigen::Matrix2d rot2(double a) {
  double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

// Derivative of rot2 with respect to the angle.
inline Eigen::Matrix2d rot2_deriv(double a) {
  double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix2d r;
  r << -s, -c, c, -s;
  return r;
}

inline double wrap_angle(double a) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  a = std::fmod(a + 3.14159265358979323846, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - 3.14159265358979323846;
}

}  // namespace pushmpc
