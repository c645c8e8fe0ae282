#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pushmpc/params.hpp"
#include "pushmpc/types.hpp"

namespace pushmpc {

// One pusher-object contact in the body frame.  The jacobian maps the
// contact force expressed in the (normal, tangent) basis to a body wrench;
// its torque row carries the 2-D cross product p x f.
struct ContactPoint {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d normal = Eigen::Vector2d::Zero();
  Eigen::Vector2d tangent = Eigen::Vector2d::Zero();
  Eigen::Matrix<double, 3, 2> jacobian = Eigen::Matrix<double, 3, 2>::Zero();
};

ContactPoint make_contact_point(const Eigen::Vector2d& position, const Eigen::Vector2d& normal);

// Contact set plus the derivative of each jacobian with respect to the
// placement coordinate phi, needed by the analytic linearization.
struct ContactGeometry {
  std::vector<ContactPoint> points;
  std::vector<Eigen::Matrix<double, 3, 2>> jacobian_dphi;
};

// Contact locations for placement phi: a point pusher on a disc touches at
// angle phi, position (-r cos phi, -r sin phi), pushing inward; a line pusher
// on a square touches the face x = -a/2 at offsets phi +- width/2.
ContactGeometry contact_geometry(const PhysicalParams& p, double phi);

std::vector<ContactPoint> contact_points(const PhysicalParams& p, double phi);

// Two rigid-body contacts of the line pusher; throws if the pusher extends
// past the contact face.
std::vector<ContactPoint> line_pusher_contacts(const SystemState& state, const PhysicalParams& p);

// Largest |phi| keeping the full pusher on the contact face (infinity for a
// point pusher on a disc, where phi is an angle).
double placement_limit(const PhysicalParams& p);

}  // namespace pushmpc
