#include "pushmpc/contact.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pushmpc {
namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace

ContactPoint make_contact_point(const Eigen::Vector2d& position, const Eigen::Vector2d& normal) {
  ContactPoint c;
  c.position = position;
  c.normal = normal;
  c.tangent = Eigen::Vector2d(-normal.y(), normal.x());
  c.jacobian.col(0) << normal.x(), normal.y(), cross2(position, normal);
  c.jacobian.col(1) << c.tangent.x(), c.tangent.y(), cross2(position, c.tangent);
  return c;
}

double placement_limit(const PhysicalParams& p) {
  if (p.pusher == PusherKind::Line) return 0.5 * (p.side - p.width);
  return std::numeric_limits<double>::infinity();
}

ContactGeometry contact_geometry(const PhysicalParams& p, double phi) {
  ContactGeometry geo;
  if (p.pusher == PusherKind::Point) {
    double r = p.radius;
    Eigen::Vector2d n(std::cos(phi), std::sin(phi));
    Eigen::Vector2d t(-n.y(), n.x());
    ContactPoint c = make_contact_point(-r * n, n);
    geo.points.push_back(c);
    // d(position)/dphi = -r t, d(normal)/dphi = t, d(tangent)/dphi = -n;
    // the torque entries p x n = 0 and p x t = -r are constant in phi.
    Eigen::Matrix<double, 3, 2> dj;
    dj.col(0) << t.x(), t.y(), 0.0;
    dj.col(1) << -n.x(), -n.y(), 0.0;
    geo.jacobian_dphi.push_back(dj);
    return geo;
  }
  double a = p.side;
  Eigen::Vector2d n(1.0, 0.0);
  for (double off : {phi - 0.5 * p.width, phi + 0.5 * p.width}) {
    ContactPoint c = make_contact_point(Eigen::Vector2d(-0.5 * a, off), n);
    geo.points.push_back(c);
    // Position moves along the face: d(p x n)/dphi = -1, d(p x t)/dphi = 0.
    Eigen::Matrix<double, 3, 2> dj = Eigen::Matrix<double, 3, 2>::Zero();
    dj(2, 0) = -1.0;
    geo.jacobian_dphi.push_back(dj);
  }
  return geo;
}

std::vector<ContactPoint> contact_points(const PhysicalParams& p, double phi) {
  return contact_geometry(p, phi).points;
}

std::vector<ContactPoint> line_pusher_contacts(const SystemState& state, const PhysicalParams& p) {
  if (p.pusher != PusherKind::Line) {
    throw std::invalid_argument("line_pusher_contacts requires a line pusher");
  }
  double limit = placement_limit(p);
  if (std::abs(state.phi) > limit + 1e-12) {
    throw std::domain_error("pusher placement off the contact face");
  }
  return contact_points(p, state.phi);
}

}  // namespace pushmpc
