#include "pushmpc/params.hpp"

#include <cmath>
#include <stdexcept>

#include "pushmpc/config.hpp"

namespace pushmpc {

void PhysicalParams::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument("invalid parameters: " + msg);
  };
  require(mu_p > 0.0, "mu_p must be positive");
  require(mu_g > 0.0, "mu_g must be positive");
  require(mass > 0.0, "mass must be positive");
  require(gravity > 0.0, "gravity must be positive");
  if (shape == ShapeKind::Disc) {
    require(radius > 0.0, "shape.radius must be positive");
  } else {
    require(side > 0.0, "shape.side must be positive");
  }
  if (pusher == PusherKind::Line) {
    require(width > 0.0, "pusher.width must be positive");
    require(shape == ShapeKind::Square, "line pusher requires a square object");
    require(width < side, "pusher.width must be smaller than shape.side");
  }
  require(limit_surface_k >= 0.0, "limit_surface.k must be non-negative");
}

PhysicalParams PhysicalParams::from_config(const Config& cfg) {
  PhysicalParams p;
  p.mu_p = cfg.get_double("mu_p", p.mu_p);
  p.mu_g = cfg.get_double("mu_g", p.mu_g);
  p.mass = cfg.get_double("mass", p.mass);
  p.gravity = cfg.get_double("gravity", p.gravity);

  std::string shape = cfg.get_string("shape.kind", "disc");
  if (shape == "disc") {
    p.shape = ShapeKind::Disc;
  } else if (shape == "square") {
    p.shape = ShapeKind::Square;
  } else {
    throw std::invalid_argument("invalid parameters: shape.kind must be disc or square");
  }
  p.radius = cfg.get_double("shape.radius", p.radius);
  p.side = cfg.get_double("shape.side", p.side);

  std::string pusher = cfg.get_string("pusher.kind", "point");
  if (pusher == "point") {
    p.pusher = PusherKind::Point;
  } else if (pusher == "line") {
    p.pusher = PusherKind::Line;
  } else {
    throw std::invalid_argument("invalid parameters: pusher.kind must be point or line");
  }
  p.width = cfg.get_double("pusher.width", p.width);
  p.limit_surface_k = cfg.get_double("limit_surface.k", p.limit_surface_k);

  p.validate();
  return p;
}

double average_contact_radius(const PhysicalParams& p) {
  if (p.shape == ShapeKind::Disc) {
    // Mean of |r| over a uniform disc.
    return 2.0 * p.radius / 3.0;
  }
  // Mean of |r| over a uniform square, by midpoint quadrature on one
  // quadrant (the integrand is symmetric in both axes).
  const int n = 1024;
  const double half = 0.5 * p.side;
  const double hstep = half / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = (i + 0.5) * hstep;
    for (int j = 0; j < n; ++j) {
      double y = (j + 0.5) * hstep;
      sum += std::sqrt(x * x + y * y);
    }
  }
  double quadrant_area = half * half;
  double mean = sum * (hstep * hstep) / quadrant_area;
  return mean;
}

}  // namespace pushmpc
