#pragma once

#include <string>

namespace pushmpc {

class Config;

enum class ShapeKind { Disc, Square };
enum class PusherKind { Point, Line };

// Physical description of the pusher-slider pair.
struct PhysicalParams {
  double mu_p = 0.3;    // pusher-object friction coefficient
  double mu_g = 0.35;   // object-ground friction coefficient
  double mass = 0.827;  // object mass, kg

  ShapeKind shape = ShapeKind::Disc;
  double radius = 0.045;  // disc radius, m
  double side = 0.09;     // square side length, m

  PusherKind pusher = PusherKind::Point;
  double width = 0.03;  // line pusher width, m

  double gravity = 9.81;
  double limit_surface_k = 0.0;  // curvature scale; 0 selects f_max

  int contact_count() const { return pusher == PusherKind::Line ? 2 : 1; }
  int input_dim() const { return 2 * contact_count() + 1; }

  // Throws std::invalid_argument on non-physical values.
  void validate() const;

  static PhysicalParams from_config(const Config& cfg);
};

// Integral mean of the contact-point distance from the center over the
// support region, used by the ellipsoidal limit surface.
double average_contact_radius(const PhysicalParams& p);

}  // namespace pushmpc
