#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "pushmpc/dynamics.hpp"

namespace pushmpc {

struct TrajectoryPoint {
  double t = 0.0;
  SystemState state;
  ControlInput input;
};

// Uniformly sampled nominal trajectory with the steady inputs that realize
// it under the quasi-static pushing model.
struct NominalTrajectory {
  std::vector<TrajectoryPoint> points;
  double dt = 0.0;
  int contacts = 1;

  int size() const { return int(points.size()); }
  const TrajectoryPoint& at(int i) const { return points[size_t(i)]; }
  // Index clamped to the last sample so horizons can run past the end.
  const TrajectoryPoint& at_or_last(int i) const {
    return points[size_t(std::min(i, size() - 1))];
  }
};

// Steady-turn input for center speed `speed` and turn rate `omega` at
// placement `phi`.  For a point pusher the object yaw leads the path tangent
// by a constant angle beta with sin(beta) = -rho^2 omega / (r v); `beta`
// receives it when non-null.  Throws std::runtime_error when no admissible
// input exists (turn too tight for the friction cone or the geometry).
ControlInput steady_turn_input(const Model& model, double speed, double omega, double phi, double* beta = nullptr);

// Planar figure-eight: a left circle followed by a right circle, both of
// radius `radius`, traversed at constant center speed.  Samples cover
// [0, duration] every dt; the pattern repeats with period 4 pi radius/speed.
NominalTrajectory figure_eight_trajectory(const Model& model, double speed, double radius, double dt,
                                          double duration, double phi = 0.0);

// Straight push along +x at constant speed.
NominalTrajectory straight_line_trajectory(const Model& model, double speed, double dt, double duration,
                                           double phi = 0.0);

void save_trajectory_csv(const NominalTrajectory& traj, const std::string& path);
NominalTrajectory load_trajectory_csv(const std::string& path, const Model& model);

}  // namespace pushmpc
