#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pushmpc/dynamics.hpp"

namespace pushmpc {

// Coulomb interaction regime of the pusher contact over one horizon segment.
enum class ContactMode : uint8_t { Sticking = 0, SlidingLeft = 1, SlidingRight = 2 };

char mode_letter(ContactMode m);
ContactMode mode_from_letter(char c);

// One contact mode per horizon segment, shared by all contact points of a
// rigid pusher; segment lengths partition the N-step horizon.
struct ModeSchedule {
  std::vector<ContactMode> segments;
  std::vector<int> segment_lengths;

  int segment_count() const { return int(segments.size()); }
  int horizon() const;
  ContactMode mode_at_step(int step) const;
  int segment_of_step(int step) const;

  bool operator==(const ModeSchedule& other) const = default;

  // Comma-separated letters, e.g. "S,L,L,R,S,S,S,S".
  std::string to_string() const;
  // Letters only, e.g. "SLLRSSSS"; used inside CSV cells.
  std::string to_compact() const;
  static ModeSchedule parse(const std::string& text, const std::vector<int>& segment_lengths);
  static ModeSchedule uniform(ContactMode mode, const std::vector<int>& segment_lengths);
};

// Polyhedral constraints E ubar = e, G ubar <= g on the input deviation
// ubar = u - u* at a single time step.
struct LinearConstraintSet {
  Eigen::MatrixXd E;
  Eigen::VectorXd e;
  Eigen::MatrixXd G;
  Eigen::VectorXd g;

  static LinearConstraintSet empty(int dim);
  int dim() const { return int(E.cols()); }
  void append(const LinearConstraintSet& other);
  bool satisfied(const Eigen::VectorXd& ubar, double tol) const;
};

// Friction-cone rows for contact c: f_n >= 0 and |f_t| <= mu_p f_n, shifted
// to the deviation variable around u*.
LinearConstraintSet mode_independent_constraints(const Model& model, int c, const ControlInput& u_star);

// Mode rows for contact c.  Sticking pins the placement rate; sliding pins
// the tangential force to a cone edge and signs the placement rate.  The
// placement-rate row is shared by all contacts of a rigid pusher, so callers
// assembling several contacts emit it once via include_rate_row.
LinearConstraintSet mode_constraints(const Model& model, ContactMode mode, int c, const ControlInput& u_star,
                                     bool include_rate_row = true);

// C0 rows for every contact plus the mode rows (rate row emitted once).
LinearConstraintSet step_constraints(const Model& model, ContactMode mode, const ControlInput& u_star);

}  // namespace pushmpc
