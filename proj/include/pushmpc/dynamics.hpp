#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pushmpc/contact.hpp"
#include "pushmpc/limit_surface.hpp"
#include "pushmpc/params.hpp"
#include "pushmpc/types.hpp"

namespace pushmpc {

// Physical parameters bundled with the limit surface they induce.
struct Model {
  PhysicalParams params;
  LimitSurfaceModel ls;

  static Model make(const PhysicalParams& p) {
    p.validate();
    return Model{p, build_limit_surface(p)};
  }

  int contacts() const { return params.contact_count(); }
  int input_dim() const { return params.input_dim(); }
};

// w = sum_c J_c [f_n,c; f_t,c].
Wrench assemble_wrench(const std::vector<ContactPoint>& contacts, const ControlInput& u);

// 3 x 2C matrix mapping stacked forces [f_n...; f_t...] to the body wrench.
Eigen::MatrixXd wrench_force_matrix(const std::vector<ContactPoint>& contacts);

// Quasi-static motion: the pushed object moves with twist t = A w rotated
// into the world frame; the placement coordinate integrates its rate input.
Eigen::Vector4d state_derivative(const Model& model, const SystemState& state, const ControlInput& u);

struct Linearization {
  Eigen::Matrix4d A;
  Eigen::MatrixXd B;  // 4 x input_dim
};

// Analytic Jacobians of state_derivative at (state, u).
Linearization linearize(const Model& model, const SystemState& state, const ControlInput& u);

}  // namespace pushmpc
