#include "pushmpc/dynamics.hpp"

#include <stdexcept>

namespace pushmpc {

Wrench assemble_wrench(const std::vector<ContactPoint>& contacts, const ControlInput& u) {
  if (int(contacts.size()) != u.contacts) {
    throw std::invalid_argument("contact count does not match input layout");
  }
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  for (size_t c = 0; c < contacts.size(); ++c) {
    w += contacts[c].jacobian * Eigen::Vector2d(u.fn(int(c)), u.ft(int(c)));
  }
  return Wrench::from(w);
}

Eigen::MatrixXd wrench_force_matrix(const std::vector<ContactPoint>& contacts) {
  int C = int(contacts.size());
  Eigen::MatrixXd W(3, 2 * C);
  for (int c = 0; c < C; ++c) {
    W.col(c) = contacts[c].jacobian.col(0);
    W.col(C + c) = contacts[c].jacobian.col(1);
  }
  return W;
}

Eigen::Vector4d state_derivative(const Model& model, const SystemState& state, const ControlInput& u) {
  ContactGeometry geo = contact_geometry(model.params, state.phi);
  Wrench w = assemble_wrench(geo.points, u);
  Eigen::Vector3d twist = model.ls.A * w.vec();
  Eigen::Vector2d v_world = rot2(state.theta) * twist.head<2>();
  return {v_world.x(), v_world.y(), twist.z(), u.phidot()};
}

Linearization linearize(const Model& model, const SystemState& state, const ControlInput& u) {
  int C = model.contacts();
  int m = model.input_dim();
  ContactGeometry geo = contact_geometry(model.params, state.phi);

  Eigen::Matrix2d R = rot2(state.theta);
  Eigen::Matrix2d Rp = rot2_deriv(state.theta);

  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  Eigen::Vector3d dw_dphi = Eigen::Vector3d::Zero();
  for (int c = 0; c < C; ++c) {
    Eigen::Vector2d fc(u.fn(c), u.ft(c));
    w += geo.points[c].jacobian * fc;
    dw_dphi += geo.jacobian_dphi[c] * fc;
  }
  Eigen::Vector3d twist = model.ls.A * w;
  Eigen::Vector3d dtwist_dphi = model.ls.A * dw_dphi;

  Linearization lin;
  lin.A.setZero();
  lin.A.block<2, 1>(0, 2) = Rp * twist.head<2>();
  lin.A.block<2, 1>(0, 3) = R * dtwist_dphi.head<2>();
  lin.A(2, 3) = dtwist_dphi.z();

  lin.B = Eigen::MatrixXd::Zero(4, m);
  for (int c = 0; c < C; ++c) {
    for (int pair = 0; pair < 2; ++pair) {
      int col = pair == 0 ? c : C + c;
      Eigen::Vector3d dt = model.ls.A * geo.points[c].jacobian.col(pair);
      lin.B.block<2, 1>(0, col) = R * dt.head<2>();
      lin.B(2, col) = dt.z();
    }
  }
  lin.B(3, m - 1) = 1.0;
  return lin;
}

}  // namespace pushmpc
