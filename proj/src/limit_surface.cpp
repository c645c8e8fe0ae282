#include "pushmpc/limit_surface.hpp"

namespace pushmpc {

LimitSurfaceModel build_limit_surface(const PhysicalParams& p) {
  p.validate();
  LimitSurfaceModel ls;
  ls.f_max = p.mu_g * p.mass * p.gravity;
  ls.m_max = ls.f_max * average_contact_radius(p);
  ls.k = p.limit_surface_k > 0.0 ? p.limit_surface_k : ls.f_max;
  ls.A.setZero();
  ls.A(0, 0) = ls.k / (ls.f_max * ls.f_max);
  ls.A(1, 1) = ls.k / (ls.f_max * ls.f_max);
  ls.A(2, 2) = ls.k / (ls.m_max * ls.m_max);
  ls.A_inv.setZero();
  ls.A_inv(0, 0) = 1.0 / ls.A(0, 0);
  ls.A_inv(1, 1) = 1.0 / ls.A(1, 1);
  ls.A_inv(2, 2) = 1.0 / ls.A(2, 2);
  return ls;
}

}  // namespace pushmpc
