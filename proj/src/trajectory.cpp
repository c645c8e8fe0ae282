#include "pushmpc/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "pushmpc/csv.hpp"
#include "pushmpc/io.hpp"

namespace pushmpc {

namespace {

// Circle segment of a figure-eight at path parameter tau in [0, 2 T_c).
struct PathSample {
  Eigen::Vector2d pos;
  double heading = 0.0;
  double omega = 0.0;
};

PathSample figure_eight_sample(double tau, double speed, double radius) {
  const double t_circle = 2.0 * M_PI * radius / speed;
  const double rate = speed / radius;
  PathSample s;
  if (tau < t_circle) {
    const double psi = rate * tau;
    s.pos = Eigen::Vector2d(radius * std::sin(psi), radius * (1.0 - std::cos(psi)));
    s.heading = psi;
    s.omega = rate;
  } else {
    const double chi = rate * (tau - t_circle);
    s.pos = Eigen::Vector2d(radius * std::sin(chi), -radius * (1.0 - std::cos(chi)));
    s.heading = 2.0 * M_PI - chi;
    s.omega = -rate;
  }
  return s;
}

void check_cone_interior(const Model& model, const ControlInput& u) {
  const int c = model.params.contact_count();
  for (int i = 0; i < c; ++i) {
    const double margin = model.params.mu_p * u.fn(i) - std::abs(u.ft(i));
    if (!(u.fn(i) > 0.0) || !(margin > 0.0)) {
      throw std::runtime_error("nominal trajectory infeasible: contact force leaves the friction cone");
    }
  }
}

}  // namespace

ControlInput steady_turn_input(const Model& model, double speed, double omega, double phi, double* beta) {
  if (!(speed > 0.0)) throw std::invalid_argument("steady_turn_input: speed must be positive");
  const double f_max = model.ls.f_max;
  const double rho2 = model.ls.m_max / f_max * (model.ls.m_max / f_max);
  ControlInput u = ControlInput::zero(model.params.contact_count());
  if (model.params.contact_count() == 1) {
    const double r = model.params.radius;
    // Torque row of the limit surface fixes f_t, speed fixes the force norm.
    const double ft = -omega * f_max * rho2 / r;
    const double fn_sq = speed * f_max * (speed * f_max) - ft * ft;
    if (!(fn_sq > 0.0)) {
      throw std::runtime_error("nominal trajectory infeasible: turn rate exceeds pushable range");
    }
    const double fn = std::sqrt(fn_sq);
    u.fn(0) = fn;
    u.ft(0) = ft;
    if (beta) *beta = phi + std::atan2(ft, fn);
  } else {
    // Both normals push along -x of the slider, so the object translates
    // along its own x axis; differential normal force supplies the torque.
    const double d = model.params.width;
    const double off1 = phi - 0.5 * d;
    const double off2 = phi + 0.5 * d;
    const double force = speed * f_max;
    const double torque = omega * f_max * rho2;
    u.fn(0) = (force * off2 + torque) / d;
    u.fn(1) = (-force * off1 - torque) / d;
    if (beta) *beta = 0.0;
  }
  check_cone_interior(model, u);
  return u;
}

NominalTrajectory figure_eight_trajectory(const Model& model, double speed, double radius, double dt,
                                          double duration, double phi) {
  if (!(speed > 0.0) || !(radius > 0.0)) {
    throw std::invalid_argument("figure_eight_trajectory: speed and radius must be positive");
  }
  if (!(dt > 0.0) || !(duration >= 0.0)) {
    throw std::invalid_argument("figure_eight_trajectory: dt must be positive and duration non-negative");
  }
  const double rate = speed / radius;
  double beta_left = 0.0;
  double beta_right = 0.0;
  const ControlInput u_left = steady_turn_input(model, speed, rate, phi, &beta_left);
  const ControlInput u_right = steady_turn_input(model, speed, -rate, phi, &beta_right);

  const double period = 4.0 * M_PI * radius / speed;
  const double t_circle = 0.5 * period;
  NominalTrajectory traj;
  traj.dt = dt;
  traj.contacts = model.params.contact_count();
  const int n = int(std::ceil(duration / dt - 1e-9)) + 1;
  traj.points.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    const double tau = std::fmod(t, period);
    const PathSample s = figure_eight_sample(tau, speed, radius);
    const bool left = tau < t_circle;
    TrajectoryPoint p;
    p.t = t;
    p.state.x = s.pos.x();
    p.state.y = s.pos.y();
    p.state.theta = s.heading - (left ? beta_left : beta_right);
    p.state.phi = phi;
    p.input = left ? u_left : u_right;
    traj.points.push_back(p);
  }
  return traj;
}

NominalTrajectory straight_line_trajectory(const Model& model, double speed, double dt, double duration,
                                           double phi) {
  if (!(dt > 0.0) || !(duration >= 0.0)) {
    throw std::invalid_argument("straight_line_trajectory: dt must be positive and duration non-negative");
  }
  double beta = 0.0;
  const ControlInput u = steady_turn_input(model, speed, 0.0, phi, &beta);
  NominalTrajectory traj;
  traj.dt = dt;
  traj.contacts = model.params.contact_count();
  const int n = int(std::ceil(duration / dt - 1e-9)) + 1;
  traj.points.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    TrajectoryPoint p;
    p.t = t;
    p.state = SystemState{speed * t, 0.0, -beta, phi};
    p.input = u;
    traj.points.push_back(p);
  }
  return traj;
}

void save_trajectory_csv(const NominalTrajectory& traj, const std::string& path) {
  std::string out;
  std::vector<std::string> fields = {"t", "x", "y", "theta", "phi"};
  for (int i = 0; i < traj.contacts; ++i) fields.push_back("fn" + std::to_string(i + 1));
  for (int i = 0; i < traj.contacts; ++i) fields.push_back("ft" + std::to_string(i + 1));
  fields.push_back("phidot");
  out += join_csv(fields);
  out += '\n';
  for (const TrajectoryPoint& p : traj.points) {
    fields.clear();
    fields.push_back(format_double(p.t));
    const Eigen::Vector4d xv = p.state.vec();
    for (int k = 0; k < 4; ++k) fields.push_back(format_double(xv(k)));
    for (int k = 0; k < p.input.v.size(); ++k) fields.push_back(format_double(p.input.v(k)));
    out += join_csv(fields);
    out += '\n';
  }
  atomic_write_file(path, out);
}

NominalTrajectory load_trajectory_csv(const std::string& path, const Model& model) {
  const CsvTable table = read_csv(path);
  const int c = model.params.contact_count();
  const int expected_cols = 5 + model.params.input_dim();
  if (int(table.header.size()) != expected_cols) {
    throw std::runtime_error("trajectory file '" + path + "' does not match the configured pusher");
  }
  NominalTrajectory traj;
  traj.contacts = c;
  traj.points.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (int(row.size()) != expected_cols) {
      throw std::runtime_error("trajectory file '" + path + "' has a malformed row");
    }
    TrajectoryPoint p;
    p.t = parse_double(row[0]);
    Eigen::Vector4d xv;
    for (int k = 0; k < 4; ++k) xv(k) = parse_double(row[size_t(1 + k)]);
    p.state = SystemState::from(xv);
    p.input = ControlInput::zero(c);
    for (int k = 0; k < p.input.v.size(); ++k) p.input.v(k) = parse_double(row[size_t(5 + k)]);
    traj.points.push_back(p);
  }
  traj.dt = traj.points.size() >= 2 ? traj.points[1].t - traj.points[0].t : 0.0;
  return traj;
}

}  // namespace pushmpc
