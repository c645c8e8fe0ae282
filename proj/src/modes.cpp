#include "pushmpc/modes.hpp"

#include <numeric>
#include <stdexcept>

namespace pushmpc {

char mode_letter(ContactMode m) {
  switch (m) {
    case ContactMode::Sticking: return 'S';
    case ContactMode::SlidingLeft: return 'L';
    case ContactMode::SlidingRight: return 'R';
  }
  throw std::logic_error("invalid contact mode");
}

ContactMode mode_from_letter(char c) {
  switch (c) {
    case 'S': return ContactMode::Sticking;
    case 'L': return ContactMode::SlidingLeft;
    case 'R': return ContactMode::SlidingRight;
    default: throw std::runtime_error(std::string("invalid mode letter '") + c + "'");
  }
}

int ModeSchedule::horizon() const {
  return std::accumulate(segment_lengths.begin(), segment_lengths.end(), 0);
}

int ModeSchedule::segment_of_step(int step) const {
  int acc = 0;
  for (size_t s = 0; s < segment_lengths.size(); ++s) {
    acc += segment_lengths[s];
    if (step < acc) return int(s);
  }
  throw std::out_of_range("step beyond horizon");
}

ContactMode ModeSchedule::mode_at_step(int step) const {
  return segments[segment_of_step(step)];
}

std::string ModeSchedule::to_string() const {
  std::string out;
  for (size_t i = 0; i < segments.size(); ++i) {
    if (i) out += ',';
    out += mode_letter(segments[i]);
  }
  return out;
}

std::string ModeSchedule::to_compact() const {
  std::string out;
  for (ContactMode m : segments) out += mode_letter(m);
  return out;
}

ModeSchedule ModeSchedule::parse(const std::string& text, const std::vector<int>& segment_lengths) {
  ModeSchedule s;
  s.segment_lengths = segment_lengths;
  for (char c : text) {
    if (c == ',' || c == ' ') continue;
    s.segments.push_back(mode_from_letter(c));
  }
  if (s.segments.size() != segment_lengths.size()) {
    throw std::runtime_error("mode schedule '" + text + "' does not match segment count " +
                             std::to_string(segment_lengths.size()));
  }
  return s;
}

ModeSchedule ModeSchedule::uniform(ContactMode mode, const std::vector<int>& segment_lengths) {
  ModeSchedule s;
  s.segment_lengths = segment_lengths;
  s.segments.assign(segment_lengths.size(), mode);
  return s;
}

LinearConstraintSet LinearConstraintSet::empty(int dim) {
  LinearConstraintSet c;
  c.E.resize(0, dim);
  c.e.resize(0);
  c.G.resize(0, dim);
  c.g.resize(0);
  return c;
}

void LinearConstraintSet::append(const LinearConstraintSet& other) {
  if (other.E.cols() != E.cols()) throw std::invalid_argument("constraint dimension mismatch");
  auto stack = [](Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd out(A.rows() + B.rows(), A.cols());
    out << A, B;
    A = std::move(out);
  };
  auto stackv = [](Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd out(a.size() + b.size());
    out << a, b;
    a = std::move(out);
  };
  stack(E, other.E);
  stackv(e, other.e);
  stack(G, other.G);
  stackv(g, other.g);
}

bool LinearConstraintSet::satisfied(const Eigen::VectorXd& ubar, double tol) const {
  if (E.rows() > 0 && (E * ubar - e).cwiseAbs().maxCoeff() > tol) return false;
  if (G.rows() > 0 && (G * ubar - g).maxCoeff() > tol) return false;
  return true;
}

LinearConstraintSet mode_independent_constraints(const Model& model, int c, const ControlInput& u_star) {
  int m = model.input_dim();
  int C = model.contacts();
  double mu = model.params.mu_p;
  LinearConstraintSet set = LinearConstraintSet::empty(m);
  set.G = Eigen::MatrixXd::Zero(3, m);
  set.g = Eigen::VectorXd::Zero(3);
  // -f_n <= 0
  set.G(0, c) = -1.0;
  set.g(0) = u_star.fn(c);
  // f_t - mu f_n <= 0
  set.G(1, C + c) = 1.0;
  set.G(1, c) = -mu;
  set.g(1) = mu * u_star.fn(c) - u_star.ft(c);
  // -f_t - mu f_n <= 0
  set.G(2, C + c) = -1.0;
  set.G(2, c) = -mu;
  set.g(2) = mu * u_star.fn(c) + u_star.ft(c);
  return set;
}

LinearConstraintSet mode_constraints(const Model& model, ContactMode mode, int c, const ControlInput& u_star,
                                     bool include_rate_row) {
  int m = model.input_dim();
  int C = model.contacts();
  double mu = model.params.mu_p;
  LinearConstraintSet set = LinearConstraintSet::empty(m);
  if (mode == ContactMode::Sticking) {
    if (include_rate_row) {
      // phidot = 0
      set.E = Eigen::MatrixXd::Zero(1, m);
      set.E(0, m - 1) = 1.0;
      set.e = Eigen::VectorXd::Constant(1, -u_star.phidot());
    }
    return set;
  }
  double sign = mode == ContactMode::SlidingLeft ? 1.0 : -1.0;
  // f_t = sign * mu * f_n
  set.E = Eigen::MatrixXd::Zero(1, m);
  set.E(0, C + c) = 1.0;
  set.E(0, c) = -sign * mu;
  set.e = Eigen::VectorXd::Constant(1, sign * mu * u_star.fn(c) - u_star.ft(c));
  if (include_rate_row) {
    // sign * phidot >= 0
    set.G = Eigen::MatrixXd::Zero(1, m);
    set.G(0, m - 1) = -sign;
    set.g = Eigen::VectorXd::Constant(1, sign * u_star.phidot());
  }
  return set;
}

LinearConstraintSet step_constraints(const Model& model, ContactMode mode, const ControlInput& u_star) {
  LinearConstraintSet set = LinearConstraintSet::empty(model.input_dim());
  for (int c = 0; c < model.contacts(); ++c) {
    set.append(mode_independent_constraints(model, c, u_star));
  }
  for (int c = 0; c < model.contacts(); ++c) {
    set.append(mode_constraints(model, mode, c, u_star, c == 0));
  }
  return set;
}

}  // namespace pushmpc
