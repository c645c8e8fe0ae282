#include "pushmpc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "pushmpc/config.hpp"

namespace pushmpc {

namespace {

// Bound used for the rate-sign rows of modes a schedule does not select, so
// every schedule shares one inequality layout and warm starts carry over.
constexpr double kRelaxed = 1e6;

constexpr int kFree = -1;

// Canonical order for objective ties: segment 0 most significant, S < L < R.
// Both exact solvers resolve ties this way, so they always return the same
// (schedule, objective) pair and downstream artifacts stay reproducible.
bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Warm-started solves of the same schedule can land a few ulp apart
// depending on the path taken.  Candidates inside this relative band around
// the incumbent are re-solved without a warm start, and those canonical
// values are compared exactly, so the winner never depends on search order.
constexpr double kTieBand = 1e-9;

double tie_tol(double reference) {
  return kTieBand * std::max(1.0, std::abs(reference));
}

}  // namespace

void MpcConfig::validate(int input_dim) const {
  if (!(h > 0.0)) throw std::invalid_argument("mpc: step h must be positive");
  if (horizon < 1) throw std::invalid_argument("mpc: horizon must be at least 1");
  int total = 0;
  for (int len : segment_lengths) {
    if (len < 1) throw std::invalid_argument("mpc: segment lengths must be positive");
    total += len;
  }
  if (total != horizon) throw std::invalid_argument("mpc: segment lengths must partition the horizon");
  if (q.minCoeff() < 0.0 || q_n.minCoeff() < 0.0) {
    throw std::invalid_argument("mpc: state weights must be non-negative");
  }
  if (r.size() != input_dim) throw std::invalid_argument("mpc: input weight size must match the pusher");
  if (!(r.minCoeff() > 0.0)) throw std::invalid_argument("mpc: input weights must be positive");
  if (int(w.size()) != segment_count()) {
    throw std::invalid_argument("mpc: one sliding penalty per segment required");
  }
  if (w.size() > 0 && w.minCoeff() < 0.0) {
    throw std::invalid_argument("mpc: sliding penalties must be non-negative");
  }
}

MpcConfig MpcConfig::point_pusher() {
  MpcConfig c;
  c.q = 10.0 * Eigen::Vector4d(3.0, 3.0, 0.1, 0.0);
  c.q_n = 2000.0 * Eigen::Vector4d(3.0, 3.0, 0.1, 0.0);
  c.r = 0.5 * Eigen::Vector3d(1.0, 1.0, 0.01);
  c.w = Eigen::VectorXd(8);
  c.w << 0.0, 0.3, 0.1, 0.1, 0.1, 0.0, 0.0, 0.0;
  return c;
}

MpcConfig MpcConfig::line_pusher() {
  MpcConfig c;
  c.q = 10.0 * Eigen::Vector4d(1.0, 1.0, 1.0, 0.1);
  c.q_n = 2000.0 * Eigen::Vector4d(1.0, 1.0, 1.0, 0.1);
  c.r = Eigen::VectorXd(5);
  c.r << 1.0, 1.0, 1.0, 1.0, 0.01;
  c.w = Eigen::VectorXd(8);
  c.w << 0.0, 0.3, 0.1, 0.1, 0.1, 0.0, 0.0, 0.0;
  return c;
}

MpcConfig MpcConfig::from_config(const Config& cfg, const Model& model) {
  MpcConfig c = model.params.pusher == PusherKind::Line ? line_pusher() : point_pusher();
  c.h = cfg.get_double("mpc.h", c.h);
  c.horizon = cfg.get_int("mpc.horizon", c.horizon);
  if (cfg.has("mpc.segments")) {
    c.segment_lengths.clear();
    for (double v : cfg.get_list("mpc.segments")) {
      int len = int(std::lround(v));
      if (std::abs(v - len) > 1e-9) throw std::invalid_argument("mpc.segments must be integers");
      c.segment_lengths.push_back(len);
    }
  }
  auto read_vec = [&cfg](const std::string& key, Eigen::VectorXd& out) {
    if (!cfg.has(key)) return;
    const std::vector<double> vals = cfg.get_list(key);
    out = Eigen::Map<const Eigen::VectorXd>(vals.data(), long(vals.size()));
  };
  Eigen::VectorXd q4 = c.q, qn4 = c.q_n;
  read_vec("mpc.q", q4);
  read_vec("mpc.q_n", qn4);
  if (q4.size() != 4 || qn4.size() != 4) throw std::invalid_argument("mpc.q and mpc.q_n need 4 entries");
  c.q = q4;
  c.q_n = qn4;
  read_vec("mpc.r", c.r);
  read_vec("mpc.w", c.w);
  if (int(c.w.size()) != c.segment_count()) {
    // Segment layout changed without a matching penalty list: keep the
    // default per-segment pattern truncated or zero-padded to fit.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(c.segment_count());
    for (int j = 0; j < c.segment_count() && j < int(c.w.size()); ++j) w(j) = c.w(j);
    c.w = w;
  }
  c.validate(model.input_dim());
  return c;
}

MpcWindow make_window(const NominalTrajectory& traj, int start_index, const MpcConfig& cfg) {
  if (traj.size() < 1) throw std::invalid_argument("make_window: empty trajectory");
  if (start_index < 0 || start_index >= traj.size()) {
    throw std::invalid_argument("make_window: start index out of range");
  }
  if (!(traj.dt > 0.0)) throw std::invalid_argument("make_window: trajectory needs uniform sampling");
  const double ratio = cfg.h / traj.dt;
  const int stride = std::max(1, int(std::lround(ratio)));
  if (std::abs(stride * traj.dt - cfg.h) > 1e-9) {
    throw std::invalid_argument("make_window: mpc step must be a multiple of the trajectory sampling");
  }

  MpcWindow w;
  w.start_index = start_index;
  w.stride = stride;
  w.world_start = traj.at(start_index).state;
  const Eigen::Matrix2d rot_inv = rot2(-w.world_start.theta);
  const Eigen::Vector2d p0(w.world_start.x, w.world_start.y);
  w.nominal.reserve(size_t(cfg.horizon) + 1);
  for (int k = 0; k <= cfg.horizon; ++k) {
    TrajectoryPoint p = traj.at_or_last(start_index + k * stride);
    const Eigen::Vector2d rel = rot_inv * (Eigen::Vector2d(p.state.x, p.state.y) - p0);
    p.state.x = rel.x();
    p.state.y = rel.y();
    p.state.theta -= w.world_start.theta;
    w.nominal.push_back(p);
  }
  w.right_turn = w.nominal[1].state.theta - w.nominal[0].state.theta < -1e-12;
  return w;
}

Eigen::Vector4d window_error(const MpcWindow& window, const SystemState& state) {
  const Eigen::Vector2d dp(state.x - window.world_start.x, state.y - window.world_start.y);
  const Eigen::Vector2d rel = rot2(-window.world_start.theta) * dp;
  return {rel.x(), rel.y(), state.theta - window.world_start.theta, state.phi - window.world_start.phi};
}

CondensedMpc::CondensedMpc(const Model& model, const MpcConfig& cfg) : model_(model), cfg_(cfg) {
  cfg_.validate(model_.input_dim());
  m_ = model_.input_dim();
  nv_ = cfg_.horizon * m_;
  seg_of_step_.resize(size_t(cfg_.horizon));
  int step = 0;
  for (int j = 0; j < cfg_.segment_count(); ++j) {
    for (int i = 0; i < cfg_.segment_lengths[size_t(j)]; ++i) seg_of_step_[size_t(step++)] = j;
  }
}

void CondensedMpc::set_window(const MpcWindow& window) {
  const int n_points = cfg_.horizon + 1;
  if (int(window.nominal.size()) != n_points) {
    throw std::invalid_argument("set_window: window must hold horizon+1 nominal samples");
  }
  if (window_set_ && int(window_.nominal.size()) == n_points) {
    // Windows on the same steady arc canonicalize to the same problem; keep
    // the factorization and catalog, only the world anchor moves.
    bool same = true;
    for (int k = 0; k < n_points && same; ++k) {
      const TrajectoryPoint& a = window_.nominal[size_t(k)];
      const TrajectoryPoint& b = window.nominal[size_t(k)];
      same = (a.state.vec() - b.state.vec()).lpNorm<Eigen::Infinity>() <= 1e-12 &&
             (a.input.v - b.input.v).lpNorm<Eigen::Infinity>() <= 1e-12;
    }
    if (same) {
      window_ = window;
      error_set_ = false;
      return;
    }
  }
  window_ = window;
  window_set_ = true;
  error_set_ = false;

  const int n_steps = cfg_.horizon;
  ad_.assign(size_t(n_steps), Eigen::Matrix4d::Zero());
  bd_.assign(size_t(n_steps), Eigen::MatrixXd::Zero(4, m_));
  for (int k = 0; k < n_steps; ++k) {
    const TrajectoryPoint& p = window_.nominal[size_t(k)];
    const Linearization lin = linearize(model_, p.state, p.input);
    ad_[size_t(k)] = Eigen::Matrix4d::Identity() + cfg_.h * lin.A;
    bd_[size_t(k)] = cfg_.h * lin.B;
  }

  // Condense e_{k+1} = A_k e_k + B_k ubar_k into [e_1..e_N] = Phi e_0 + T U.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(4 * n_steps, nv_);
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(4 * n_steps, 4);
  for (int k = 0; k < n_steps; ++k) {
    if (k == 0) {
      Phi.topRows<4>() = ad_[0];
    } else {
      Phi.middleRows<4>(4 * k) = ad_[size_t(k)] * Phi.middleRows<4>(4 * (k - 1));
      T.block(4 * k, 0, 4, k * m_) = ad_[size_t(k)] * T.block(4 * (k - 1), 0, 4, k * m_);
    }
    T.block(4 * k, k * m_, 4, m_) = bd_[size_t(k)];
  }
  Eigen::VectorXd qbar(4 * n_steps);
  for (int k = 0; k < n_steps; ++k) qbar.segment<4>(4 * k) = k + 1 < n_steps ? cfg_.q : cfg_.q_n;
  Eigen::VectorXd rbar(nv_);
  for (int k = 0; k < n_steps; ++k) rbar.segment(k * m_, m_) = cfg_.r;

  const Eigen::MatrixXd qt = qbar.asDiagonal() * T;
  hess_ = 2.0 * (T.transpose() * qt);
  hess_.diagonal() += 2.0 * rbar;
  fmat_ = 2.0 * qt.transpose() * Phi;
  offset_ = Phi.transpose() * qbar.asDiagonal() * Phi + Eigen::Matrix4d(cfg_.q.asDiagonal());

  solver_.set_hessian(hess_);

  // Constraint catalog: every row any schedule can use, in step order.
  steps_.assign(size_t(n_steps), StepRows{});
  const int contacts = model_.contacts();
  for (int k = 0; k < n_steps; ++k) {
    const ControlInput& u_star = window_.nominal[size_t(k)].input;
    LinearConstraintSet cone = LinearConstraintSet::empty(m_);
    for (int c = 0; c < contacts; ++c) cone.append(mode_independent_constraints(model_, c, u_star));
    const LinearConstraintSet stick = mode_constraints(model_, ContactMode::Sticking, 0, u_star, true);
    LinearConstraintSet left = LinearConstraintSet::empty(m_);
    LinearConstraintSet right = LinearConstraintSet::empty(m_);
    for (int c = 0; c < contacts; ++c) {
      left.append(mode_constraints(model_, ContactMode::SlidingLeft, c, u_star, c == 0));
      right.append(mode_constraints(model_, ContactMode::SlidingRight, c, u_star, c == 0));
    }

    const int cone_rows = int(cone.G.rows());
    const int rows = cone_rows + 1 + contacts + 1 + contacts + 1;
    Eigen::MatrixXd batch = Eigen::MatrixXd::Zero(rows, nv_);
    int rix = 0;
    auto put = [&](const Eigen::RowVectorXd& row) {
      batch.block(rix, k * m_, 1, m_) = row;
      ++rix;
    };
    for (int i = 0; i < cone_rows; ++i) put(cone.G.row(i));
    put(stick.E.row(0));
    for (int c = 0; c < contacts; ++c) put(left.E.row(c));
    put(left.G.row(0));
    for (int c = 0; c < contacts; ++c) put(right.E.row(c));
    put(right.G.row(0));

    const int base = solver_.add_rows(batch, k * m_);
    StepRows& sr = steps_[size_t(k)];
    sr.cone_ids.resize(size_t(cone_rows));
    for (int i = 0; i < cone_rows; ++i) sr.cone_ids[size_t(i)] = base + i;
    sr.cone_rhs = cone.g;
    int id = base + cone_rows;
    sr.stick_eq_id = id++;
    sr.stick_rhs = stick.e(0);
    sr.left_eq_ids.resize(size_t(contacts));
    for (int c = 0; c < contacts; ++c) sr.left_eq_ids[size_t(c)] = id++;
    sr.left_eq_rhs = left.e;
    sr.left_rate_id = id++;
    sr.left_rate_rhs = left.g(0);
    sr.right_eq_ids.resize(size_t(contacts));
    for (int c = 0; c < contacts; ++c) sr.right_eq_ids[size_t(c)] = id++;
    sr.right_eq_rhs = right.e;
    sr.right_rate_id = id++;
    sr.right_rate_rhs = right.g(0);
  }
}

void CondensedMpc::set_error(const Eigen::Vector4d& e0) {
  if (!window_set_) throw std::logic_error("set_window must be called before set_error");
  e0_ = e0;
  offset_value_ = e0.dot(offset_ * e0);
  solver_.set_linear_cost(fmat_ * e0);
  error_set_ = true;
}

double CondensedMpc::mode_penalty(const ModeSchedule& schedule) const {
  double w = 0.0;
  for (int j = 0; j < schedule.segment_count(); ++j) {
    if (schedule.segments[size_t(j)] != ContactMode::Sticking) w += cfg_.w(j);
  }
  return w;
}

Eigen::VectorXd CondensedMpc::feasible_point(const std::vector<int>& segment_modes) const {
  if (!window_set_) throw std::logic_error("set_window must be called before feasible_point");
  const int contacts = model_.contacts();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nv_);
  for (int k = 0; k < cfg_.horizon; ++k) {
    const int mode = segment_modes[size_t(seg_of_step_[size_t(k)])];
    if (mode != int(ContactMode::SlidingLeft) && mode != int(ContactMode::SlidingRight)) continue;
    const double sgn = mode == int(ContactMode::SlidingLeft) ? 1.0 : -1.0;
    const ControlInput& u_star = window_.nominal[size_t(k)].input;
    for (int c = 0; c < contacts; ++c) {
      z(k * m_ + contacts + c) = sgn * model_.params.mu_p * u_star.fn(c) - u_star.ft(c);
    }
    const double rate = -u_star.phidot();
    z(k * m_ + 2 * contacts) = sgn > 0.0 ? std::max(0.0, rate) : std::min(0.0, rate);
  }
  return z;
}

CondensedMpc::Assembly CondensedMpc::assemble(const std::vector<int>& segment_modes) const {
  if (int(segment_modes.size()) != cfg_.segment_count()) {
    throw std::invalid_argument("assemble: one mode per segment required");
  }
  Assembly a;
  const int n_steps = cfg_.horizon;
  const int contacts = model_.contacts();

  int eq_count = 0;
  for (int k = 0; k < n_steps; ++k) {
    const int mode = segment_modes[size_t(seg_of_step_[size_t(k)])];
    if (mode == int(ContactMode::Sticking)) eq_count += 1;
    if (mode == int(ContactMode::SlidingLeft) || mode == int(ContactMode::SlidingRight)) eq_count += contacts;
  }
  const int cone_total = int(steps_[0].cone_ids.size()) * n_steps;
  a.prep.eq_ids.reserve(size_t(eq_count));
  a.prep.e.resize(eq_count);
  a.prep.ineq_ids.reserve(size_t(cone_total + 2 * n_steps));
  a.prep.g.resize(cone_total + 2 * n_steps);

  int ei = 0;
  int gi = 0;
  for (int k = 0; k < n_steps; ++k) {
    const StepRows& sr = steps_[size_t(k)];
    for (size_t i = 0; i < sr.cone_ids.size(); ++i) {
      a.prep.ineq_ids.push_back(sr.cone_ids[i]);
      a.prep.g(gi++) = sr.cone_rhs(long(i));
    }
  }
  for (int k = 0; k < n_steps; ++k) {
    const StepRows& sr = steps_[size_t(k)];
    const int mode = segment_modes[size_t(seg_of_step_[size_t(k)])];
    switch (mode) {
      case int(ContactMode::Sticking):
        a.prep.eq_ids.push_back(sr.stick_eq_id);
        a.prep.e(ei++) = sr.stick_rhs;
        break;
      case int(ContactMode::SlidingLeft):
        for (int c = 0; c < contacts; ++c) {
          a.prep.eq_ids.push_back(sr.left_eq_ids[size_t(c)]);
          a.prep.e(ei++) = sr.left_eq_rhs(c);
        }
        break;
      case int(ContactMode::SlidingRight):
        for (int c = 0; c < contacts; ++c) {
          a.prep.eq_ids.push_back(sr.right_eq_ids[size_t(c)]);
          a.prep.e(ei++) = sr.right_eq_rhs(c);
        }
        break;
      default:
        break;  // free segment: cone rows only
    }
    a.prep.ineq_ids.push_back(sr.left_rate_id);
    a.prep.g(gi++) = mode == int(ContactMode::SlidingLeft) ? sr.left_rate_rhs : kRelaxed;
    a.prep.ineq_ids.push_back(sr.right_rate_id);
    a.prep.g(gi++) = mode == int(ContactMode::SlidingRight) ? sr.right_rate_rhs : kRelaxed;
  }

  a.z0 = feasible_point(segment_modes);
  for (int j = 0; j < cfg_.segment_count(); ++j) {
    if (segment_modes[size_t(j)] == int(ContactMode::SlidingLeft) ||
        segment_modes[size_t(j)] == int(ContactMode::SlidingRight)) {
      a.penalty += cfg_.w(j);
    }
  }
  return a;
}

ScheduleSolve CondensedMpc::run_assembly(const std::vector<int>& segment_modes,
                                         const std::vector<int>* warm_active, BranchStats* stats) {
  if (!error_set_) throw std::logic_error("set_error must be called before solving");
  const Assembly a = assemble(segment_modes);
  static const std::vector<int> kNoWarm;
  QpSolution qp = solver_.solve_prepared(a.prep, a.z0, warm_active ? *warm_active : kNoWarm);
  if (qp.status != QpStatus::Optimal) {
    throw std::runtime_error("mode-schedule solve did not converge");
  }
  if (stats) {
    stats->solves += 1;
    stats->iterations += qp.iterations;
  }
  ScheduleSolve out;
  out.qp = std::move(qp);
  out.penalty = a.penalty;
  out.objective = out.qp.objective + offset_value_ + a.penalty;
  return out;
}

ScheduleSolve CondensedMpc::solve_schedule(const ModeSchedule& schedule, const std::vector<int>* warm_active) {
  if (schedule.segment_lengths != cfg_.segment_lengths) {
    throw std::invalid_argument("solve_schedule: schedule layout does not match the configuration");
  }
  std::vector<int> seg(size_t(schedule.segment_count()));
  for (int j = 0; j < schedule.segment_count(); ++j) seg[size_t(j)] = int(schedule.segments[size_t(j)]);
  ScheduleSolve out = run_assembly(seg, warm_active, nullptr);
  out.schedule = schedule;
  return out;
}

ScheduleSolve CondensedMpc::solve_exhaustive(BranchStats* stats) {
  const int M = cfg_.segment_count();
  std::vector<int> digits(size_t(M), int(ContactMode::Sticking));
  BranchStats local;
  BranchStats* st = stats ? stats : &local;

  ScheduleSolve best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> warm;
  bool more = true;
  while (more) {
    ScheduleSolve sol = run_assembly(digits, warm.empty() ? nullptr : &warm, st);
    st->leaves += 1;
    warm = sol.qp.active;
    // Enumeration runs in lex order, so strict improvement keeps the
    // lex-smallest schedule among exact ties.
    if (sol.objective < best_obj) {
      best_obj = sol.objective;
      best = std::move(sol);
      best.schedule.segment_lengths = cfg_.segment_lengths;
      best.schedule.segments.resize(size_t(M));
      for (int j = 0; j < M; ++j) best.schedule.segments[size_t(j)] = ContactMode(digits[size_t(j)]);
    }
    // Odometer over segments, last digit fastest, S < L < R.
    more = false;
    for (int j = M - 1; j >= 0; --j) {
      if (digits[size_t(j)] < int(ContactMode::SlidingRight)) {
        digits[size_t(j)] += 1;
        std::fill(digits.begin() + j + 1, digits.end(), int(ContactMode::Sticking));
        more = true;
        break;
      }
    }
  }
  return best;
}

ScheduleSolve CondensedMpc::solve_branch_and_bound(BranchStats* stats) {
  const int M = cfg_.segment_count();
  BranchStats local;
  BranchStats* st = stats ? stats : &local;

  ScheduleSolve best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<int> assign(size_t(M), kFree);
  std::vector<int> best_assign;

  struct Child {
    int mode;
    double objective;
    ScheduleSolve sol;
  };

  // An equal-bound subtree can only matter through an exact tie, and its
  // lex-smallest leaf is the assigned prefix completed with sticking.
  const auto tie_can_improve = [&](int depth, int mode) {
    if (best_assign.empty()) return true;
    std::vector<int> candidate(assign.begin(), assign.begin() + depth);
    candidate.push_back(mode);
    candidate.resize(size_t(M), int(ContactMode::Sticking));
    return lex_less(candidate, best_assign);
  };

  // Depth-first over segment assignments, descending into the cheapest
  // child first.  A node's relaxation keeps only the cone rows on its free
  // steps, so its objective lower-bounds every completion and the bound can
  // prune against the incumbent.
  std::function<void(int, const ScheduleSolve&)> dfs = [&](int depth, const ScheduleSolve& node) {
    if (depth == M) {
      if (node.objective < best_obj ||
          (node.objective == best_obj && lex_less(assign, best_assign))) {
        best_obj = node.objective;
        best = node;
        best_assign = assign;
        best.schedule.segment_lengths = cfg_.segment_lengths;
        best.schedule.segments.resize(size_t(M));
        for (int j = 0; j < M; ++j) best.schedule.segments[size_t(j)] = ContactMode(assign[size_t(j)]);
      }
      return;
    }
    std::vector<Child> children;
    children.reserve(3);
    for (int mode : {int(ContactMode::Sticking), int(ContactMode::SlidingLeft), int(ContactMode::SlidingRight)}) {
      assign[size_t(depth)] = mode;
      ScheduleSolve sol = run_assembly(assign, &node.qp.active, st);
      children.push_back(Child{mode, sol.objective, std::move(sol)});
    }
    assign[size_t(depth)] = kFree;
    std::stable_sort(children.begin(), children.end(),
                     [](const Child& a, const Child& b) { return a.objective < b.objective; });
    for (Child& ch : children) {
      if (ch.objective > best_obj ||
          (ch.objective == best_obj && !tie_can_improve(depth, ch.mode))) {
        st->pruned += 1;
        continue;
      }
      if (depth + 1 == M) st->leaves += 1;
      assign[size_t(depth)] = ch.mode;
      dfs(depth + 1, ch.sol);
      assign[size_t(depth)] = kFree;
    }
  };

  ScheduleSolve root = run_assembly(assign, nullptr, st);
  dfs(0, root);
  return best;
}

Eigen::MatrixXd CondensedMpc::rollout(const Eigen::Vector4d& e0, const Eigen::VectorXd& ubar) const {
  if (!window_set_) throw std::logic_error("set_window must be called before rollout");
  if (ubar.size() != nv_) throw std::invalid_argument("rollout: deviation size mismatch");
  Eigen::MatrixXd e(4, cfg_.horizon + 1);
  e.col(0) = e0;
  for (int k = 0; k < cfg_.horizon; ++k) {
    e.col(k + 1) = ad_[size_t(k)] * e.col(k) + bd_[size_t(k)] * ubar.segment(k * m_, m_);
  }
  return e;
}

double CondensedMpc::objective_value(const Eigen::Vector4d& e0, const Eigen::VectorXd& ubar,
                                     const ModeSchedule& schedule) const {
  const Eigen::MatrixXd e = rollout(e0, ubar);
  double j = 0.0;
  for (int k = 0; k < cfg_.horizon; ++k) {
    j += e.col(k).dot(cfg_.q.asDiagonal() * e.col(k));
    const Eigen::VectorXd u = ubar.segment(k * m_, m_);
    j += u.dot(cfg_.r.asDiagonal() * u);
  }
  j += e.col(cfg_.horizon).dot(cfg_.q_n.asDiagonal() * e.col(cfg_.horizon));
  return j + mode_penalty(schedule);
}

}  // namespace pushmpc
