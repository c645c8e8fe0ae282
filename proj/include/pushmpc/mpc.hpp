#pragma once

#include <vector>

#include "pushmpc/modes.hpp"
#include "pushmpc/qp.hpp"
#include "pushmpc/trajectory.hpp"

namespace pushmpc {

class Config;

// Horizon, weights, and mode-segment layout of the tracking controller.
struct MpcConfig {
  double h = 0.3;    // prediction step, s
  int horizon = 35;  // steps per solve
  std::vector<int> segment_lengths = {1, 5, 5, 5, 5, 5, 5, 4};
  Eigen::Vector4d q = Eigen::Vector4d::Zero();    // stage error weights (diagonal)
  Eigen::Vector4d q_n = Eigen::Vector4d::Zero();  // terminal error weights
  Eigen::VectorXd r;  // input deviation weights, size input_dim
  Eigen::VectorXd w;  // per-segment penalty charged when it slides

  int segment_count() const { return int(segment_lengths.size()); }
  void validate(int input_dim) const;

  // Defaults tuned for the point pusher on a disc.
  static MpcConfig point_pusher();
  // Defaults tuned for the line pusher on a square.
  static MpcConfig line_pusher();
  // Pusher-specific defaults overridden by mpc.* keys.
  static MpcConfig from_config(const Config& cfg, const Model& model);
};

// Reference window for one controller solve: N+1 nominal samples expressed
// in the frame of the first one (start pose at the origin), which makes the
// condensed problem identical for every start on the same steady arc.
struct MpcWindow {
  std::vector<TrajectoryPoint> nominal;  // size horizon + 1, canonical frame
  SystemState world_start;               // nominal pose at the window start
  int start_index = 0;
  int stride = 1;       // trajectory samples per prediction step
  bool right_turn = false;  // initial arc turns clockwise
};

MpcWindow make_window(const NominalTrajectory& traj, int start_index, const MpcConfig& cfg);

// Tracking error of a world-frame state, rotated into the window frame.
Eigen::Vector4d window_error(const MpcWindow& window, const SystemState& state);

struct ScheduleSolve {
  ModeSchedule schedule;
  QpSolution qp;           // stacked input deviations over the horizon
  double objective = 0.0;  // tracking cost plus the sliding-segment penalty
  double penalty = 0.0;    // the sliding-segment share of the objective
};

struct BranchStats {
  int solves = 0;
  int leaves = 0;
  int pruned = 0;
  long long iterations = 0;
};

// Condensed finite-horizon tracking problem over input deviations, with the
// per-step mode constraints held in the solver catalog so that many mode
// schedules can be solved against one factorization.
class CondensedMpc {
 public:
  CondensedMpc(const Model& model, const MpcConfig& cfg);

  const MpcConfig& config() const { return cfg_; }
  const Model& model() const { return model_; }
  int horizon() const { return cfg_.horizon; }
  int input_dim() const { return m_; }
  int vars() const { return nv_; }

  // Builds the condensed matrices and the constraint catalog for a window.
  void set_window(const MpcWindow& window);
  const MpcWindow& window() const { return window_; }

  // Fixes the initial tracking error (window frame) for subsequent solves.
  void set_error(const Eigen::Vector4d& e0);

  ScheduleSolve solve_schedule(const ModeSchedule& schedule, const std::vector<int>* warm_active = nullptr);
  // Both exact solvers break objective ties toward the lexicographically
  // smallest schedule (segment 0 most significant, S < L < R), so they
  // return one canonical optimum.
  ScheduleSolve solve_exhaustive(BranchStats* stats = nullptr);
  ScheduleSolve solve_branch_and_bound(BranchStats* stats = nullptr);

  // Discrete error dynamics of prediction step k.
  const Eigen::Matrix4d& step_a(int k) const { return ad_[size_t(k)]; }
  const Eigen::MatrixXd& step_b(int k) const { return bd_[size_t(k)]; }
  const Eigen::MatrixXd& hessian() const { return hess_; }
  // Linear cost is error_gain() * e0.
  const Eigen::MatrixXd& error_gain() const { return fmat_; }
  // Constant cost term is e0' error_offset() e0.
  const Eigen::Matrix4d& error_offset() const { return offset_; }

  // Predicted errors [e_0 ... e_N] under stacked deviations.
  Eigen::MatrixXd rollout(const Eigen::Vector4d& e0, const Eigen::VectorXd& ubar) const;
  // Tracking objective of an arbitrary deviation sequence, evaluated from
  // the rollout; agrees with ScheduleSolve::objective at the solution.
  double objective_value(const Eigen::Vector4d& e0, const Eigen::VectorXd& ubar,
                         const ModeSchedule& schedule) const;
  double mode_penalty(const ModeSchedule& schedule) const;

  // Interior point of the constraint set of a schedule (slides sit on their
  // cone edge); used as the solver start, so no feasibility phase is needed.
  Eigen::VectorXd feasible_point(const std::vector<int>& segment_modes) const;

 private:
  struct Assembly {
    ActiveSetQp::Prepared prep;
    Eigen::VectorXd z0;
    double penalty = 0.0;
  };
  // segment_modes: one entry per segment, -1 leaves the segment free.
  Assembly assemble(const std::vector<int>& segment_modes) const;
  ScheduleSolve run_assembly(const std::vector<int>& segment_modes, const std::vector<int>* warm_active,
                             BranchStats* stats);

  Model model_;
  MpcConfig cfg_;
  int m_ = 0;
  int nv_ = 0;
  MpcWindow window_;
  bool window_set_ = false;
  bool error_set_ = false;
  Eigen::Vector4d e0_ = Eigen::Vector4d::Zero();
  double offset_value_ = 0.0;

  std::vector<Eigen::Matrix4d> ad_;
  std::vector<Eigen::MatrixXd> bd_;
  Eigen::MatrixXd hess_;
  Eigen::MatrixXd fmat_;
  Eigen::Matrix4d offset_ = Eigen::Matrix4d::Zero();

  ActiveSetQp solver_;

  // Catalog ids and right-hand sides, per prediction step.
  struct StepRows {
    std::vector<int> cone_ids;
    Eigen::VectorXd cone_rhs;
    int stick_eq_id = -1;
    double stick_rhs = 0.0;
    std::vector<int> left_eq_ids;
    Eigen::VectorXd left_eq_rhs;
    int left_rate_id = -1;
    double left_rate_rhs = 0.0;
    std::vector<int> right_eq_ids;
    Eigen::VectorXd right_eq_rhs;
    int right_rate_id = -1;
    double right_rate_rhs = 0.0;
  };
  std::vector<StepRows> steps_;
  std::vector<int> seg_of_step_;
};

}  // namespace pushmpc
