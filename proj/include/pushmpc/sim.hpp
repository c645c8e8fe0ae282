#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pushmpc/dataset.hpp"
#include "pushmpc/learning.hpp"
#include "pushmpc/mpc.hpp"
#include "pushmpc/trajectory.hpp"

namespace pushmpc {

enum class ControllerKind { Miqp, Learned, OpenLoop };

const char* controller_name(ControllerKind kind);
ControllerKind controller_from_name(const std::string& name);

// Instantaneous pose displacement injected while the plant runs.
struct Perturbation {
  double time = 0.0;
  Eigen::Vector4d displacement = Eigen::Vector4d::Zero();  // [x y theta phi]
};

struct SimConfig {
  double plant_step = 1e-3;
  double controller_period = 1e-2;
  double duration = 0.0;  // seconds of closed-loop run
  Eigen::Vector4d initial_error = Eigen::Vector4d::Zero();
  std::vector<Perturbation> perturbations;
  double sensor_noise_std = 0.0;  // same std on all four measured pose components
  uint64_t seed = 1;
  double plant_mu_g_scale = 1.1;  // plant-vs-controller ground friction mismatch
  bool record_timing = false;     // solve_us stays 0 unless set, keeping logs replayable

  void validate() const;
};

struct TrackingLog {
  struct Row {
    double t = 0.0;
    SystemState state;
    SystemState reference;
    Eigen::Vector4d error = Eigen::Vector4d::Zero();  // state minus reference, wrapped heading
    Eigen::VectorXd input;                            // applied this period
    std::string schedule;                             // compact letters, "-" when not solved
    std::string solver;
    double objective = 0.0;                           // controller objective, 0 when not solved
    long solve_us = 0;
  };

  std::vector<Row> rows;
  int contacts = 1;
  bool terminated_early = false;
  std::string termination_reason;

  double rms_position_error() const;
  double max_position_error() const;
  double final_position_error() const;
  double mean_solve_us() const;
  long max_solve_us() const;
  // Seconds from `after` until the position error first drops below
  // `threshold`; negative when it never does.
  double recovery_time(double after, double threshold) const;
};

void save_tracking_log_csv(const TrackingLog& log, const std::string& path);

// Controller-call view of the same run: `t,solver,objective,solve_time_us,schedule`.
void save_solve_log_csv(const TrackingLog& log, const std::string& path);

// Integrates the nonlinear plant with RK4 and zero-order-hold inputs while
// the selected controller runs once per period on the measured pose.
// `classifier` is required for ControllerKind::Learned.
TrackingLog run_closed_loop(const Model& model, const MpcConfig& cfg, const NominalTrajectory& traj,
                            ControllerKind kind, const MlpClassifier* classifier,
                            const SimConfig& sim);

// First-segment optimal mode over an (ex, ey) grid at fixed heading and
// placement errors.
struct ModeMapSpec {
  double half_extent = 0.06;  // grid covers [-half_extent, half_extent] in both axes
  int cells_per_side = 41;
  double etheta = 5.0 * 0.017453292519943295;
  double ephi = 0.0;

  void validate() const;
};

struct ModeMap {
  ModeMapSpec spec;
  Eigen::MatrixXi modes;  // cells x cells, [row = ey index][col = ex index]

  double ex_at(int col) const;
  double ey_at(int row) const;
  // Fraction of interior cells sharing a mode with at least two of their
  // four neighbors.
  double interior_neighbor_agreement() const;
};

double map_agreement(const ModeMap& a, const ModeMap& b);

ModeMap mode_region_map_miqp(const Model& model, const MpcConfig& cfg, const NominalTrajectory& traj,
                             int start_index, const ModeMapSpec& spec);
ModeMap mode_region_map_classifier(const MlpClassifier& classifier, const ModeMapSpec& spec);

void save_mode_map_csv(const ModeMap& map, const std::string& path);

// Times the exhaustive enumeration, branch-and-bound, and learned-schedule
// solvers on identical error states at one window.
struct BenchReport {
  int trials = 0;
  double median_exhaustive_us = 0.0, p95_exhaustive_us = 0.0;
  double median_bnb_us = 0.0, p95_bnb_us = 0.0;
  double median_learned_us = 0.0, p95_learned_us = 0.0;
  double ratio_exhaustive_over_learned = 0.0;
  int bnb_schedule_mismatches = 0;  // against exhaustive enumeration

  std::string to_text() const;
};

BenchReport bandwidth_benchmark(const Model& model, const MpcConfig& cfg,
                                const NominalTrajectory& traj, int start_index,
                                const MlpClassifier& classifier, int trials, uint64_t seed);

}  // namespace pushmpc
