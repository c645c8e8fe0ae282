#include "pushmpc/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "pushmpc/contact.hpp"
#include "pushmpc/csv.hpp"
#include "pushmpc/io.hpp"

namespace pushmpc {

const char* controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Miqp: return "miqp";
    case ControllerKind::Learned: return "learned";
    case ControllerKind::OpenLoop: return "open_loop";
  }
  return "unknown";
}

ControllerKind controller_from_name(const std::string& name) {
  if (name == "miqp") return ControllerKind::Miqp;
  if (name == "learned") return ControllerKind::Learned;
  if (name == "open_loop") return ControllerKind::OpenLoop;
  throw std::invalid_argument("unknown controller '" + name + "' (miqp, learned, open_loop)");
}

void SimConfig::validate() const {
  if (plant_step <= 0.0) throw std::invalid_argument("plant step must be positive");
  if (controller_period < plant_step) {
    throw std::invalid_argument("controller period must be at least the plant step");
  }
  const double sub = controller_period / plant_step;
  if (std::abs(sub - std::round(sub)) > 1e-9) {
    throw std::invalid_argument("controller period must be a multiple of the plant step");
  }
  if (duration <= 0.0) throw std::invalid_argument("simulation duration must be positive");
  if (sensor_noise_std < 0.0) throw std::invalid_argument("sensor noise std must be nonnegative");
  if (plant_mu_g_scale <= 0.0) throw std::invalid_argument("plant friction scale must be positive");
  for (const auto& p : perturbations) {
    if (p.time < 0.0 || p.time >= duration) {
      throw std::invalid_argument("perturbation times must fall within the run duration");
    }
  }
}

namespace {

double position_error(const TrackingLog::Row& row) { return row.error.head<2>().norm(); }

SystemState rk4_step(const Model& plant, const SystemState& state, const ControlInput& u, double h) {
  const Eigen::Vector4d x = state.vec();
  const Eigen::Vector4d k1 = state_derivative(plant, state, u);
  const Eigen::Vector4d k2 = state_derivative(plant, SystemState::from(x + 0.5 * h * k1), u);
  const Eigen::Vector4d k3 = state_derivative(plant, SystemState::from(x + 0.5 * h * k2), u);
  const Eigen::Vector4d k4 = state_derivative(plant, SystemState::from(x + h * k3), u);
  return SystemState::from(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

// Projects the force inputs onto the pusher friction cone; the placement
// rate is unconstrained here.
void clamp_to_cone(Eigen::VectorXd& u, double mu_p, int contacts) {
  for (int c = 0; c < contacts; ++c) {
    u(c) = std::max(u(c), 0.0);
    const double lim = mu_p * u(c);
    u(contacts + c) = std::clamp(u(contacts + c), -lim, lim);
  }
}

double cone_violation(const Eigen::VectorXd& u, double mu_p, int contacts) {
  double worst = 0.0;
  for (int c = 0; c < contacts; ++c) {
    worst = std::max(worst, -u(c));
    worst = std::max(worst, std::abs(u(contacts + c)) - mu_p * u(c));
  }
  return worst;
}

long elapsed_us(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

double TrackingLog::rms_position_error() const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& row : rows) sum += row.error.head<2>().squaredNorm();
  return std::sqrt(sum / double(rows.size()));
}

double TrackingLog::max_position_error() const {
  double worst = 0.0;
  for (const auto& row : rows) worst = std::max(worst, position_error(row));
  return worst;
}

double TrackingLog::final_position_error() const {
  return rows.empty() ? 0.0 : position_error(rows.back());
}

double TrackingLog::mean_solve_us() const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& row : rows) sum += double(row.solve_us);
  return sum / double(rows.size());
}

long TrackingLog::max_solve_us() const {
  long worst = 0;
  for (const auto& row : rows) worst = std::max(worst, row.solve_us);
  return worst;
}

double TrackingLog::recovery_time(double after, double threshold) const {
  for (const auto& row : rows) {
    if (row.t > after && position_error(row) < threshold) return row.t - after;
  }
  return -1.0;
}

void save_tracking_log_csv(const TrackingLog& log, const std::string& path) {
  std::vector<std::string> header = {"t",  "x",  "y",      "theta", "phi", "x_ref",
                                     "y_ref", "theta_ref", "ex",    "ey",  "etheta", "ephi"};
  for (int c = 0; c < log.contacts; ++c) header.push_back("fn" + std::to_string(c + 1));
  for (int c = 0; c < log.contacts; ++c) header.push_back("ft" + std::to_string(c + 1));
  header.push_back("phidot");
  header.push_back("schedule");
  header.push_back("solver");
  header.push_back("solve_us");

  std::string text = join_csv(header) + "\n";
  std::vector<std::string> cells;
  cells.reserve(header.size());
  for (const auto& row : log.rows) {
    cells.clear();
    cells.push_back(format_double(row.t));
    cells.push_back(format_double(row.state.x));
    cells.push_back(format_double(row.state.y));
    cells.push_back(format_double(row.state.theta));
    cells.push_back(format_double(row.state.phi));
    cells.push_back(format_double(row.reference.x));
    cells.push_back(format_double(row.reference.y));
    cells.push_back(format_double(row.reference.theta));
    for (int k = 0; k < 4; ++k) cells.push_back(format_double(row.error(k)));
    for (Eigen::Index k = 0; k < row.input.size(); ++k) cells.push_back(format_double(row.input(k)));
    cells.push_back(row.schedule);
    cells.push_back(row.solver);
    cells.push_back(format_int(row.solve_us));
    text += join_csv(cells) + "\n";
  }
  atomic_write_file(path, text);
}

void save_solve_log_csv(const TrackingLog& log, const std::string& path) {
  std::string text = "t,solver,objective,solve_time_us,schedule\n";
  for (const auto& row : log.rows) {
    text += format_double(row.t) + "," + row.solver + "," + format_double(row.objective) + "," +
            format_int(row.solve_us) + "," + row.schedule + "\n";
  }
  atomic_write_file(path, text);
}

TrackingLog run_closed_loop(const Model& model, const MpcConfig& cfg, const NominalTrajectory& traj,
                            ControllerKind kind, const MlpClassifier* classifier,
                            const SimConfig& sim) {
  sim.validate();
  if (kind == ControllerKind::Learned && classifier == nullptr) {
    throw std::invalid_argument("learned controller needs a classifier");
  }

  const int period_steps = int(std::lround(sim.controller_period / traj.dt));
  if (period_steps < 1 || std::abs(period_steps * traj.dt - sim.controller_period) > 1e-9) {
    throw std::invalid_argument("controller period must be a multiple of the trajectory sampling");
  }
  const int steps = int(std::lround(sim.duration / sim.controller_period));
  if (steps < 1) throw std::invalid_argument("duration shorter than one controller period");

  if (kind == ControllerKind::OpenLoop) {
    if (steps * period_steps >= int(traj.size())) {
      throw std::invalid_argument("trajectory too short for the requested duration");
    }
  } else {
    const int stride = int(std::lround(cfg.h / traj.dt));
    if ((steps - 1) * period_steps + cfg.horizon * stride >= int(traj.size())) {
      throw std::invalid_argument(
          "trajectory too short for the requested duration plus the prediction horizon");
    }
  }

  PhysicalParams plant_params = model.params;
  plant_params.mu_g *= sim.plant_mu_g_scale;
  const Model plant = Model::make(plant_params);

  CondensedMpc mpc(model, cfg);
  Rng noise(sim.seed);
  const int contacts = model.contacts();
  const int m = model.input_dim();
  const double limit = placement_limit(model.params);
  const int substeps = int(std::lround(sim.controller_period / sim.plant_step));

  std::vector<Perturbation> pending = sim.perturbations;
  std::sort(pending.begin(), pending.end(),
            [](const Perturbation& a, const Perturbation& b) { return a.time < b.time; });
  size_t next_pert = 0;

  TrackingLog log;
  log.contacts = contacts;
  log.rows.reserve(size_t(steps));

  SystemState state = SystemState::from(traj.at(0).state.vec() + sim.initial_error);
  int consecutive_failures = 0;

  for (int k = 0; k < steps; ++k) {
    const double t_k = double(k) * sim.controller_period;
    const TrajectoryPoint& ref = traj.at(k * period_steps);

    SystemState measured = state;
    if (sim.sensor_noise_std > 0.0) {
      measured.x += noise.normal(0.0, sim.sensor_noise_std);
      measured.y += noise.normal(0.0, sim.sensor_noise_std);
      measured.theta += noise.normal(0.0, sim.sensor_noise_std);
      measured.phi += noise.normal(0.0, sim.sensor_noise_std);
    }

    TrackingLog::Row row;
    row.t = t_k;
    row.state = state;
    row.reference = ref.state;
    row.error << state.x - ref.state.x, state.y - ref.state.y,
        wrap_angle(state.theta - ref.state.theta), state.phi - ref.state.phi;
    row.solver = controller_name(kind);

    Eigen::VectorXd u;
    if (kind == ControllerKind::OpenLoop) {
      u = ref.input.v;
      row.schedule = "-";
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        MpcWindow window = make_window(traj, k * period_steps, cfg);
        const Eigen::Vector4d e0 = window_error(window, measured);
        mpc.set_window(window);
        mpc.set_error(e0);
        const ScheduleSolve sol =
            kind == ControllerKind::Miqp
                ? mpc.solve_branch_and_bound()
                : mpc.solve_schedule(predict_window_schedule(*classifier, window, e0));
        u = window.nominal.front().input.v + sol.qp.z.head(m);
        row.schedule = sol.schedule.to_compact();
        row.objective = sol.objective;
        consecutive_failures = 0;
      } catch (const std::runtime_error& e) {
        ++consecutive_failures;
        if (consecutive_failures >= 2) {
          log.terminated_early = true;
          log.termination_reason =
              "controller failed twice consecutively at t=" + format_double(t_k) + ": " + e.what();
          break;
        }
        u = ref.input.v;  // hold the nominal input for one period
        row.schedule = "-";
      }
      if (sim.record_timing) row.solve_us = elapsed_us(t0);
    }

    clamp_to_cone(u, model.params.mu_p, contacts);
    if (cone_violation(u, model.params.mu_p, contacts) > 1e-8) {
      throw std::logic_error("applied input escaped the friction cone");
    }
    row.input = u;
    log.rows.push_back(row);

    const ControlInput input = ControlInput::from(u, contacts);
    for (int s = 0; s < substeps; ++s) {
      const double ts = t_k + double(s) * sim.plant_step;
      while (next_pert < pending.size() && pending[next_pert].time <= ts + 1e-12) {
        state = SystemState::from(state.vec() + pending[next_pert].displacement);
        ++next_pert;
      }
      state = rk4_step(plant, state, input, sim.plant_step);
    }

    if (std::isfinite(limit) && std::abs(state.phi) > limit) {
      log.terminated_early = true;
      log.termination_reason = "pusher left the contact face at t=" + format_double(t_k);
      break;
    }
  }
  return log;
}

void ModeMapSpec::validate() const {
  if (half_extent <= 0.0) throw std::invalid_argument("mode map extent must be positive");
  if (cells_per_side < 2) throw std::invalid_argument("mode map needs at least 2 cells per side");
}

double ModeMap::ex_at(int col) const {
  return -spec.half_extent + 2.0 * spec.half_extent * double(col) / double(spec.cells_per_side - 1);
}

double ModeMap::ey_at(int row) const {
  return -spec.half_extent + 2.0 * spec.half_extent * double(row) / double(spec.cells_per_side - 1);
}

double ModeMap::interior_neighbor_agreement() const {
  const int n = spec.cells_per_side;
  int agree = 0, total = 0;
  for (int r = 1; r + 1 < n; ++r) {
    for (int c = 1; c + 1 < n; ++c) {
      int same = 0;
      same += modes(r, c) == modes(r - 1, c) ? 1 : 0;
      same += modes(r, c) == modes(r + 1, c) ? 1 : 0;
      same += modes(r, c) == modes(r, c - 1) ? 1 : 0;
      same += modes(r, c) == modes(r, c + 1) ? 1 : 0;
      agree += same >= 2 ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 1.0 : double(agree) / double(total);
}

double map_agreement(const ModeMap& a, const ModeMap& b) {
  if (a.modes.rows() != b.modes.rows() || a.modes.cols() != b.modes.cols()) {
    throw std::invalid_argument("mode maps have different grids");
  }
  const int total = int(a.modes.size());
  int same = 0;
  for (int r = 0; r < a.modes.rows(); ++r) {
    for (int c = 0; c < a.modes.cols(); ++c) same += a.modes(r, c) == b.modes(r, c) ? 1 : 0;
  }
  return double(same) / double(total);
}

ModeMap mode_region_map_miqp(const Model& model, const MpcConfig& cfg, const NominalTrajectory& traj,
                             int start_index, const ModeMapSpec& spec) {
  spec.validate();
  ModeMap map;
  map.spec = spec;
  map.modes.resize(spec.cells_per_side, spec.cells_per_side);
  CondensedMpc mpc(model, cfg);
  mpc.set_window(make_window(traj, start_index, cfg));
  for (int r = 0; r < spec.cells_per_side; ++r) {
    for (int c = 0; c < spec.cells_per_side; ++c) {
      mpc.set_error(Eigen::Vector4d(map.ex_at(c), map.ey_at(r), spec.etheta, spec.ephi));
      map.modes(r, c) = int(mpc.solve_branch_and_bound().schedule.segments.front());
    }
  }
  return map;
}

ModeMap mode_region_map_classifier(const MlpClassifier& classifier, const ModeMapSpec& spec) {
  spec.validate();
  ModeMap map;
  map.spec = spec;
  map.modes.resize(spec.cells_per_side, spec.cells_per_side);
  for (int r = 0; r < spec.cells_per_side; ++r) {
    for (int c = 0; c < spec.cells_per_side; ++c) {
      const Eigen::Vector4d e0(map.ex_at(c), map.ey_at(r), spec.etheta, spec.ephi);
      map.modes(r, c) = classifier.predict_modes(e0).front();
    }
  }
  return map;
}

void save_mode_map_csv(const ModeMap& map, const std::string& path) {
  std::string text = "ex,ey,mode\n";
  for (int r = 0; r < map.spec.cells_per_side; ++r) {
    for (int c = 0; c < map.spec.cells_per_side; ++c) {
      text += format_double(map.ex_at(c)) + "," + format_double(map.ey_at(r)) + "," +
              std::string(1, mode_letter(ContactMode(map.modes(r, c)))) + "\n";
    }
  }
  atomic_write_file(path, text);
}

namespace {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const int idx = std::min(int(values.size()) - 1, int(q * double(values.size())));
  return values[size_t(idx)];
}

}  // namespace

std::string BenchReport::to_text() const {
  std::string text;
  text += "trials," + format_int(trials) + "\n";
  text += "median_exhaustive_us," + format_double(median_exhaustive_us) + "\n";
  text += "p95_exhaustive_us," + format_double(p95_exhaustive_us) + "\n";
  text += "median_bnb_us," + format_double(median_bnb_us) + "\n";
  text += "p95_bnb_us," + format_double(p95_bnb_us) + "\n";
  text += "median_learned_us," + format_double(median_learned_us) + "\n";
  text += "p95_learned_us," + format_double(p95_learned_us) + "\n";
  text += "ratio_exhaustive_over_learned," + format_double(ratio_exhaustive_over_learned) + "\n";
  text += "bnb_schedule_mismatches," + format_int(bnb_schedule_mismatches) + "\n";
  text += "equivalent_exhaustive_hz," +
          format_double(median_exhaustive_us > 0.0 ? 1e6 / median_exhaustive_us : 0.0) + "\n";
  text += "equivalent_learned_hz," +
          format_double(median_learned_us > 0.0 ? 1e6 / median_learned_us : 0.0) + "\n";
  return text;
}

BenchReport bandwidth_benchmark(const Model& model, const MpcConfig& cfg,
                                const NominalTrajectory& traj, int start_index,
                                const MlpClassifier& classifier, int trials, uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("benchmark needs at least one trial");
  CondensedMpc mpc(model, cfg);
  mpc.set_window(make_window(traj, start_index, cfg));

  const SamplingSpec defaults;
  std::vector<Eigen::Vector4d> errors(static_cast<size_t>(trials));
  for (int i = 0; i < trials; ++i) {
    Rng rng(Rng::derive(seed, uint64_t(i)));
    for (int k = 0; k < 4; ++k) errors[size_t(i)](k) = defaults.stddev(k) * rng.normal();
  }

  // Warm up caches and the page allocator before timing anything.
  mpc.set_error(errors.front());
  mpc.solve_exhaustive();
  mpc.solve_branch_and_bound();
  mpc.solve_schedule(classifier.predict_schedule(errors.front()));

  BenchReport report;
  report.trials = trials;
  std::vector<double> ex_us, bnb_us, learned_us;
  ex_us.reserve(size_t(trials));
  bnb_us.reserve(size_t(trials));
  learned_us.reserve(size_t(trials));

  for (const auto& e0 : errors) {
    mpc.set_error(e0);
    auto t0 = std::chrono::steady_clock::now();
    const ScheduleSolve exhaustive = mpc.solve_exhaustive();
    ex_us.push_back(double(elapsed_us(t0)));

    t0 = std::chrono::steady_clock::now();
    const ScheduleSolve bnb = mpc.solve_branch_and_bound();
    bnb_us.push_back(double(elapsed_us(t0)));
    if (!(bnb.schedule == exhaustive.schedule)) ++report.bnb_schedule_mismatches;

    t0 = std::chrono::steady_clock::now();
    const ModeSchedule predicted = classifier.predict_schedule(e0);
    mpc.solve_schedule(predicted);
    learned_us.push_back(double(elapsed_us(t0)));
  }

  report.median_exhaustive_us = percentile(ex_us, 0.5);
  report.p95_exhaustive_us = percentile(ex_us, 0.95);
  report.median_bnb_us = percentile(bnb_us, 0.5);
  report.p95_bnb_us = percentile(bnb_us, 0.95);
  report.median_learned_us = percentile(learned_us, 0.5);
  report.p95_learned_us = percentile(learned_us, 0.95);
  report.ratio_exhaustive_over_learned =
      report.median_learned_us > 0.0 ? report.median_exhaustive_us / report.median_learned_us : 0.0;
  return report;
}

}  // namespace pushmpc
