#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "pushmpc/dataset.hpp"
#include "pushmpc/io.hpp"
#include "pushmpc/sim.hpp"

using namespace pushmpc;

namespace {

constexpr double kSpeed = 0.05;
constexpr double kRadius = 0.15;

Model point_model() { return Model::make(PhysicalParams{}); }

Model line_model() {
  PhysicalParams p;
  p.shape = ShapeKind::Square;
  p.pusher = PusherKind::Line;
  return Model::make(p);
}

NominalTrajectory point_traj(double duration) {
  return figure_eight_trajectory(point_model(), kSpeed, kRadius, 0.01, duration);
}

// One classifier shared by the learned-controller cases, trained on a small
// oracle-labelled dataset.
const MlpClassifier& shared_classifier() {
  static const MlpClassifier model = [] {
    Model plant = point_model();
    MpcConfig cfg = MpcConfig::point_pusher();
    SamplingSpec spec;
    spec.count = 1500;
    spec.seed = 5;
    DatasetGenResult gen = generate_dataset(plant, cfg, point_traj(12.0), 0, spec);
    auto [train, val] = split_dataset(gen.data);
    MlpClassifier clf(cfg.segment_lengths);
    Rng init(6);
    clf.init_weights(init);
    TrainOptions opts;
    opts.seed = 7;
    train_classifier(clf, train, val, opts);
    return clf;
  }();
  return model;
}

}  // namespace

TEST_CASE("halving the plant step leaves the final state unchanged to 1e-8") {
  Model model = point_model();
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = point_traj(39.0);

  SimConfig sim;
  sim.duration = 38.0;  // one full lap including both circle transitions
  sim.plant_mu_g_scale = 1.0;

  TrackingLog coarse = run_closed_loop(model, cfg, traj, ControllerKind::OpenLoop, nullptr, sim);
  sim.plant_step = 5e-4;
  TrackingLog fine = run_closed_loop(model, cfg, traj, ControllerKind::OpenLoop, nullptr, sim);

  REQUIRE(coarse.rows.size() == fine.rows.size());
  const auto& a = coarse.rows.back().state;
  const auto& b = fine.rows.back().state;
  CHECK((a.vec() - b.vec()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("open loop follows a single steady circle exactly") {
  Model model = point_model();
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = point_traj(19.0);

  SimConfig sim;
  sim.duration = 18.0;  // stays inside the first circle
  sim.plant_mu_g_scale = 1.0;
  TrackingLog log = run_closed_loop(model, cfg, traj, ControllerKind::OpenLoop, nullptr, sim);

  CHECK(!log.terminated_early);
  CHECK(log.max_position_error() <= 1e-6);
  for (const auto& row : log.rows) {
    CHECK(row.solver == std::string("open_loop"));
    CHECK(row.schedule == "-");
    CHECK(row.solve_us == 0);
  }
}

TEST_CASE("open loop never corrects an initial offset") {
  Model model = point_model();
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = point_traj(16.0);

  SimConfig sim;
  sim.duration = 15.0;
  sim.initial_error = Eigen::Vector4d(0.0, 0.03, 0.0, 0.0);
  TrackingLog log = run_closed_loop(model, cfg, traj, ControllerKind::OpenLoop, nullptr, sim);
  CHECK(log.final_position_error() >= 0.5 * 0.03);
}

TEST_CASE("miqp controller pulls a disturbed start back to the nominal") {
  Model model = point_model();
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = point_traj(23.0);

  SimConfig sim;
  sim.duration = 12.0;
  sim.initial_error = Eigen::Vector4d(0.02, 0.03, 0.2, 0.0);
  TrackingLog log = run_closed_loop(model, cfg, traj, ControllerKind::Miqp, nullptr, sim);

  CHECK(!log.terminated_early);
  // The +10% plant friction mismatch leaves a small steady offset.
  CHECK(log.final_position_error() <= 8e-3);
  CHECK(log.final_position_error() < 0.25 * log.rows.front().error.head<2>().norm());
  for (const auto& row : log.rows) {
    CHECK(row.solver == std::string("miqp"));
    CHECK(row.schedule.size() == 8);
  }
}

TEST_CASE("learned controller tracks through a perturbation and stays in the cone") {
  Model model = point_model();
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = point_traj(41.0);

  SimConfig sim;
  sim.duration = 30.0;
  sim.perturbations.push_back({10.0, Eigen::Vector4d(0.0, 0.05, 0.0, 0.0)});
  TrackingLog log =
      run_closed_loop(model, cfg, traj, ControllerKind::Learned, &shared_classifier(), sim);

  CHECK(!log.terminated_early);
  CHECK(log.final_position_error() <= 5e-3);
  const double recovery = log.recovery_time(10.0, 0.01);
  CHECK(recovery > 0.0);
  CHECK(recovery <= 10.0);

  const double mu = model.params.mu_p;
  for (const auto& row : log.rows) {
    REQUIRE(row.input.size() == 3);
    CHECK(row.input(0) >= -1e-8);
    CHECK(std::abs(row.input(1)) <= mu * row.input(0) + 1e-8);
  }
}

TEST_CASE("simulations are deterministic bit for bit") {
  Model model = point_model();
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = point_traj(26.0);

  SimConfig sim;
  sim.duration = 15.0;
  sim.initial_error = Eigen::Vector4d(0.01, -0.02, 0.1, 0.0);
  sim.sensor_noise_std = 1e-4;
  sim.seed = 11;

  TrackingLog a = run_closed_loop(model, cfg, traj, ControllerKind::Learned, &shared_classifier(), sim);
  TrackingLog b = run_closed_loop(model, cfg, traj, ControllerKind::Learned, &shared_classifier(), sim);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].state.vec() == b.rows[i].state.vec());
    CHECK(a.rows[i].input == b.rows[i].input);
    CHECK(a.rows[i].schedule == b.rows[i].schedule);
    CHECK(a.rows[i].solve_us == 0);
  }

  const std::string path_a = (std::filesystem::temp_directory_path() / "pushmpc_sim_a.csv").string();
  const std::string path_b = (std::filesystem::temp_directory_path() / "pushmpc_sim_b.csv").string();
  save_tracking_log_csv(a, path_a);
  save_tracking_log_csv(b, path_b);
  const std::string text_a = read_file(path_a);
  CHECK(text_a == read_file(path_b));
  CHECK(text_a.rfind("t,x,y,theta,phi,x_ref,y_ref,theta_ref,ex,ey,etheta,ephi,fn1,ft1,phidot,"
                     "schedule,solver,solve_us\n",
                     0) == 0);
  std::remove(path_a.c_str());
  std::remove(path_b.c_str());
}

TEST_CASE("run terminates with a diagnostic when the pusher leaves the face") {
  Model model = line_model();
  MpcConfig cfg = MpcConfig::line_pusher();
  NominalTrajectory traj = figure_eight_trajectory(model, kSpeed, kRadius, 0.01, 23.0);

  SimConfig sim;
  sim.duration = 12.0;
  sim.initial_error = Eigen::Vector4d(0.0, 0.0, 0.0, 0.05);  // beyond the face limit
  TrackingLog log = run_closed_loop(model, cfg, traj, ControllerKind::Miqp, nullptr, sim);
  CHECK(log.terminated_early);
  CHECK(log.termination_reason.find("face") != std::string::npos);
}

TEST_CASE("configuration errors are rejected up front") {
  Model model = point_model();
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = point_traj(16.0);

  SimConfig sim;
  sim.duration = 15.0;
  CHECK_THROWS_AS(run_closed_loop(model, cfg, traj, ControllerKind::Learned, nullptr, sim),
                  std::invalid_argument);

  SimConfig bad = sim;
  bad.plant_step = 0.02;  // larger than the controller period
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = sim;
  bad.perturbations.push_back({20.0, Eigen::Vector4d::Zero()});  // beyond duration
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = sim;
  bad.duration = 200.0;  // trajectory far too short
  CHECK_THROWS_AS(run_closed_loop(model, cfg, traj, ControllerKind::Miqp, nullptr, bad),
                  std::invalid_argument);

  CHECK(controller_from_name("miqp") == ControllerKind::Miqp);
  CHECK(controller_from_name("learned") == ControllerKind::Learned);
  CHECK(controller_from_name("open_loop") == ControllerKind::OpenLoop);
  CHECK_THROWS_AS(controller_from_name("pid"), std::invalid_argument);
  CHECK(std::string(controller_name(ControllerKind::Miqp)) == "miqp");
}

TEST_CASE("first segment mode maps partition cleanly around the origin") {
  Model model = point_model();
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = point_traj(12.0);

  ModeMapSpec spec;
  spec.cells_per_side = 9;
  spec.etheta = 0.0;
  ModeMap zero_heading = mode_region_map_miqp(model, cfg, traj, 0, spec);
  // Odd cell count puts one cell exactly at the origin; zero error sticks.
  CHECK(zero_heading.modes(4, 4) == int(ContactMode::Sticking));
  CHECK(zero_heading.ex_at(4) == doctest::Approx(0.0));

  ModeMapSpec tilted;
  tilted.cells_per_side = 9;
  ModeMap miqp_map = mode_region_map_miqp(model, cfg, traj, 0, tilted);
  CHECK(miqp_map.interior_neighbor_agreement() >= 0.8);

  ModeMap learned_map = mode_region_map_classifier(shared_classifier(), tilted);
  REQUIRE(learned_map.modes.rows() == miqp_map.modes.rows());
  CHECK(map_agreement(miqp_map, learned_map) >= 0.5);
  CHECK(map_agreement(miqp_map, miqp_map) == doctest::Approx(1.0));

  const std::string path = (std::filesystem::temp_directory_path() / "pushmpc_map.csv").string();
  save_mode_map_csv(miqp_map, path);
  const std::string text = read_file(path);
  std::remove(path.c_str());
  CHECK(text.rfind("ex,ey,mode\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 81);
}

TEST_CASE("benchmark times all three solvers on identical inputs") {
  Model model = point_model();
  MpcConfig cfg = MpcConfig::point_pusher();
  cfg.horizon = 5;
  cfg.segment_lengths = {2, 3};
  cfg.w = Eigen::VectorXd(2);
  cfg.w << 0.0, 0.2;
  NominalTrajectory traj = point_traj(8.0);

  MlpClassifier clf(cfg.segment_lengths);
  Rng init(13);
  clf.init_weights(init);

  BenchReport report = bandwidth_benchmark(model, cfg, traj, 0, clf, 40, 17);
  CHECK(report.trials == 40);
  CHECK(report.bnb_schedule_mismatches == 0);
  CHECK(report.median_exhaustive_us > 0.0);
  CHECK(report.median_learned_us > 0.0);
  CHECK(report.median_exhaustive_us >= report.median_learned_us);
  CHECK(report.p95_exhaustive_us >= report.median_exhaustive_us);

  const std::string text = report.to_text();
  CHECK(text.find("ratio_exhaustive_over_learned,") != std::string::npos);
  CHECK(text.find("trials,40") != std::string::npos);
}

TEST_CASE("recovery time finds the first drop below the threshold") {
  TrackingLog log;
  auto push = [&](double t, double ex) {
    TrackingLog::Row row;
    row.t = t;
    row.error = Eigen::Vector4d(ex, 0.0, 0.0, 0.0);
    log.rows.push_back(row);
  };
  push(0.0, 0.05);
  push(1.0, 0.02);
  push(2.0, 0.005);
  push(3.0, 0.012);
  push(4.0, 0.004);
  push(5.0, 0.003);
  CHECK(log.recovery_time(0.5, 0.01) == doctest::Approx(1.5));
  CHECK(log.recovery_time(2.5, 0.01) == doctest::Approx(1.5));
  CHECK(log.recovery_time(0.5, 1e-4) == -1.0);
  CHECK(log.recovery_time(10.0, 0.01) == -1.0);
}
