#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "pushmpc/config.hpp"
#include "pushmpc/csv.hpp"
#include "pushmpc/dataset.hpp"
#include "pushmpc/dynamics.hpp"
#include "pushmpc/io.hpp"
#include "pushmpc/learning.hpp"
#include "pushmpc/manifest.hpp"
#include "pushmpc/mpc.hpp"
#include "pushmpc/params.hpp"
#include "pushmpc/rng.hpp"
#include "pushmpc/sim.hpp"
#include "pushmpc/trajectory.hpp"

namespace {

using namespace pushmpc;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string absolute_path(const std::string& path) {
  return fs::absolute(fs::path(path)).lexically_normal().string();
}

uint64_t seed_of(const Config& cfg) {
  const std::string text = cfg.get_string("seed", "1");
  try {
    size_t pos = 0;
    const uint64_t v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("seed must be a non-negative integer, got '" + text + "'");
  }
}

Eigen::Vector4d vector4_of(const Config& cfg, const std::string& key) {
  const std::vector<double> v = cfg.get_list(key, {0.0, 0.0, 0.0, 0.0});
  if (v.size() != 4) {
    throw std::invalid_argument(key + " needs 4 comma-separated values, got " + std::to_string(v.size()));
  }
  return Eigen::Vector4d(v[0], v[1], v[2], v[3]);
}

// "t:dx:dy:dtheta:dphi" groups separated by ';'.
std::vector<Perturbation> parse_perturbations(const std::string& text) {
  std::vector<Perturbation> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find(';', start);
    if (end == std::string::npos) end = text.size();
    const std::string group = text.substr(start, end - start);
    if (!group.empty()) {
      std::vector<std::string> fields;
      size_t fstart = 0;
      while (true) {
        const size_t fpos = group.find(':', fstart);
        if (fpos == std::string::npos) {
          fields.push_back(group.substr(fstart));
          break;
        }
        fields.push_back(group.substr(fstart, fpos - fstart));
        fstart = fpos + 1;
      }
      if (fields.size() != 5) {
        throw std::invalid_argument("perturbation '" + group + "' needs t:dx:dy:dtheta:dphi");
      }
      Perturbation p;
      p.time = parse_double(fields[0]);
      p.displacement << parse_double(fields[1]), parse_double(fields[2]), parse_double(fields[3]),
          parse_double(fields[4]);
      out.push_back(p);
    }
    start = end + 1;
  }
  return out;
}

// The study case only picks geometry defaults; explicit keys always win.
Config with_case_defaults(const Config& cfg) {
  Config out = cfg;
  const std::string name = out.get_string("case", "a");
  if (name == "b") {
    if (!out.has("shape.kind")) out.set("shape.kind", "square");
    if (!out.has("pusher.kind")) out.set("pusher.kind", "line");
  } else if (name != "a") {
    throw std::invalid_argument("unknown case '" + name + "' (a or b)");
  }
  return out;
}

Model model_of(const Config& cfg) { return Model::make(PhysicalParams::from_config(cfg)); }

double figure_eight_period(const Config& cfg) {
  const double speed = cfg.get_double("trajectory.speed", 0.05);
  const double radius = cfg.get_double("trajectory.radius", 0.15);
  return 4.0 * kPi * radius / speed;
}

// `min_duration` pads references consumed through prediction windows; the
// requested duration is never shortened.
NominalTrajectory build_trajectory(const Config& cfg, const Model& model, double min_duration) {
  const std::string kind = cfg.get_string("trajectory.kind", "figure8");
  const double speed = cfg.get_double("trajectory.speed", 0.05);
  const double dt = cfg.get_double("trajectory.dt", 0.01);
  const double phi = cfg.get_double("trajectory.phi", 0.0);
  if (kind == "figure8") {
    const double radius = cfg.get_double("trajectory.radius", 0.15);
    const double laps = cfg.get_double("trajectory.laps", 1.0);
    double duration = cfg.has("trajectory.duration") ? cfg.get_double("trajectory.duration")
                                                     : laps * figure_eight_period(cfg);
    if (duration <= 0.0) throw std::invalid_argument("trajectory duration must be positive");
    duration = std::max(duration, min_duration);
    return figure_eight_trajectory(model, speed, radius, dt, duration, phi);
  }
  if (kind == "straight") {
    if (!cfg.has("trajectory.duration")) {
      throw std::invalid_argument("trajectory.duration is required for a straight reference");
    }
    double duration = cfg.get_double("trajectory.duration");
    if (duration <= 0.0) throw std::invalid_argument("trajectory duration must be positive");
    duration = std::max(duration, min_duration);
    return straight_line_trajectory(model, speed, dt, duration, phi);
  }
  throw std::invalid_argument("unknown trajectory.kind '" + kind + "' (figure8 or straight)");
}

MlpClassifier load_classifier(const std::string& path, const MpcConfig& cfg) {
  MlpClassifier clf = MlpClassifier::load(path);
  if (clf.segment_lengths() != cfg.segment_lengths) {
    throw std::invalid_argument("classifier '" + path + "' was trained for a different segment layout");
  }
  return clf;
}

// Collects the inputs and outputs of one command and saves the manifest that
// lets `replay` reproduce and check it.
class RunRecorder {
 public:
  RunRecorder(std::string command, const Config& cfg, const std::string& out_dir)
      : t0_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    manifest_.config = cfg.entries();
    manifest_.seed = seed_of(cfg);
    manifest_.started_at = utc_now();
    out_dir_ = absolute_path(out_dir);
    fs::create_directories(out_dir_);
  }

  std::string output(const std::string& name) {
    const std::string path = (fs::path(out_dir_) / name).string();
    manifest_.outputs.push_back(path);
    return path;
  }

  void input(const std::string& path) { manifest_.inputs.push_back(absolute_path(path)); }

  RunManifest finish(const std::string& stem, bool volatile_outputs = false) {
    manifest_.volatile_outputs = volatile_outputs;
    manifest_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    save_manifest(manifest_, (fs::path(out_dir_) / (stem + ".manifest.json")).string());
    return manifest_;
  }

 private:
  RunManifest manifest_;
  std::string out_dir_;
  std::chrono::steady_clock::time_point t0_;
};

RunManifest cmd_gen_trajectory(const Config& cfg, const std::string& out_dir) {
  RunRecorder rec("gen-trajectory", cfg, out_dir);
  const Model model = model_of(cfg);
  const NominalTrajectory traj = build_trajectory(cfg, model, 0.0);
  save_trajectory_csv(traj, rec.output("trajectory.csv"));
  std::printf("trajectory.csv: %d samples, %.2f s at dt=%g s\n", traj.size(),
              traj.at(traj.size() - 1).t, traj.dt);
  if (cfg.get_string("trajectory.kind", "figure8") == "figure8") {
    std::printf("figure-eight lap period: %.2f s\n", figure_eight_period(cfg));
  }
  return rec.finish("trajectory");
}

RunManifest cmd_gen_dataset(const Config& cfg, const std::string& out_dir) {
  RunRecorder rec("gen-dataset", cfg, out_dir);
  const Model model = model_of(cfg);
  const MpcConfig mpc = MpcConfig::from_config(cfg, model);

  SamplingSpec spec;
  spec.count = cfg.get_int("dataset.count", 30000);
  spec.seed = seed_of(cfg);
  spec.include_zero = cfg.get_bool("dataset.include_zero", true);
  const std::vector<double> sd =
      cfg.get_list("dataset.stddev", {spec.stddev(0), spec.stddev(1), spec.stddev(2), spec.stddev(3)});
  if (sd.size() != 4) throw std::invalid_argument("dataset.stddev needs 4 comma-separated values");
  spec.stddev << sd[0], sd[1], sd[2], sd[3];

  const int start = cfg.get_int("dataset.start_index", 0);
  const int shard = cfg.get_int("dataset.shard_index", 0);
  const int shards = cfg.get_int("dataset.shard_count", 1);
  const int jobs = cfg.get_int("jobs", 1);
  const std::string stem = shards > 1 ? "dataset_shard_" + std::to_string(shard + 1) + "_of_" +
                                            std::to_string(shards)
                                      : "dataset";

  if (spec.count == 0) {
    Dataset empty;
    empty.inputs.resize(4, 0);
    empty.labels.resize(mpc.segment_count(), 0);
    save_dataset_csv(empty, rec.output(stem + ".csv"));
    std::printf("%s.csv: 0 samples\n", stem.c_str());
    return rec.finish(stem);
  }

  const double dt = cfg.get_double("trajectory.dt", 0.01);
  const NominalTrajectory traj =
      build_trajectory(cfg, model, start * dt + mpc.horizon * mpc.h + 2.0);
  const DatasetGenResult result = generate_dataset(model, mpc, traj, start, spec, shard, shards, jobs);
  save_dataset_csv(result.data, rec.output(stem + ".csv"));

  std::printf("%s.csv: %d samples labelled, %zu rejected by the mode oracle\n", stem.c_str(),
              result.data.size(), result.discarded.size());
  const Eigen::MatrixXd dist = label_distribution(result.data);
  for (int j = 0; j < dist.cols(); ++j) {
    std::printf("segment %d: S %.3f L %.3f R %.3f\n", j + 1, dist(0, j), dist(1, j), dist(2, j));
  }
  return rec.finish(stem);
}

RunManifest cmd_train(const Config& cfg, const std::string& out_dir) {
  RunRecorder rec("train", cfg, out_dir);
  if (!cfg.has("train.dataset")) {
    throw std::invalid_argument("train.dataset is required (path to a labelled dataset CSV)");
  }
  const std::string data_path = cfg.get_string("train.dataset");
  rec.input(data_path);
  const Dataset ds = load_dataset_csv(data_path);

  const Model model = model_of(cfg);
  const MpcConfig mpc = MpcConfig::from_config(cfg, model);
  if (mpc.segment_count() != ds.segment_count()) {
    throw std::invalid_argument("dataset has " + std::to_string(ds.segment_count()) +
                                " segments but the controller uses " +
                                std::to_string(mpc.segment_count()));
  }

  const auto [train, val] = split_dataset(ds, cfg.get_double("train.split", 2.0 / 3.0));
  std::vector<int> hidden;
  for (double h : cfg.get_list("train.hidden", {32, 50, 50})) hidden.push_back(int(h));

  MlpClassifier clf(mpc.segment_lengths, hidden);
  Rng rng(seed_of(cfg));
  clf.init_weights(rng);

  TrainOptions opts;
  opts.epochs = cfg.get_int("train.epochs", 50);
  opts.batch = cfg.get_int("train.batch", 256);
  opts.learning_rate = cfg.get_double("train.learning_rate", 1e-3);
  opts.seed = seed_of(cfg);
  opts.class_weights = cfg.get_bool("train.class_weights", false);
  const TrainReport report = train_classifier(clf, train, val, opts);

  clf.save(rec.output("model.json"));

  std::string metrics = "epoch,train_loss,val_loss\n";
  for (size_t i = 0; i < report.train_loss.size(); ++i) {
    metrics += format_int(int64_t(i) + 1) + "," + format_double(report.train_loss[i]) + "," +
               format_double(report.val_loss[i]) + "\n";
  }
  atomic_write_file(rec.output("training_metrics.csv"), metrics);

  const EvalReport eval = evaluate_classifier(clf, val);
  std::string table =
      "segment,accuracy,majority_baseline,exact_match,"
      "c_ss,c_sl,c_sr,c_ls,c_ll,c_lr,c_rs,c_rl,c_rr\n";
  for (size_t j = 0; j < eval.segments.size(); ++j) {
    const SegmentStats& s = eval.segments[j];
    table += format_int(int64_t(j) + 1) + "," + format_double(s.accuracy) + "," +
             format_double(s.majority_baseline) + "," + format_double(eval.exact_match);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) table += "," + format_int(s.confusion(r, c));
    }
    table += "\n";
  }
  atomic_write_file(rec.output("evaluation.csv"), table);

  std::printf("trained on %d samples, validated on %d\n", train.size(), val.size());
  for (size_t j = 0; j < eval.segments.size(); ++j) {
    std::printf("segment %zu: accuracy %.3f (majority baseline %.3f)\n", j + 1,
                eval.segments[j].accuracy, eval.segments[j].majority_baseline);
  }
  std::printf("exact schedule match: %.3f, final val loss %.4f\n", eval.exact_match,
              report.val_loss.empty() ? 0.0 : report.val_loss.back());
  return rec.finish("model");
}

RunManifest cmd_simulate(const Config& cfg, const std::string& out_dir) {
  RunRecorder rec("simulate", cfg, out_dir);
  const Model model = model_of(cfg);
  const MpcConfig mpc = MpcConfig::from_config(cfg, model);
  const ControllerKind kind = controller_from_name(cfg.get_string("sim.controller", "learned"));

  MlpClassifier clf;
  const MlpClassifier* clf_ptr = nullptr;
  if (kind == ControllerKind::Learned) {
    const std::string model_path = cfg.get_string("sim.model", "model.json");
    rec.input(model_path);
    clf = load_classifier(model_path, mpc);
    clf_ptr = &clf;
  }

  SimConfig sc;
  sc.plant_step = cfg.get_double("sim.plant_step", 1e-3);
  sc.controller_period = cfg.get_double("sim.period", 1e-2);
  if (cfg.has("sim.duration")) {
    sc.duration = cfg.get_double("sim.duration");
  } else if (cfg.get_string("trajectory.kind", "figure8") == "figure8") {
    sc.duration = cfg.get_double("sim.laps", 7.0) * figure_eight_period(cfg);
  } else {
    throw std::invalid_argument("sim.duration is required for a straight reference");
  }
  sc.initial_error = vector4_of(cfg, "sim.initial_error");
  if (cfg.has("sim.perturbations")) {
    sc.perturbations = parse_perturbations(cfg.get_string("sim.perturbations"));
  }
  sc.sensor_noise_std = cfg.get_double("sim.noise_std", 0.0);
  sc.seed = seed_of(cfg);
  sc.plant_mu_g_scale = cfg.get_double("sim.mu_scale", 1.1);
  sc.record_timing = cfg.get_bool("sim.timing", false);

  const NominalTrajectory traj =
      build_trajectory(cfg, model, sc.duration + mpc.horizon * mpc.h + 2.0);
  const TrackingLog log = run_closed_loop(model, mpc, traj, kind, clf_ptr, sc);

  save_tracking_log_csv(log, rec.output("tracking.csv"));
  save_solve_log_csv(log, rec.output("solves.csv"));

  std::printf("controller=%s duration=%.2f s steps=%zu\n", controller_name(kind), sc.duration,
              log.rows.size());
  std::printf("position error: rms %.2f mm, max %.2f mm, final %.2f mm\n",
              1e3 * log.rms_position_error(), 1e3 * log.max_position_error(),
              1e3 * log.final_position_error());
  if (sc.record_timing) {
    std::printf("solve time: mean %.0f us, max %ld us\n", log.mean_solve_us(), log.max_solve_us());
  }
  if (log.terminated_early) std::printf("terminated early: %s\n", log.termination_reason.c_str());
  return rec.finish("tracking", sc.record_timing);
}

RunManifest cmd_bench(const Config& cfg, const std::string& out_dir) {
  RunRecorder rec("bench", cfg, out_dir);
  const Model model = model_of(cfg);
  const MpcConfig mpc = MpcConfig::from_config(cfg, model);
  const std::string model_path = cfg.get_string("bench.model", "model.json");
  rec.input(model_path);
  const MlpClassifier clf = load_classifier(model_path, mpc);

  const int trials = cfg.get_int("bench.trials", 200);
  const int start = cfg.get_int("bench.start_index", 0);
  const double dt = cfg.get_double("trajectory.dt", 0.01);
  const NominalTrajectory traj =
      build_trajectory(cfg, model, start * dt + mpc.horizon * mpc.h + 2.0);

  const BenchReport report = bandwidth_benchmark(model, mpc, traj, start, clf, trials, seed_of(cfg));
  const std::string text = report.to_text();
  atomic_write_file(rec.output("bench.txt"), text);
  std::fputs(text.c_str(), stdout);
  // Measured wall times never replay byte-identically.
  return rec.finish("bench", true);
}

RunManifest cmd_mode_map(const Config& cfg, const std::string& out_dir) {
  RunRecorder rec("mode-map", cfg, out_dir);
  ModeMapSpec spec;
  spec.half_extent = cfg.get_double("map.extent", 0.06);
  spec.cells_per_side = cfg.get_int("map.cells", 41);
  spec.etheta = cfg.get_double("map.etheta_deg", 5.0) * kPi / 180.0;
  spec.ephi = cfg.get_double("map.ephi", 0.0);

  const std::string source = cfg.get_string("map.source", "miqp");
  ModeMap map;
  if (source == "miqp") {
    const Model model = model_of(cfg);
    const MpcConfig mpc = MpcConfig::from_config(cfg, model);
    const int start = cfg.get_int("map.start_index", 0);
    const double dt = cfg.get_double("trajectory.dt", 0.01);
    const NominalTrajectory traj =
        build_trajectory(cfg, model, start * dt + mpc.horizon * mpc.h + 2.0);
    map = mode_region_map_miqp(model, mpc, traj, start, spec);
  } else if (source == "classifier") {
    const Model model = model_of(cfg);
    const MpcConfig mpc = MpcConfig::from_config(cfg, model);
    const std::string model_path = cfg.get_string("map.model", "model.json");
    rec.input(model_path);
    const MlpClassifier clf = load_classifier(model_path, mpc);
    map = mode_region_map_classifier(clf, spec);
  } else {
    throw std::invalid_argument("unknown map.source '" + source + "' (miqp or classifier)");
  }

  save_mode_map_csv(map, rec.output("mode_map.csv"));
  std::printf("mode_map.csv: %dx%d cells, interior neighbor agreement %.3f\n", spec.cells_per_side,
              spec.cells_per_side, map.interior_neighbor_agreement());
  return rec.finish("mode_map");
}

using CommandFn = RunManifest (*)(const Config&, const std::string&);

const std::map<std::string, CommandFn>& command_registry() {
  static const std::map<std::string, CommandFn> registry = {
      {"gen-trajectory", cmd_gen_trajectory}, {"gen-dataset", cmd_gen_dataset},
      {"train", cmd_train},                   {"simulate", cmd_simulate},
      {"bench", cmd_bench},                   {"mode-map", cmd_mode_map},
  };
  return registry;
}

// Input paths are resolved before the snapshot so a replay from any working
// directory reads the same files.
void absolutize_input_keys(Config& cfg) {
  for (const char* key : {"train.dataset", "sim.model", "bench.model", "map.model"}) {
    if (cfg.has(key)) cfg.set(key, absolute_path(cfg.get_string(key)));
  }
}

int run_replay(const std::string& manifest_path, const std::string& out_override) {
  const RunManifest original = load_manifest(manifest_path);
  const auto it = command_registry().find(original.command);
  if (it == command_registry().end()) {
    throw std::runtime_error("manifest records unknown command '" + original.command + "'");
  }

  Config cfg;
  for (const auto& [key, value] : original.config) cfg.set(key, value);

  const fs::path out_dir = out_override.empty()
                               ? fs::path(absolute_path(manifest_path)).parent_path() / "replay"
                               : fs::path(out_override);
  std::printf("replaying %s into %s\n", original.command.c_str(), out_dir.string().c_str());
  const RunManifest redone = it->second(cfg, out_dir.string());

  if (original.volatile_outputs) {
    std::printf("outputs carry measured timings; byte comparison skipped\n");
    return 0;
  }

  int mismatches = 0;
  for (const std::string& fresh : redone.outputs) {
    const std::string name = fs::path(fresh).filename().string();
    std::string against;
    for (const std::string& old : original.outputs) {
      if (fs::path(old).filename().string() == name) against = old;
    }
    if (against.empty() || !fs::exists(against)) {
      std::printf("missing original: %s\n", name.c_str());
      ++mismatches;
      continue;
    }
    if (read_file(fresh) == read_file(against)) {
      std::printf("identical: %s\n", name.c_str());
    } else {
      std::printf("differs: %s\n", name.c_str());
      ++mismatches;
    }
  }
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid model-predictive controller for planar pushing"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> perturbs;

  app.add_option("--config", config_path, "configuration file (flat dotted keys, INI sections)");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  const auto global_kv = [&](const std::string& flag, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  };
  global_kv("--seed", "seed", "seed for every random draw");
  global_kv("--jobs", "jobs", "worker threads for dataset generation");
  global_kv("--case", "case", "study case: a (disc, point pusher) or b (square, line pusher)");

  const auto add_kv = [&overrides](CLI::App* sub, const std::string& flag, const std::string& key,
                                   const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  };

  CLI::App* traj = app.add_subcommand("gen-trajectory", "write the nominal reference trajectory");
  add_kv(traj, "--kind", "trajectory.kind", "figure8 or straight");
  add_kv(traj, "--speed", "trajectory.speed", "path speed, m/s");
  add_kv(traj, "--radius", "trajectory.radius", "figure-eight lobe radius, m");
  add_kv(traj, "--dt", "trajectory.dt", "sample period, s");
  add_kv(traj, "--laps", "trajectory.laps", "figure-eight laps to cover");
  add_kv(traj, "--duration", "trajectory.duration", "explicit duration, s (overrides --laps)");
  add_kv(traj, "--phi", "trajectory.phi", "nominal pusher placement");

  CLI::App* data = app.add_subcommand("gen-dataset", "label sampled tracking errors with optimal schedules");
  add_kv(data, "--count", "dataset.count", "total samples across all shards");
  add_kv(data, "--start-index", "dataset.start_index", "trajectory sample anchoring the window");
  add_kv(data, "--shard", "dataset.shard_index", "shard to generate (0-based)");
  add_kv(data, "--shards", "dataset.shard_count", "total shards");
  add_kv(data, "--stddev", "dataset.stddev", "error stddev: ex,ey,etheta,ephi");

  CLI::App* train = app.add_subcommand("train", "fit the mode-schedule classifier");
  add_kv(train, "--dataset", "train.dataset", "labelled dataset CSV");
  add_kv(train, "--epochs", "train.epochs", "training epochs");
  add_kv(train, "--batch", "train.batch", "mini-batch size");
  add_kv(train, "--lr", "train.learning_rate", "learning rate");
  add_kv(train, "--split", "train.split", "training fraction of the dataset");
  add_kv(train, "--hidden", "train.hidden", "hidden layer widths, comma separated");
  train->add_flag_callback(
      "--class-weights", [&overrides] { overrides.emplace_back("train.class_weights", "true"); },
      "weight each head by inverse label frequency");

  CLI::App* sim = app.add_subcommand("simulate", "run the closed-loop pushing simulation");
  add_kv(sim, "--controller", "sim.controller", "miqp, learned, or open_loop");
  add_kv(sim, "--model", "sim.model", "classifier file for the learned controller");
  add_kv(sim, "--laps", "sim.laps", "figure-eight laps to simulate");
  add_kv(sim, "--duration", "sim.duration", "explicit duration, s (overrides --laps)");
  add_kv(sim, "--initial-error", "sim.initial_error", "start offset: ex,ey,etheta,ephi");
  add_kv(sim, "--noise", "sim.noise_std", "sensor noise stddev on every pose component");
  add_kv(sim, "--mu-scale", "sim.mu_scale", "plant-vs-controller ground friction ratio");
  sim->add_option("--perturb", perturbs, "pose shove t:dx:dy:dtheta:dphi (repeatable)");
  sim->add_flag_callback("--timing", [&overrides] { overrides.emplace_back("sim.timing", "true"); },
                         "record per-solve wall time (makes logs non-replayable)");

  CLI::App* bench = app.add_subcommand("bench", "time exhaustive, branch-and-bound, and learned solves");
  add_kv(bench, "--trials", "bench.trials", "timed error states");
  add_kv(bench, "--model", "bench.model", "classifier file");
  add_kv(bench, "--start-index", "bench.start_index", "trajectory sample anchoring the window");

  CLI::App* map = app.add_subcommand("mode-map", "first-segment mode over an (ex, ey) grid");
  add_kv(map, "--source", "map.source", "miqp or classifier");
  add_kv(map, "--model", "map.model", "classifier file for --source classifier");
  add_kv(map, "--extent", "map.extent", "grid half extent, m");
  add_kv(map, "--cells", "map.cells", "cells per side");
  add_kv(map, "--etheta-deg", "map.etheta_deg", "fixed heading error, degrees");
  add_kv(map, "--ephi", "map.ephi", "fixed placement error");
  add_kv(map, "--start-index", "map.start_index", "trajectory sample anchoring the window");

  CLI::App* replay = app.add_subcommand("replay", "re-run a recorded command and compare outputs");
  std::string manifest_path;
  replay->add_option("manifest", manifest_path, "manifest JSON written by a previous run")->required();

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (replay->parsed()) return run_replay(manifest_path, out_dir == "." ? "" : out_dir);

    Config cfg = config_path.empty() ? Config() : Config::load(config_path);
    for (const auto& [key, value] : overrides) cfg.set(key, value);
    if (!perturbs.empty()) {
      std::string joined;
      for (const std::string& p : perturbs) {
        if (!joined.empty()) joined += ';';
        joined += p;
      }
      cfg.set("sim.perturbations", joined);
    }
    cfg = with_case_defaults(cfg);
    absolutize_input_keys(cfg);

    const CLI::App* sub = app.get_subcommands().front();
    command_registry().at(sub->get_name())(cfg, out_dir);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
