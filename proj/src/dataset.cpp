#include "pushmpc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace pushmpc {

void SamplingSpec::validate() const {
  if ((stddev.array() <= 0.0).any()) throw std::invalid_argument("sampling stddev must be positive");
  if (count <= 0) throw std::invalid_argument("sample count must be positive");
}

namespace {

Eigen::Vector4d draw_error(const SamplingSpec& spec, uint64_t index) {
  if (index == 0 && spec.include_zero) return Eigen::Vector4d::Zero();
  Rng rng(Rng::derive(spec.seed, index));
  Eigen::Vector4d e;
  for (int k = 0; k < 4; ++k) e(k) = spec.stddev(k) * rng.normal();
  return e;
}

}  // namespace

DatasetGenResult generate_dataset(const Model& model, const MpcConfig& cfg,
                                  const NominalTrajectory& traj, int start_index,
                                  const SamplingSpec& spec, int shard_index, int shard_count,
                                  int jobs) {
  spec.validate();
  if (shard_count <= 0 || shard_index < 0 || shard_index >= shard_count) {
    throw std::invalid_argument("invalid shard selection");
  }
  const uint64_t lo = uint64_t(spec.count) * uint64_t(shard_index) / uint64_t(shard_count);
  const uint64_t hi = uint64_t(spec.count) * uint64_t(shard_index + 1) / uint64_t(shard_count);
  const int n = int(hi - lo);
  const int segments = cfg.segment_count();

  DatasetGenResult result;
  result.data.inputs.resize(4, n);
  result.data.labels.resize(segments, n);
  if (n == 0) return result;

  jobs = std::max(1, std::min(jobs, n));
  std::vector<std::vector<uint64_t>> discards(static_cast<size_t>(jobs));
  std::vector<std::string> failures(static_cast<size_t>(jobs));

  auto worker = [&](int w) {
    try {
      CondensedMpc mpc(model, cfg);
      mpc.set_window(make_window(traj, start_index, cfg));
      const int begin = int(uint64_t(n) * uint64_t(w) / uint64_t(jobs));
      const int end = int(uint64_t(n) * uint64_t(w + 1) / uint64_t(jobs));
      for (int i = begin; i < end; ++i) {
        const uint64_t index = lo + uint64_t(i);
        const Eigen::Vector4d e0 = draw_error(spec, index);
        result.data.inputs.col(i) = e0;
        mpc.set_error(e0);
        try {
          const ScheduleSolve best = mpc.solve_branch_and_bound();
          for (int j = 0; j < segments; ++j) {
            result.data.labels(j, i) = int(best.schedule.segments[size_t(j)]);
          }
        } catch (const std::runtime_error&) {
          result.data.labels.col(i).setConstant(-1);
          discards[size_t(w)].push_back(index);
        }
      }
    } catch (const std::exception& e) {
      failures[size_t(w)] = e.what();
    }
  };

  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(size_t(jobs));
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& message : failures) {
    if (!message.empty()) throw std::runtime_error("dataset worker failed: " + message);
  }

  for (auto& d : discards) {
    result.discarded.insert(result.discarded.end(), d.begin(), d.end());
  }
  std::sort(result.discarded.begin(), result.discarded.end());
  if (double(result.discarded.size()) > 0.01 * double(n)) {
    throw std::runtime_error("mode oracle failed on " + std::to_string(result.discarded.size()) +
                             " of " + std::to_string(n) + " samples (over the 1% budget)");
  }

  if (!result.discarded.empty()) {
    int keep = 0;
    for (int i = 0; i < n; ++i) {
      if (result.data.labels(0, i) < 0) continue;
      result.data.inputs.col(keep) = result.data.inputs.col(i);
      result.data.labels.col(keep) = result.data.labels.col(i);
      ++keep;
    }
    result.data.inputs.conservativeResize(4, keep);
    result.data.labels.conservativeResize(segments, keep);
  }
  return result;
}

Eigen::MatrixXd label_distribution(const Dataset& ds) {
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(3, ds.segment_count());
  for (int i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < ds.segment_count(); ++j) dist(ds.labels(j, i), j) += 1.0;
  }
  if (ds.size() > 0) dist /= double(ds.size());
  return dist;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_fraction) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0) {
    throw std::invalid_argument("train fraction must be in (0, 1)");
  }
  const int n_train = int(std::lround(train_fraction * double(ds.size())));
  Dataset train, val;
  train.inputs = ds.inputs.leftCols(n_train);
  train.labels = ds.labels.leftCols(n_train);
  val.inputs = ds.inputs.rightCols(ds.size() - n_train);
  val.labels = ds.labels.rightCols(ds.size() - n_train);
  return {train, val};
}

ModeSchedule predict_window_schedule(const MlpClassifier& model, const MpcWindow& window,
                                     const Eigen::Vector4d& window_error) {
  Eigen::Vector4d x = window_error;
  if (window.right_turn) {
    x(1) = -x(1);
    x(2) = -x(2);
    x(3) = -x(3);
  }
  ModeSchedule schedule = model.predict_schedule(x);
  if (window.right_turn) {
    for (auto& mode : schedule.segments) {
      if (mode == ContactMode::SlidingLeft) {
        mode = ContactMode::SlidingRight;
      } else if (mode == ContactMode::SlidingRight) {
        mode = ContactMode::SlidingLeft;
      }
    }
  }
  return schedule;
}

}  // namespace pushmpc
