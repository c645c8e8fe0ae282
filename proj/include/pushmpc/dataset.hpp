#pragma once

#include <cstdint>
#include <vector>

#include "pushmpc/learning.hpp"
#include "pushmpc/mpc.hpp"
#include "pushmpc/trajectory.hpp"

namespace pushmpc {

// Zero-mean normal sampling over the window-frame error state.
struct SamplingSpec {
  Eigen::Vector4d stddev{0.03, 0.03, 0.4, 0.025};
  int count = 20000;
  uint64_t seed = 1;
  bool include_zero = true;  // sample at absolute index 0 is the exact zero error

  void validate() const;
};

struct DatasetGenResult {
  Dataset data;
  std::vector<uint64_t> discarded;  // absolute sample indices the oracle rejected
};

// Labels each sampled error with the branch-and-bound schedule at the window
// anchored at `start_index`.  Sample i always uses the stream derived from
// (seed, absolute index i), so shards merge into exactly the single-run
// dataset and thread count never changes the output.  More than 1% oracle
// failures aborts.
DatasetGenResult generate_dataset(const Model& model, const MpcConfig& cfg,
                                  const NominalTrajectory& traj, int start_index,
                                  const SamplingSpec& spec, int shard_index = 0,
                                  int shard_count = 1, int jobs = 1);

// Fraction of each mode per segment, 3 x segments.
Eigen::MatrixXd label_distribution(const Dataset& ds);

// Leading `ratio` fraction becomes the training set, remainder validation.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_fraction = 2.0 / 3.0);

// Applies the classifier in the window frame.  Right-turn windows are the
// mirror image of the left-turn training window, so the error is reflected
// and the predicted Left/Right modes are swapped back.
ModeSchedule predict_window_schedule(const MlpClassifier& model, const MpcWindow& window,
                                     const Eigen::Vector4d& window_error);

}  // namespace pushmpc
