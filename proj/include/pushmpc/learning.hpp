#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pushmpc/modes.hpp"
#include "pushmpc/rng.hpp"

namespace pushmpc {

// Labelled tracking errors: one 4-component error state per column, one
// contact mode per schedule segment per column.
struct Dataset {
  Eigen::MatrixXd inputs;  // 4 x n
  Eigen::MatrixXi labels;  // segments x n, ContactMode values

  int size() const { return int(inputs.cols()); }
  int segment_count() const { return int(labels.rows()); }
};

void save_dataset_csv(const Dataset& ds, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

// Fully connected ReLU trunk with one 3-way softmax head per schedule
// segment; inputs are standardized with stored statistics.
class MlpClassifier {
 public:
  struct Layer {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
  };

  MlpClassifier() = default;
  // One softmax head per entry of `segment_lengths`.
  explicit MlpClassifier(const std::vector<int>& segment_lengths,
                         const std::vector<int>& hidden = {32, 50, 50});

  int segments() const { return segments_; }
  const std::vector<int>& segment_lengths() const { return segment_lengths_; }
  const std::vector<int>& hidden() const { return hidden_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  // He-normal weights, zero biases; traversal order is fixed so one seed
  // always produces one parameter vector.
  void init_weights(Rng& rng);

  void set_normalization(const Eigen::Vector4d& mean, const Eigen::Vector4d& std);
  const Eigen::Vector4d& input_mean() const { return mean_; }
  const Eigen::Vector4d& input_std() const { return std_; }

  // Raw head logits, 3 x segments.
  Eigen::MatrixXd logits(const Eigen::Vector4d& x) const;
  // Per-head softmax probabilities, 3 x segments; columns sum to 1.
  Eigen::MatrixXd head_probabilities(const Eigen::Vector4d& x) const;
  // Arg-max mode per segment.
  std::vector<int> predict_modes(const Eigen::Vector4d& x) const;
  ModeSchedule predict_schedule(const Eigen::Vector4d& x) const;

  // Mean over the batch of the summed per-head cross entropy; when `grads`
  // is non-null it receives dLoss/dW and dLoss/db per layer.  Class weights
  // (3 x segments) scale each head term; pass ones for the unweighted loss.
  double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXi& y,
                           const Eigen::MatrixXd& class_weights, std::vector<Layer>* grads) const;

  void save(const std::string& path) const;
  static MlpClassifier load(const std::string& path);

 private:
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>* acts) const;

  int segments_ = 0;
  std::vector<int> segment_lengths_;
  std::vector<int> hidden_;
  std::vector<Layer> layers_;
  Eigen::Vector4d mean_ = Eigen::Vector4d::Zero();
  Eigen::Vector4d std_ = Eigen::Vector4d::Ones();
};

struct TrainOptions {
  int epochs = 50;
  int batch = 256;
  double learning_rate = 1e-3;
  uint64_t seed = 1;
  bool class_weights = false;  // inverse-frequency weighting per head
};

struct TrainReport {
  std::vector<double> train_loss;  // mean batch loss per epoch
  std::vector<double> val_loss;    // validation loss per epoch
};

// Standardizes on the training set, then runs mini-batch adaptive-moment
// descent.  On divergence (non-finite loss) the weights of the last
// completed epoch are restored before the error is thrown.
TrainReport train_classifier(MlpClassifier& model, const Dataset& train, const Dataset& val,
                             const TrainOptions& opts);

struct SegmentStats {
  double accuracy = 0.0;
  double majority_baseline = 0.0;  // accuracy of always predicting the most common label
  Eigen::Matrix3i confusion = Eigen::Matrix3i::Zero();  // row: true, col: predicted
};

struct EvalReport {
  std::vector<SegmentStats> segments;
  double exact_match = 0.0;  // all segments correct

  double mean_accuracy() const;
  double mean_baseline() const;
};

EvalReport evaluate_classifier(const MlpClassifier& model, const Dataset& ds);

}  // namespace pushmpc
