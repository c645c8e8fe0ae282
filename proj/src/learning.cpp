#include "pushmpc/learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pushmpc/csv.hpp"
#include "pushmpc/io.hpp"

namespace pushmpc {

namespace {

constexpr const char* kModelFormat = "pushmpc-mode-classifier";
constexpr int kModelVersion = 1;

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

}  // namespace

void save_dataset_csv(const Dataset& ds, const std::string& path) {
  const int m = ds.segment_count();
  std::vector<std::string> header = {"ex", "ey", "etheta", "ephi"};
  for (int j = 0; j < m; ++j) header.push_back("m" + std::to_string(j + 1));
  std::string text = join_csv(header) + "\n";
  std::vector<std::string> cells(header.size());
  for (int i = 0; i < ds.size(); ++i) {
    for (int k = 0; k < 4; ++k) cells[k] = format_double(ds.inputs(k, i));
    for (int j = 0; j < m; ++j) cells[4 + j] = std::string(1, mode_letter(ContactMode(ds.labels(j, i))));
    text += join_csv(cells) + "\n";
  }
  atomic_write_file(path, text);
}

Dataset load_dataset_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header.size() < 5 || table.header[0] != "ex" || table.header[1] != "ey" ||
      table.header[2] != "etheta" || table.header[3] != "ephi") {
    throw std::runtime_error("dataset csv " + path + " has an unexpected header");
  }
  const int m = int(table.header.size()) - 4;
  for (int j = 0; j < m; ++j) {
    if (table.header[4 + j] != "m" + std::to_string(j + 1)) {
      throw std::runtime_error("dataset csv " + path + " has an unexpected header");
    }
  }
  const int n = int(table.rows.size());
  Dataset ds;
  ds.inputs.resize(4, n);
  ds.labels.resize(m, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    if (int(row.size()) != 4 + m) {
      throw std::runtime_error("dataset csv " + path + " row " + std::to_string(i + 1) + " is malformed");
    }
    for (int k = 0; k < 4; ++k) ds.inputs(k, i) = parse_double(row[k]);
    for (int j = 0; j < m; ++j) {
      if (row[4 + j].size() != 1) {
        throw std::runtime_error("dataset csv " + path + " row " + std::to_string(i + 1) + " has a bad mode cell");
      }
      ds.labels(j, i) = int(mode_from_letter(row[4 + j][0]));
    }
  }
  return ds;
}

MlpClassifier::MlpClassifier(const std::vector<int>& segment_lengths, const std::vector<int>& hidden)
    : segments_(int(segment_lengths.size())), segment_lengths_(segment_lengths), hidden_(hidden) {
  if (segments_ <= 0) throw std::invalid_argument("classifier needs at least one segment");
  for (int len : segment_lengths_) {
    if (len <= 0) throw std::invalid_argument("segment lengths must be positive");
  }
  int in = 4;
  for (int width : hidden_) {
    if (width <= 0) throw std::invalid_argument("hidden layer width must be positive");
    layers_.push_back({Eigen::MatrixXd::Zero(width, in), Eigen::VectorXd::Zero(width)});
    in = width;
  }
  layers_.push_back({Eigen::MatrixXd::Zero(3 * segments_, in), Eigen::VectorXd::Zero(3 * segments_)});
}

void MlpClassifier::init_weights(Rng& rng) {
  for (auto& layer : layers_) {
    const double scale = std::sqrt(2.0 / double(layer.W.cols()));
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c) layer.W(r, c) = scale * rng.normal();
    }
    layer.b.setZero();
  }
}

void MlpClassifier::set_normalization(const Eigen::Vector4d& mean, const Eigen::Vector4d& std) {
  if ((std.array() <= 0.0).any()) throw std::invalid_argument("input std must be positive");
  mean_ = mean;
  std_ = std;
}

Eigen::MatrixXd MlpClassifier::forward(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>* acts) const {
  Eigen::MatrixXd a = std_.cwiseInverse().asDiagonal() * (x.colwise() - mean_);
  if (acts) acts->push_back(a);
  for (size_t l = 0; l + 1 < layers_.size(); ++l) {
    a = relu((layers_[l].W * a).colwise() + layers_[l].b);
    if (acts) acts->push_back(a);
  }
  return (layers_.back().W * a).colwise() + layers_.back().b;
}

Eigen::MatrixXd MlpClassifier::logits(const Eigen::Vector4d& x) const {
  Eigen::MatrixXd raw = forward(x, nullptr);
  return Eigen::Map<Eigen::MatrixXd>(raw.data(), 3, segments_);
}

Eigen::MatrixXd MlpClassifier::head_probabilities(const Eigen::Vector4d& x) const {
  Eigen::MatrixXd heads = logits(x);
  for (int j = 0; j < segments_; ++j) {
    Eigen::Vector3d col = heads.col(j);
    col.array() -= col.maxCoeff();
    Eigen::Vector3d ex = col.array().exp();
    heads.col(j) = ex / ex.sum();
  }
  return heads;
}

std::vector<int> MlpClassifier::predict_modes(const Eigen::Vector4d& x) const {
  Eigen::MatrixXd heads = logits(x);
  std::vector<int> modes(static_cast<size_t>(segments_));
  for (int j = 0; j < segments_; ++j) {
    Eigen::Index best = 0;
    heads.col(j).maxCoeff(&best);
    modes[size_t(j)] = int(best);
  }
  return modes;
}

ModeSchedule MlpClassifier::predict_schedule(const Eigen::Vector4d& x) const {
  ModeSchedule schedule;
  schedule.segment_lengths = segment_lengths_;
  for (int mode : predict_modes(x)) schedule.segments.push_back(ContactMode(mode));
  return schedule;
}

double MlpClassifier::loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXi& y,
                                        const Eigen::MatrixXd& class_weights,
                                        std::vector<Layer>* grads) const {
  const int n = int(x.cols());
  if (n == 0) throw std::invalid_argument("empty batch");
  if (y.rows() != segments_ || y.cols() != n) throw std::invalid_argument("label shape mismatch");
  if (class_weights.rows() != 3 || class_weights.cols() != segments_) {
    throw std::invalid_argument("class weight shape mismatch");
  }

  std::vector<Eigen::MatrixXd> acts;
  Eigen::MatrixXd logits = forward(x, &acts);

  double total = 0.0;
  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(logits.rows(), n);
  for (int j = 0; j < segments_; ++j) {
    Eigen::MatrixXd head = logits.middleRows(3 * j, 3);
    Eigen::RowVectorXd mx = head.colwise().maxCoeff();
    Eigen::MatrixXd ex = (head.rowwise() - mx).array().exp();
    Eigen::RowVectorXd sum = ex.colwise().sum();
    for (int i = 0; i < n; ++i) {
      const int label = y(j, i);
      const double w = class_weights(label, j);
      total += w * (std::log(sum(i)) - (head(label, i) - mx(i)));
      Eigen::Vector3d dp = w * ex.col(i) / sum(i);
      dp(label) -= w;
      dlogits.col(i).segment(3 * j, 3) = dp;
    }
  }
  total /= double(n);

  if (grads) {
    dlogits /= double(n);
    grads->clear();
    grads->resize(layers_.size());
    Eigen::MatrixXd delta = dlogits;
    for (int l = int(layers_.size()) - 1; l >= 0; --l) {
      (*grads)[size_t(l)].W = delta * acts[size_t(l)].transpose();
      (*grads)[size_t(l)].b = delta.rowwise().sum();
      if (l > 0) {
        delta = layers_[size_t(l)].W.transpose() * delta;
        delta = delta.cwiseProduct((acts[size_t(l)].array() > 0.0).cast<double>().matrix());
      }
    }
  }
  return total;
}

void MlpClassifier::save(const std::string& path) const {
  nlohmann::json doc;
  doc["format"] = kModelFormat;
  doc["version"] = kModelVersion;
  doc["segment_lengths"] = segment_lengths_;
  doc["hidden"] = hidden_;
  doc["input_mean"] = std::vector<double>(mean_.data(), mean_.data() + 4);
  doc["input_std"] = std::vector<double>(std_.data(), std_.data() + 4);
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : layers_) {
    nlohmann::json entry;
    entry["rows"] = int(layer.W.rows());
    entry["cols"] = int(layer.W.cols());
    std::vector<double> w;
    w.reserve(size_t(layer.W.size()));
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c) w.push_back(layer.W(r, c));
    }
    entry["weights"] = w;
    entry["bias"] = std::vector<double>(layer.b.data(), layer.b.data() + layer.b.size());
    layers.push_back(entry);
  }
  doc["layers"] = layers;
  atomic_write_file(path, doc.dump());
}

MlpClassifier MlpClassifier::load(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("model file " + path + " is not valid JSON: " + e.what());
  }
  if (!doc.contains("format") || doc["format"] != kModelFormat) {
    throw std::runtime_error("model file " + path + " has an unknown format tag");
  }
  if (!doc.contains("version") || doc["version"].get<int>() != kModelVersion) {
    throw std::runtime_error("model file " + path + " has an unsupported version");
  }
  const auto segment_lengths = doc.at("segment_lengths").get<std::vector<int>>();
  const auto hidden = doc.at("hidden").get<std::vector<int>>();
  MlpClassifier model(segment_lengths, hidden);
  const auto mean = doc.at("input_mean").get<std::vector<double>>();
  const auto std = doc.at("input_std").get<std::vector<double>>();
  if (mean.size() != 4 || std.size() != 4) {
    throw std::runtime_error("model file " + path + " has bad normalization statistics");
  }
  model.set_normalization(Eigen::Vector4d(mean.data()), Eigen::Vector4d(std.data()));
  const auto& layers = doc.at("layers");
  if (layers.size() != model.layers_.size()) {
    throw std::runtime_error("model file " + path + " has a mismatched layer count");
  }
  for (size_t l = 0; l < model.layers_.size(); ++l) {
    auto& dst = model.layers_[l];
    const auto& src = layers[l];
    if (src.at("rows").get<int>() != int(dst.W.rows()) || src.at("cols").get<int>() != int(dst.W.cols())) {
      throw std::runtime_error("model file " + path + " layer " + std::to_string(l) + " has a bad shape");
    }
    const auto w = src.at("weights").get<std::vector<double>>();
    const auto b = src.at("bias").get<std::vector<double>>();
    if (int(w.size()) != int(dst.W.size()) || int(b.size()) != int(dst.b.size())) {
      throw std::runtime_error("model file " + path + " layer " + std::to_string(l) + " has a bad size");
    }
    size_t idx = 0;
    for (Eigen::Index r = 0; r < dst.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < dst.W.cols(); ++c) dst.W(r, c) = w[idx++];
    }
    for (Eigen::Index r = 0; r < dst.b.size(); ++r) dst.b(r) = b[size_t(r)];
  }
  return model;
}

namespace {

Eigen::MatrixXd training_class_weights(const Dataset& train, int segments, bool enabled) {
  Eigen::MatrixXd weights = Eigen::MatrixXd::Ones(3, segments);
  if (!enabled) return weights;
  for (int j = 0; j < segments; ++j) {
    Eigen::Vector3d counts = Eigen::Vector3d::Zero();
    for (int i = 0; i < train.size(); ++i) counts(train.labels(j, i)) += 1.0;
    for (int c = 0; c < 3; ++c) {
      weights(c, j) = double(train.size()) / (3.0 * std::max(1.0, counts(c)));
    }
  }
  return weights;
}

}  // namespace

TrainReport train_classifier(MlpClassifier& model, const Dataset& train, const Dataset& val,
                             const TrainOptions& opts) {
  const int n = train.size();
  if (n == 0) throw std::invalid_argument("training set is empty");
  if (train.segment_count() != model.segments()) {
    throw std::invalid_argument("training labels do not match the classifier segment count");
  }
  if (val.size() > 0 && val.segment_count() != model.segments()) {
    throw std::invalid_argument("validation labels do not match the classifier segment count");
  }
  if (opts.epochs <= 0 || opts.batch <= 0 || opts.learning_rate <= 0.0) {
    throw std::invalid_argument("training options must be positive");
  }

  Eigen::Vector4d mean = train.inputs.rowwise().mean();
  Eigen::Vector4d var = Eigen::Vector4d::Zero();
  for (int i = 0; i < n; ++i) var += (train.inputs.col(i) - mean).cwiseAbs2();
  Eigen::Vector4d std = (var / double(n)).cwiseSqrt();
  for (int k = 0; k < 4; ++k) {
    if (std(k) < 1e-12) std(k) = 1.0;  // constant feature, leave it centered
  }
  model.set_normalization(mean, std);

  const Eigen::MatrixXd weights = training_class_weights(train, model.segments(), opts.class_weights);

  auto& layers = model.layers();
  std::vector<MlpClassifier::Layer> m_state(layers.size()), v_state(layers.size());
  for (size_t l = 0; l < layers.size(); ++l) {
    m_state[l] = {Eigen::MatrixXd::Zero(layers[l].W.rows(), layers[l].W.cols()),
                  Eigen::VectorXd::Zero(layers[l].b.size())};
    v_state[l] = m_state[l];
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  TrainReport report;
  std::vector<MlpClassifier::Layer> checkpoint = layers;
  std::vector<int> order(static_cast<size_t>(n));
  std::vector<MlpClassifier::Layer> grads;

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    Rng rng(Rng::derive(opts.seed, uint64_t(epoch)));
    for (int i = 0; i < n; ++i) order[size_t(i)] = i;
    for (int i = n - 1; i > 0; --i) std::swap(order[size_t(i)], order[size_t(rng.uniform_int(0, i))]);

    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += opts.batch) {
      const int bs = std::min(opts.batch, n - start);
      Eigen::MatrixXd xb(4, bs);
      Eigen::MatrixXi yb(model.segments(), bs);
      for (int i = 0; i < bs; ++i) {
        xb.col(i) = train.inputs.col(order[size_t(start + i)]);
        yb.col(i) = train.labels.col(order[size_t(start + i)]);
      }
      const double loss = model.loss_and_gradient(xb, yb, weights, &grads);
      if (!std::isfinite(loss)) {
        layers = checkpoint;
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch + 1) +
                                 "; restored the last stable weights");
      }
      epoch_loss += loss * bs;

      ++step;
      const double corr1 = 1.0 - std::pow(beta1, double(step));
      const double corr2 = 1.0 - std::pow(beta2, double(step));
      for (size_t l = 0; l < layers.size(); ++l) {
        m_state[l].W = beta1 * m_state[l].W + (1.0 - beta1) * grads[l].W;
        v_state[l].W = beta2 * v_state[l].W + (1.0 - beta2) * grads[l].W.cwiseAbs2();
        m_state[l].b = beta1 * m_state[l].b + (1.0 - beta1) * grads[l].b;
        v_state[l].b = beta2 * v_state[l].b + (1.0 - beta2) * grads[l].b.cwiseAbs2();
        layers[l].W -= (opts.learning_rate * (m_state[l].W / corr1).array() /
                        ((v_state[l].W / corr2).array().sqrt() + eps))
                           .matrix();
        layers[l].b -= (opts.learning_rate * (m_state[l].b / corr1).array() /
                        ((v_state[l].b / corr2).array().sqrt() + eps))
                           .matrix();
      }
    }
    report.train_loss.push_back(epoch_loss / double(n));
    if (val.size() > 0) {
      report.val_loss.push_back(model.loss_and_gradient(val.inputs, val.labels, weights, nullptr));
    }
    checkpoint = layers;
  }
  return report;
}

double EvalReport::mean_accuracy() const {
  double sum = 0.0;
  for (const auto& s : segments) sum += s.accuracy;
  return segments.empty() ? 0.0 : sum / double(segments.size());
}

double EvalReport::mean_baseline() const {
  double sum = 0.0;
  for (const auto& s : segments) sum += s.majority_baseline;
  return segments.empty() ? 0.0 : sum / double(segments.size());
}

EvalReport evaluate_classifier(const MlpClassifier& model, const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("evaluation set is empty");
  if (ds.segment_count() != model.segments()) {
    throw std::invalid_argument("evaluation labels do not match the classifier segment count");
  }
  EvalReport report;
  report.segments.resize(size_t(model.segments()));
  int exact = 0;
  for (int i = 0; i < ds.size(); ++i) {
    const std::vector<int> modes = model.predict_modes(ds.inputs.col(i));
    bool all = true;
    for (int j = 0; j < model.segments(); ++j) {
      const int truth = ds.labels(j, i);
      report.segments[size_t(j)].confusion(truth, modes[size_t(j)]) += 1;
      all = all && modes[size_t(j)] == truth;
    }
    exact += all ? 1 : 0;
  }
  for (int j = 0; j < model.segments(); ++j) {
    auto& seg = report.segments[size_t(j)];
    const double n = double(ds.size());
    seg.accuracy = double(seg.confusion.diagonal().sum()) / n;
    seg.majority_baseline = double(seg.confusion.rowwise().sum().maxCoeff()) / n;
  }
  report.exact_match = double(exact) / double(ds.size());
  return report;
}

}  // namespace pushmpc
