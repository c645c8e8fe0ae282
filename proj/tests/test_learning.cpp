#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "pushmpc/dataset.hpp"
#include "pushmpc/io.hpp"
#include "pushmpc/learning.hpp"
#include "pushmpc/rng.hpp"

using namespace pushmpc;

namespace {

Dataset random_dataset(int n, int segments, uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.inputs.resize(4, n);
  ds.labels.resize(segments, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 4; ++k) ds.inputs(k, i) = rng.normal(0.0, k < 2 ? 0.03 : 0.3);
    for (int j = 0; j < segments; ++j) ds.labels(j, i) = rng.uniform_int(0, 2);
  }
  return ds;
}

MlpClassifier random_classifier(const std::vector<int>& lengths, const std::vector<int>& hidden,
                                uint64_t seed) {
  MlpClassifier model(lengths, hidden);
  Rng rng(seed);
  model.init_weights(rng);
  return model;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("backprop gradients match central finite differences") {
  MlpClassifier model = random_classifier({2, 3}, {5, 4}, 11);
  model.set_normalization(Eigen::Vector4d(0.01, -0.02, 0.1, 0.0), Eigen::Vector4d(0.03, 0.03, 0.4, 0.025));
  Dataset batch = random_dataset(8, 2, 12);
  Eigen::MatrixXd weights = Eigen::MatrixXd::Ones(3, 2);
  weights(1, 0) = 2.5;  // exercise the weighted loss path too

  std::vector<MlpClassifier::Layer> grads;
  model.loss_and_gradient(batch.inputs, batch.labels, weights, &grads);

  Rng pick(13);
  const double h = 1e-6;
  for (size_t l = 0; l < model.layers().size(); ++l) {
    auto& layer = model.layers()[l];
    for (int trial = 0; trial < 20; ++trial) {
      const int r = pick.uniform_int(0, int(layer.W.rows()) - 1);
      const int c = pick.uniform_int(0, int(layer.W.cols()) - 1);
      const double saved = layer.W(r, c);
      layer.W(r, c) = saved + h;
      const double up = model.loss_and_gradient(batch.inputs, batch.labels, weights, nullptr);
      layer.W(r, c) = saved - h;
      const double down = model.loss_and_gradient(batch.inputs, batch.labels, weights, nullptr);
      layer.W(r, c) = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = grads[l].W(r, c);
      CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
    }
    for (int trial = 0; trial < 10; ++trial) {
      const int r = pick.uniform_int(0, int(layer.b.size()) - 1);
      const double saved = layer.b(r);
      layer.b(r) = saved + h;
      const double up = model.loss_and_gradient(batch.inputs, batch.labels, weights, nullptr);
      layer.b(r) = saved - h;
      const double down = model.loss_and_gradient(batch.inputs, batch.labels, weights, nullptr);
      layer.b(r) = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = grads[l].b(r);
      CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("softmax heads are normalized and shift invariant") {
  MlpClassifier model = random_classifier({1, 5, 5, 5}, {32, 50, 50}, 21);
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Vector4d x;
    for (int k = 0; k < 4; ++k) x(k) = rng.normal(0.0, 0.5);
    Eigen::MatrixXd p = model.head_probabilities(x);
    REQUIRE(p.rows() == 3);
    REQUIRE(p.cols() == 4);
    for (int j = 0; j < p.cols(); ++j) {
      CHECK(std::abs(p.col(j).sum() - 1.0) <= 1e-9);
      CHECK(p.col(j).minCoeff() >= 0.0);
      CHECK(p.col(j).maxCoeff() <= 1.0);
    }
  }

  // Adding one constant to every logit of a head leaves its probabilities
  // unchanged; the last bias vector shifts heads directly.
  Eigen::Vector4d x(0.02, -0.01, 0.2, 0.01);
  Eigen::MatrixXd before = model.head_probabilities(x);
  model.layers().back().b.segment(3, 3).array() += 7.5;
  Eigen::MatrixXd after = model.head_probabilities(x);
  CHECK((after - before).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("ten point dataset is overfit and evaluates perfectly") {
  Dataset tiny = random_dataset(10, 4, 31);
  MlpClassifier model = random_classifier({5, 10, 10, 10}, {32, 50, 50}, 32);
  TrainOptions opts;
  opts.epochs = 400;
  opts.batch = 10;
  opts.learning_rate = 1e-2;
  opts.seed = 33;
  TrainReport report = train_classifier(model, tiny, Dataset{}, opts);
  REQUIRE(report.train_loss.size() == 400);
  CHECK(report.train_loss.back() < report.train_loss.front());

  EvalReport eval = evaluate_classifier(model, tiny);
  CHECK(eval.mean_accuracy() >= 0.99);
  CHECK(eval.exact_match >= 0.99);
  for (const auto& seg : eval.segments) {
    CHECK(seg.accuracy == doctest::Approx(1.0));
    CHECK(seg.confusion.sum() == 10);
  }
}

TEST_CASE("constant label dataset converges to that label with vanishing loss") {
  Dataset ds = random_dataset(64, 3, 41);
  ds.labels.setConstant(int(ContactMode::SlidingLeft));
  MlpClassifier model = random_classifier({1, 2, 3}, {16, 16}, 42);
  TrainOptions opts;
  opts.epochs = 200;
  opts.batch = 32;
  opts.learning_rate = 1e-2;
  opts.seed = 43;
  TrainReport report = train_classifier(model, ds, Dataset{}, opts);
  CHECK(report.train_loss.back() < 1e-3);
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::Vector4d x;
    for (int k = 0; k < 4; ++k) x(k) = rng.normal(0.0, 0.05);
    for (int mode : model.predict_modes(x)) CHECK(mode == int(ContactMode::SlidingLeft));
  }
}

TEST_CASE("training is reproducible bit for bit") {
  Dataset ds = random_dataset(300, 8, 51);
  Dataset val = random_dataset(100, 8, 52);
  TrainOptions opts;
  opts.epochs = 5;
  opts.seed = 53;

  MlpClassifier a({1, 5, 5, 5, 5, 5, 5, 4});
  MlpClassifier b({1, 5, 5, 5, 5, 5, 5, 4});
  Rng ra(54), rb(54);
  a.init_weights(ra);
  b.init_weights(rb);
  TrainReport rep_a = train_classifier(a, ds, val, opts);
  TrainReport rep_b = train_classifier(b, ds, val, opts);

  REQUIRE(rep_a.train_loss.size() == rep_b.train_loss.size());
  for (size_t e = 0; e < rep_a.train_loss.size(); ++e) {
    CHECK(rep_a.train_loss[e] == rep_b.train_loss[e]);
    CHECK(rep_a.val_loss[e] == rep_b.val_loss[e]);
  }
  for (size_t l = 0; l < a.layers().size(); ++l) {
    CHECK(a.layers()[l].W == b.layers()[l].W);
    CHECK(a.layers()[l].b == b.layers()[l].b);
  }
}

TEST_CASE("normalization statistics are applied identically at inference") {
  MlpClassifier raw = random_classifier({2, 2}, {8, 8}, 61);
  MlpClassifier normalized = raw;
  Eigen::Vector4d mean(0.01, -0.005, 0.05, 0.002);
  Eigen::Vector4d std(0.03, 0.03, 0.4, 0.025);
  normalized.set_normalization(mean, std);

  Rng rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector4d x;
    for (int k = 0; k < 4; ++k) x(k) = rng.normal(0.0, 0.1);
    Eigen::Vector4d standardized = (x - mean).cwiseQuotient(std);
    CHECK((normalized.logits(x) - raw.logits(standardized)).cwiseAbs().maxCoeff() <= 1e-12);
    // Round trip through the statistics is the identity.
    Eigen::Vector4d back = standardized.cwiseProduct(std) + mean;
    CHECK((back - x).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("random weights score near one third on balanced labels") {
  Dataset ds = random_dataset(3000, 4, 71);
  MlpClassifier model = random_classifier({5, 10, 10, 10}, {32, 50, 50}, 72);
  EvalReport eval = evaluate_classifier(model, ds);
  for (const auto& seg : eval.segments) {
    CHECK(seg.accuracy >= 1.0 / 3.0 - 0.05);
    CHECK(seg.accuracy <= 1.0 / 3.0 + 0.05);
  }
}

TEST_CASE("model file round trips exactly") {
  MlpClassifier model = random_classifier({1, 5, 5, 5, 5, 5, 5, 4}, {32, 50, 50}, 81);
  model.set_normalization(Eigen::Vector4d(0.001, -0.002, 0.03, 0.0004),
                          Eigen::Vector4d(0.03, 0.031, 0.42, 0.026));
  const std::string path = temp_path("pushmpc_model_roundtrip.json");
  model.save(path);
  MlpClassifier loaded = MlpClassifier::load(path);
  std::remove(path.c_str());

  CHECK(loaded.segment_lengths() == model.segment_lengths());
  CHECK(loaded.hidden() == model.hidden());
  CHECK(loaded.input_mean() == model.input_mean());
  CHECK(loaded.input_std() == model.input_std());
  REQUIRE(loaded.layers().size() == model.layers().size());
  for (size_t l = 0; l < model.layers().size(); ++l) {
    CHECK(loaded.layers()[l].W == model.layers()[l].W);
    CHECK(loaded.layers()[l].b == model.layers()[l].b);
  }
  Eigen::Vector4d x(0.02, -0.03, 0.25, -0.01);
  CHECK(loaded.logits(x) == model.logits(x));

  ModeSchedule schedule = loaded.predict_schedule(x);
  CHECK(schedule.segment_count() == 8);
  CHECK(schedule.horizon() == 35);
}

TEST_CASE("model load rejects tampered files") {
  MlpClassifier model = random_classifier({2, 2}, {4}, 91);
  const std::string path = temp_path("pushmpc_model_tamper.json");
  model.save(path);
  std::string text = read_file(path);

  atomic_write_file(path, "not json");
  CHECK_THROWS_AS(MlpClassifier::load(path), std::runtime_error);

  std::string wrong = text;
  const std::string needle = "\"version\":1";
  REQUIRE(wrong.find(needle) != std::string::npos);
  wrong.replace(wrong.find(needle), needle.size(), "\"version\":9");
  atomic_write_file(path, wrong);
  CHECK_THROWS_AS(MlpClassifier::load(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("dataset csv round trips exactly") {
  Dataset ds = random_dataset(25, 8, 101);
  const std::string path = temp_path("pushmpc_dataset_roundtrip.csv");
  save_dataset_csv(ds, path);
  Dataset loaded = load_dataset_csv(path);
  std::remove(path.c_str());
  REQUIRE(loaded.size() == ds.size());
  REQUIRE(loaded.segment_count() == ds.segment_count());
  CHECK(loaded.inputs == ds.inputs);
  CHECK(loaded.labels == ds.labels);
}

TEST_CASE("split keeps two thirds for training") {
  Dataset ds = random_dataset(30, 2, 111);
  auto [train, val] = split_dataset(ds);
  CHECK(train.size() == 20);
  CHECK(val.size() == 10);
  CHECK(train.inputs == ds.inputs.leftCols(20));
  CHECK(val.labels == ds.labels.rightCols(10));
  CHECK_THROWS_AS(split_dataset(ds, 1.5), std::invalid_argument);
}

TEST_CASE("generated labels come from the schedule oracle") {
  Model model = Model::make(PhysicalParams{});
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = figure_eight_trajectory(model, 0.05, 0.15, 0.01, 12.0);

  SamplingSpec spec;
  spec.count = 24;
  spec.seed = 7;
  DatasetGenResult gen = generate_dataset(model, cfg, traj, 0, spec);
  REQUIRE(gen.data.size() == 24);
  REQUIRE(gen.data.segment_count() == 8);
  CHECK(gen.discarded.empty());

  // The deliberate zero sample is labelled all-Sticking.
  CHECK(gen.data.inputs.col(0).isZero(0.0));
  for (int j = 0; j < 8; ++j) CHECK(gen.data.labels(j, 0) == int(ContactMode::Sticking));

  // Re-running the oracle on stored samples reproduces the stored labels.
  CondensedMpc mpc(model, cfg);
  mpc.set_window(make_window(traj, 0, cfg));
  Rng pick(8);
  for (int trial = 0; trial < 6; ++trial) {
    const int i = pick.uniform_int(0, gen.data.size() - 1);
    mpc.set_error(gen.data.inputs.col(i));
    ScheduleSolve solve = mpc.solve_branch_and_bound();
    for (int j = 0; j < 8; ++j) {
      CHECK(int(solve.schedule.segments[size_t(j)]) == gen.data.labels(j, i));
    }
  }

  Eigen::MatrixXd dist = label_distribution(gen.data);
  for (int j = 0; j < dist.cols(); ++j) CHECK(dist.col(j).sum() == doctest::Approx(1.0));
}

TEST_CASE("shards and thread counts never change the dataset") {
  Model model = Model::make(PhysicalParams{});
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = figure_eight_trajectory(model, 0.05, 0.15, 0.01, 12.0);

  SamplingSpec spec;
  spec.count = 18;
  spec.seed = 9;
  DatasetGenResult whole = generate_dataset(model, cfg, traj, 0, spec);

  int offset = 0;
  for (int shard = 0; shard < 3; ++shard) {
    DatasetGenResult part = generate_dataset(model, cfg, traj, 0, spec, shard, 3);
    REQUIRE(part.data.size() == 6);
    CHECK(part.data.inputs == whole.data.inputs.middleCols(offset, 6));
    CHECK(part.data.labels == whole.data.labels.middleCols(offset, 6));
    offset += part.data.size();
  }

  DatasetGenResult threaded = generate_dataset(model, cfg, traj, 0, spec, 0, 1, 3);
  CHECK(threaded.data.inputs == whole.data.inputs);
  CHECK(threaded.data.labels == whole.data.labels);
}

TEST_CASE("window predictions mirror between turn directions") {
  Model model = Model::make(PhysicalParams{});
  MpcConfig cfg = MpcConfig::point_pusher();
  NominalTrajectory traj = figure_eight_trajectory(model, 0.05, 0.15, 0.01, 38.0);
  MpcWindow left = make_window(traj, 100, cfg);
  MpcWindow right = make_window(traj, 2000, cfg);
  REQUIRE(!left.right_turn);
  REQUIRE(right.right_turn);

  MlpClassifier clf = random_classifier({1, 5, 5, 5, 5, 5, 5, 4}, {32, 50, 50}, 121);
  Rng rng(122);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector4d e;
    for (int k = 0; k < 4; ++k) e(k) = rng.normal(0.0, 0.03);
    Eigen::Vector4d mirrored(e(0), -e(1), -e(2), -e(3));
    ModeSchedule on_left = predict_window_schedule(clf, left, e);
    ModeSchedule on_right = predict_window_schedule(clf, right, mirrored);
    REQUIRE(on_left.segment_count() == on_right.segment_count());
    for (int j = 0; j < on_left.segment_count(); ++j) {
      ContactMode l = on_left.segments[size_t(j)];
      ContactMode r = on_right.segments[size_t(j)];
      if (l == ContactMode::Sticking) {
        CHECK(r == ContactMode::Sticking);
      } else if (l == ContactMode::SlidingLeft) {
        CHECK(r == ContactMode::SlidingRight);
      } else {
        CHECK(r == ContactMode::SlidingLeft);
      }
    }
  }
}
