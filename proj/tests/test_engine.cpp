#include <doctest.h>

#include <cmath>

#include "scil/engine.hpp"
#include "scil/errors.hpp"

using namespace scil;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

EngineConfig toy_config(std::uint64_t seed, bool incremental = true) {
  EngineConfig config;
  config.t_train = 50;
  config.majority_queue_size = 60;
  config.minority_queue_size = 5;
  config.epochs_offline = 15;
  config.epochs_online = 5;
  config.pretrain_majority_count = 60;
  config.pretrain_minority_count = 5;
  config.incremental_enabled = incremental;
  config.seed = seed;
  config.smote.target_count = 60;
  config.retention.min_keep = 2;
  config.bottleneck = 2;
  return config;
}

// Majority cluster at 0.2, first minority at 0.5, far cluster at 0.9.
std::vector<std::vector<VectorXd>> toy_pretrain(Rng& rng) {
  std::vector<std::vector<VectorXd>> data(2);
  for (int i = 0; i < 60; ++i) {
    data[0].push_back(vec2(0.2 + 0.015 * rng.normal(), 0.2 + 0.015 * rng.normal()));
  }
  for (int i = 0; i < 5; ++i) {
    data[1].push_back(vec2(0.5 + 0.015 * rng.normal(), 0.5 + 0.015 * rng.normal()));
  }
  return data;
}

VectorXd cluster_point(double center, Rng& rng) {
  return vec2(center + 0.015 * rng.normal(), center + 0.015 * rng.normal());
}

}  // namespace

TEST_CASE("pretraining fills queues, trains a separable model, computes thresholds") {
  Rng rng(1);
  Engine engine(toy_config(2));
  const auto data = toy_pretrain(rng);
  engine.pretrain(data);

  CHECK(engine.memory().majority().size() == 60);
  CHECK(engine.memory().minority(1).size() == 5);
  CHECK(engine.thresholds().class_count() == 2);

  int correct = 0;
  int total = 0;
  for (int c = 0; c < 2; ++c) {
    for (const auto& x : data[static_cast<std::size_t>(c)]) {
      correct += engine.model().predict(x).label == c;
      ++total;
    }
  }
  CHECK(static_cast<double>(correct) / total >= 0.99);
}

TEST_CASE("pretraining requires every class to have data") {
  Engine engine(toy_config(3));
  std::vector<std::vector<VectorXd>> data(2);
  data[0].push_back(vec2(0.1, 0.1));
  CHECK_THROWS_AS(engine.pretrain(data), Error);
  CHECK_THROWS_AS(engine.pretrain({}), Error);
}

TEST_CASE("stepping before pretraining is an internal error") {
  Engine engine(toy_config(4));
  CHECK_THROWS_AS(engine.step(vec2(0.1, 0.1)), Error);
}

TEST_CASE("known instances land in their predicted queue with no event") {
  Rng rng(5);
  Engine engine(toy_config(6));
  engine.pretrain(toy_pretrain(rng));

  const std::size_t majority_before = engine.memory().majority().size();
  const StepOutcome outcome = engine.step(cluster_point(0.2, rng));
  CHECK_FALSE(outcome.is_novel);
  CHECK(outcome.predicted_label == 0);
  CHECK(outcome.recon_loss <= outcome.theta_of_predicted);
  CHECK(outcome.event == StepEvent::None);
  CHECK(engine.memory().majority().size() == majority_before);  // capacity held at m
  CHECK(engine.memory().novel_buffer().size() == 0);
}

TEST_CASE("the l-th novel detection triggers promotion and a new model") {
  Rng rng(7);
  Engine engine(toy_config(8));
  engine.pretrain(toy_pretrain(rng));
  REQUIRE(engine.model().class_count() == 2);

  int novel_seen = 0;
  StepOutcome last;
  while (novel_seen < 5) {
    last = engine.step(cluster_point(0.9, rng), 7);
    REQUIRE(last.is_novel);  // far cluster must be flagged every time
    CHECK(last.predicted_label == 2);
    ++novel_seen;
    if (novel_seen < 5) {
      CHECK(last.event == StepEvent::None);
      CHECK(engine.memory().novel_buffer().size() == static_cast<std::size_t>(novel_seen));
    }
  }
  CHECK(last.event == StepEvent::NewModelTrained);
  CHECK(last.class_promoted);
  CHECK(last.promoted_truths == std::vector<int>(5, 7));
  CHECK(engine.model().class_count() == 3);
  CHECK(engine.memory().minority_count() == 2);
  CHECK(engine.memory().novel_buffer().size() == 0);
  CHECK(engine.thresholds().class_count() == 3);

  // The promoted class is now recognized as known.
  int known_as_new = 0;
  for (int i = 0; i < 20; ++i) {
    const StepOutcome o = engine.step(cluster_point(0.9, rng), 7);
    known_as_new += !o.is_novel && o.predicted_label == 2;
  }
  CHECK(known_as_new >= 18);
}

TEST_CASE("interval retraining fires on multiples of t_train and updates thresholds") {
  Rng rng(9);
  Engine engine(toy_config(10));
  engine.pretrain(toy_pretrain(rng));

  std::vector<long> event_steps;
  std::vector<long> theta_change_steps;
  Eigen::VectorXd theta = engine.thresholds().theta;
  for (long t = 1; t <= 120; ++t) {
    const StepOutcome o = engine.step(cluster_point(t % 3 == 0 ? 0.5 : 0.2, rng));
    if (o.event != StepEvent::None) event_steps.push_back(t);
    if (engine.thresholds().theta.size() != theta.size() ||
        (engine.thresholds().theta - theta).cwiseAbs().maxCoeff() > 0.0) {
      theta_change_steps.push_back(t);
      theta = engine.thresholds().theta;
    }
  }
  CHECK(event_steps == std::vector<long>{50, 100});
  CHECK(theta_change_steps == event_steps);  // thresholds move only at events
}

TEST_CASE("baseline mode never trains but memory keeps operating") {
  Rng rng(11);
  Engine engine(toy_config(12, false));
  engine.pretrain(toy_pretrain(rng));

  const std::string model_before = engine.model().to_json_string();
  const Eigen::VectorXd theta_before = engine.thresholds().theta;

  int promotions = 0;
  for (long t = 1; t <= 200; ++t) {
    const double center = t % 4 == 0 ? 0.9 : (t % 4 == 1 ? 0.5 : 0.2);
    const StepOutcome o = engine.step(cluster_point(center, rng), t % 4 == 0 ? 7 : -1);
    CHECK(o.event == StepEvent::None);
    promotions += o.class_promoted;
  }
  CHECK(promotions >= 1);
  CHECK(engine.memory().minority_count() == 1 + promotions);
  CHECK(engine.model().class_count() == 2);  // head never expanded
  CHECK(engine.model().to_json_string() == model_before);
  CHECK((engine.thresholds().theta - theta_before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("baseline and scil modes agree until the first training event") {
  Rng stream_rng(13);
  std::vector<VectorXd> inputs;
  for (long t = 1; t <= 60; ++t) {
    // A novel burst early so the buffer fills before t_train.
    const double center = (t >= 10 && t < 20) ? 0.9 : (t % 2 == 0 ? 0.2 : 0.5);
    inputs.push_back(cluster_point(center, stream_rng));
  }

  Engine scil_engine(toy_config(14, true));
  Engine base_engine(toy_config(14, false));
  Rng rng_a(15), rng_b(15);
  scil_engine.pretrain(toy_pretrain(rng_a));
  base_engine.pretrain(toy_pretrain(rng_b));

  long divergence = -1;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const StepOutcome a = scil_engine.step(inputs[i]);
    const StepOutcome b = base_engine.step(inputs[i]);
    const bool same = a.predicted_label == b.predicted_label && a.is_novel == b.is_novel &&
                      a.recon_loss == b.recon_loss && a.event == b.event;
    if (!same) {
      divergence = static_cast<long>(i) + 1;
      break;
    }
  }
  REQUIRE(divergence > 0);
  // First possible divergence: the buffer fill (5 novels from t=10) at
  // t=14, before t_train=50.
  CHECK(divergence == 14);
}

TEST_CASE("memory bound holds across a full run") {
  Rng rng(16);
  Engine engine(toy_config(17));
  engine.pretrain(toy_pretrain(rng));
  const int initial_minorities = engine.memory().minority_count();
  for (long t = 1; t <= 300; ++t) {
    const double center = t % 5 == 0 ? 0.9 : (t % 5 == 1 ? 0.5 : 0.2);
    engine.step(cluster_point(center, rng));
    const int promoted = engine.memory().minority_count() - initial_minorities;
    CHECK(engine.memory().total_stored() <=
          static_cast<std::size_t>(60 + (initial_minorities + promoted + 1) * 5));
  }
  CHECK(engine.peak_stored() <= engine.memory().capacity_bound());
}

TEST_CASE("run_stream returns one outcome per instance and an empty stream is a no-op") {
  Rng rng(18);
  Engine engine(toy_config(19));
  engine.pretrain(toy_pretrain(rng));
  const std::string before = engine.model().to_json_string();

  CHECK(engine.run_stream({}).empty());
  CHECK(engine.model().to_json_string() == before);

  std::vector<StreamItem> items;
  for (long t = 1; t <= 40; ++t) {
    items.push_back({cluster_point(0.2, rng), 0, t});
  }
  const auto outcomes = engine.run_stream(items);
  CHECK(outcomes.size() == 40);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    CHECK(outcomes[i].timestep == static_cast<long>(i) + 1);
  }
}

TEST_CASE("novel-buffer fill on a t_train multiple suppresses the incremental event") {
  Rng rng(20);
  EngineConfig config = toy_config(21);
  config.t_train = 10;
  Engine engine(config);
  engine.pretrain(toy_pretrain(rng));

  // Fill the buffer exactly at t = 10: 5 novel instances at t = 6..10.
  for (long t = 1; t <= 5; ++t) engine.step(cluster_point(0.2, rng));
  StepOutcome last;
  for (long t = 6; t <= 10; ++t) last = engine.step(cluster_point(0.9, rng));
  CHECK(last.event == StepEvent::NewModelTrained);  // not IncrementalTrained
}
