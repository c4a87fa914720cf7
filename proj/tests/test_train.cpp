#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "fagcn/optim.hpp"
#include "fagcn/synth.hpp"
#include "fagcn/train.hpp"
#include "test_util.hpp"

using namespace fagcn;

namespace {

// well separated two-block dataset every model should crack
Dataset easy_dataset(std::uint64_t seed = 1) {
  SynthConfig cfg;
  cfg.num_nodes = 60;
  cfg.feature_dim = 8;
  cfg.mu = 1.5;
  cfg.p_intra = 0.2;
  cfg.q_inter = 0.02;
  cfg.seed = seed;
  return generate_synthetic(cfg).data;
}

}  // namespace

TEST_CASE("adam takes the documented first step") {
  // first update moves each coordinate by lr regardless of gradient scale
  Param p("p", 1, 2);
  p.value.data = {1.0, -2.0};
  p.grad.data = {0.3, -400.0};
  AdamConfig cfg;
  cfg.lr = 0.1;
  Adam opt({&p}, cfg);
  opt.step();
  CHECK(p.value(0, 0) == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
  CHECK(p.value(0, 1) == doctest::Approx(-2.0 + 0.1).epsilon(1e-6));
  // gradients are consumed by the step
  CHECK(p.grad.data == std::vector<double>{0.0, 0.0});
}

TEST_CASE("adam weight decay pulls parameters toward zero") {
  Param p("p", 1, 1);
  p.value.data = {5.0};
  AdamConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 1.0;
  Adam opt({&p}, cfg);
  for (int i = 0; i < 200; ++i) opt.step();  // zero loss gradient, decay only
  CHECK(std::abs(p.value(0, 0)) < 4.0);

  AdamConfig bad;
  bad.lr = -1.0;
  CHECK_THROWS_AS(Adam({&p}, bad), std::invalid_argument);
}

TEST_CASE("adam converges on a quadratic") {
  // minimize (x - 3)^2 by feeding its gradient
  Param p("p", 1, 1);
  p.value.data = {0.0};
  AdamConfig cfg;
  cfg.lr = 0.05;
  Adam opt({&p}, cfg);
  for (int i = 0; i < 2000; ++i) {
    p.grad.data[0] = 2.0 * (p.value(0, 0) - 3.0);
    opt.step();
  }
  CHECK(p.value(0, 0) == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("evaluate") {
  Matrix logits(3, 2);
  logits.data = {2.0, 1.0, 0.0, 0.0, 1.0, 3.0};
  SUBCASE("counts masked hits") {
    CHECK(evaluate(logits, {0, 0, 1}, {1, 1, 1}) == doctest::Approx(1.0));
    CHECK(evaluate(logits, {1, 0, 1}, {1, 1, 1}) == doctest::Approx(2.0 / 3.0));
    CHECK(evaluate(logits, {1, 0, 1}, {0, 1, 1}) == doctest::Approx(1.0));
  }
  SUBCASE("argmax ties resolve to the lowest class") {
    CHECK(evaluate(logits, {0, 1, 1}, {0, 1, 0}) == doctest::Approx(0.0));
  }
  SUBCASE("empty mask is an error") {
    CHECK_THROWS_AS(evaluate(logits, {0, 0, 1}, {0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(evaluate(logits, {0, 0, 1}, {1, 1}), std::invalid_argument);
  }
}

TEST_CASE("make_model dispatches on the configured kind") {
  TrainConfig cfg;
  cfg.model = ModelKind::fagcn;
  CHECK(make_model(cfg, 4, 2)->kind() == ModelKind::fagcn);
  cfg.model = ModelKind::gcn;
  CHECK(make_model(cfg, 4, 2)->kind() == ModelKind::gcn);
  cfg.model = ModelKind::mlp;
  CHECK(make_model(cfg, 4, 2)->kind() == ModelKind::mlp);
  cfg.model = ModelKind::low_probe;
  CHECK(make_model(cfg, 4, 2)->kind() == ModelKind::low_probe);
  cfg.model = ModelKind::high_probe;
  CHECK(make_model(cfg, 4, 2)->kind() == ModelKind::high_probe);
}

TEST_CASE("training cracks a separable dataset") {
  Dataset ds = easy_dataset();
  Split split = random_split(ds.labels, 0.5, 3);
  for (ModelKind kind : {ModelKind::fagcn, ModelKind::mlp, ModelKind::gcn}) {
    TrainConfig cfg;
    cfg.model = kind;
    cfg.max_epochs = 200;
    cfg.seed = 4;
    auto model = make_model(cfg, static_cast<int>(ds.features.cols), num_classes(ds.labels));
    RunResult res = train(*model, ds, split, cfg);
    CHECK(model->trained);
    CHECK(res.test_accuracy >= 0.9);
    CHECK(res.epochs_run <= 200);
    CHECK(res.epochs_run >= 1);
    CHECK(static_cast<int>(res.loss_history.size()) == res.epochs_run);
    CHECK(static_cast<int>(res.accuracy_history.size()) == res.epochs_run);
    CHECK(res.epoch_of_best >= 1);
    CHECK(res.epoch_of_best <= res.epochs_run);
    CHECK(!res.best_validation_accuracy.has_value());
  }
}

TEST_CASE("validation mask switches the stopper and reports best val accuracy") {
  Dataset ds = easy_dataset();
  Split split = random_split(ds.labels, 0.5, 3);
  // carve a validation set out of the test nodes
  int moved = 0;
  for (std::size_t i = 0; i < split.test.size() && moved < 10; ++i)
    if (split.test[i]) {
      split.test[i] = 0;
      split.val[i] = 1;
      ++moved;
    }
  REQUIRE(moved == 10);

  TrainConfig cfg;
  cfg.max_epochs = 120;
  RunResult res = train(*make_model(cfg, 8, 2), ds, split, cfg);
  REQUIRE(res.best_validation_accuracy.has_value());
  CHECK(*res.best_validation_accuracy >= 0.8);
  CHECK(*res.best_validation_accuracy <= 1.0);
}

TEST_CASE("zero learning rate plateaus and stops at the patience bound") {
  Dataset ds = easy_dataset();
  Split split = random_split(ds.labels, 0.5, 3);
  TrainConfig cfg;
  cfg.lr = 0.0;
  cfg.weight_decay = 0.0;
  cfg.dropout = 0.0;
  cfg.max_epochs = 400;
  RunResult res = train(*make_model(cfg, 8, 2), ds, split, cfg);
  // epoch 1 sets the best loss; no later epoch improves on it
  CHECK(res.epoch_of_best == 1);
  CHECK(res.epochs_run == 1 + kLossPlateauPatience);
}

TEST_CASE("training is reproducible") {
  Dataset ds = easy_dataset();
  Split split = random_split(ds.labels, 0.5, 5);
  TrainConfig cfg;
  cfg.max_epochs = 40;

  auto m1 = make_model(cfg, 8, 2);
  auto m2 = make_model(cfg, 8, 2);
  RunResult r1 = train(*m1, ds, split, cfg);
  RunResult r2 = train(*m2, ds, split, cfg);
  CHECK(r1.loss_history == r2.loss_history);
  CHECK(r1.accuracy_history == r2.accuracy_history);
  CHECK(r1.test_accuracy == r2.test_accuracy);
  auto p1 = m1->parameters();
  auto p2 = m2->parameters();
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->value.data == p2[i]->value.data);

  cfg.seed = 99;
  auto m3 = make_model(cfg, 8, 2);
  RunResult r3 = train(*m3, ds, split, cfg);
  CHECK(r1.loss_history != r3.loss_history);
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  Dataset ds = easy_dataset();
  ds.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  Split split = random_split(ds.labels, 0.5, 3);
  TrainConfig cfg;
  cfg.dropout = 0.0;
  CHECK_THROWS_AS(train(*make_model(cfg, 8, 2), ds, split, cfg), std::runtime_error);
}

TEST_CASE("train validates mask lengths") {
  Dataset ds = easy_dataset();
  Split split = random_split(ds.labels, 0.5, 3);
  split.train.pop_back();
  TrainConfig cfg;
  CHECK_THROWS_AS(train(*make_model(cfg, 8, 2), ds, split, cfg), std::invalid_argument);
}

TEST_CASE("requested trace is attached to the result") {
  Dataset ds = easy_dataset();
  Split split = random_split(ds.labels, 0.5, 3);
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.record_trace = true;
  cfg.num_layers = 2;
  auto model = make_model(cfg, 8, 2);
  RunResult res = train(*model, ds, split, cfg);
  REQUIRE(res.trace.has_value());
  CHECK(res.trace->coefficients.size() == 2);
  CHECK(res.trace->hidden.size() == 3);
  for (const auto& co : res.trace->coefficients)
    CHECK(co.alpha_g.size() == static_cast<std::size_t>(ds.graph.num_arcs()));

  cfg.record_trace = false;
  auto plain = make_model(cfg, 8, 2);
  CHECK(!train(*plain, ds, split, cfg).trace.has_value());
}

TEST_CASE("probes train too") {
  Dataset ds = easy_dataset();
  Split split = random_split(ds.labels, 0.5, 3);
  TrainConfig cfg;
  cfg.model = ModelKind::low_probe;
  cfg.max_epochs = 150;
  RunResult res = train(*make_model(cfg, 8, 2), ds, split, cfg);
  CHECK(res.test_accuracy >= 0.8);
}
