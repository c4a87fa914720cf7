#include "fagcn/train.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fagcn/optim.hpp"
#include "fagcn/rng.hpp"

namespace fagcn {

double evaluate(const Matrix& logits, const LabelVector& labels,
                const std::vector<std::uint8_t>& mask) {
  if (labels.size() != logits.rows || mask.size() != logits.rows)
    throw std::invalid_argument("evaluate: labels/mask length mismatch");
  std::size_t total = 0, correct = 0;
  for (std::size_t i = 0; i < logits.rows; ++i) {
    if (!mask[i]) continue;
    ++total;
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.cols; ++k)
      if (logits(i, k) > logits(i, best)) best = k;
    if (static_cast<int>(best) == labels[i]) ++correct;
  }
  if (total == 0) throw std::invalid_argument("evaluate: empty mask");
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::unique_ptr<Model> make_model(const TrainConfig& cfg, int in_dim, int num_classes) {
  switch (cfg.model) {
    case ModelKind::fagcn: {
      FagcnConfig mc;
      mc.in_dim = in_dim;
      mc.hidden_dim = cfg.hidden_dim;
      mc.num_classes = num_classes;
      mc.num_layers = cfg.num_layers;
      mc.epsilon = cfg.epsilon;
      mc.dropout = cfg.dropout;
      mc.gates_from_h0 = cfg.gates_from_h0;
      return std::make_unique<FagcnModel>(mc, cfg.seed);
    }
    case ModelKind::gcn: {
      GcnConfig mc;
      mc.in_dim = in_dim;
      mc.hidden_dim = cfg.hidden_dim;
      mc.num_classes = num_classes;
      mc.num_layers = cfg.num_layers;
      mc.dropout = cfg.dropout;
      return std::make_unique<GcnModel>(mc, cfg.seed);
    }
    case ModelKind::mlp: {
      MlpConfig mc;
      mc.in_dim = in_dim;
      mc.hidden_dim = cfg.hidden_dim;
      mc.num_classes = num_classes;
      mc.dropout = cfg.dropout;
      return std::make_unique<MlpModel>(mc, cfg.seed);
    }
    case ModelKind::low_probe:
    case ModelKind::high_probe: {
      FilterSpec spec;
      spec.kind = cfg.model == ModelKind::low_probe ? FilterKind::low : FilterKind::high;
      spec.epsilon = cfg.epsilon;
      return std::make_unique<FilterProbeModel>(spec, in_dim, num_classes, cfg.seed);
    }
  }
  throw std::invalid_argument("make_model: bad ModelKind");
}

RunResult train(Model& model, const Dataset& ds, const Split& split, const TrainConfig& cfg) {
  const int n = ds.graph.num_nodes;
  if (static_cast<int>(split.train.size()) != n || static_cast<int>(split.test.size()) != n)
    throw std::invalid_argument("train: split masks do not match the graph");
  if (!split.val.empty() && static_cast<int>(split.val.size()) != n)
    throw std::invalid_argument("train: val mask length mismatch");
  const bool with_val = split.has_val();
  const int patience = with_val ? cfg.patience : kLossPlateauPatience;

  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  adam_cfg.weight_decay = cfg.weight_decay;
  Adam adam(model.parameters(), adam_cfg);
  for (Param* p : model.parameters()) p->zero_grad();

  SplitMix64 drop_rng = substream(cfg.seed, StreamTag::dropout);

  RunResult result;
  double best_metric = with_val ? -1.0 : std::numeric_limits<double>::infinity();
  std::vector<Matrix> best_params;
  int epochs_since_best = 0;

  auto snapshot = [&]() {
    best_params.clear();
    for (Param* p : model.parameters()) best_params.push_back(p->value);
  };

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const std::uint64_t drop_seed = drop_rng.next();
    Tape tape;
    TensorRef logits = model.forward(tape, ds, RunMode::train, drop_seed);
    TensorRef loss_t = tape.softmax_cross_entropy(logits, ds.labels, split.train);
    const double loss = tape.value(loss_t)(0, 0);
    if (!std::isfinite(loss))
      throw std::runtime_error("train: diverged, non-finite loss at epoch " + std::to_string(epoch));
    tape.backward(loss_t);
    adam.step();
    result.loss_history.push_back(loss);
    result.epochs_run = epoch;

    bool improved;
    if (with_val) {
      Tape eval_tape;
      TensorRef eval_logits = model.forward(eval_tape, ds, RunMode::eval, 0);
      const double val_acc = evaluate(eval_tape.value(eval_logits), ds.labels, split.val);
      result.accuracy_history.push_back(val_acc);
      improved = val_acc > best_metric;
      if (improved) best_metric = val_acc;
    } else {
      Tape eval_tape;
      TensorRef eval_logits = model.forward(eval_tape, ds, RunMode::eval, 0);
      result.accuracy_history.push_back(evaluate(eval_tape.value(eval_logits), ds.labels, split.train));
      improved = loss < best_metric;
      if (improved) best_metric = loss;
    }
    if (improved) {
      result.epoch_of_best = epoch;
      epochs_since_best = 0;
      snapshot();
    } else if (++epochs_since_best >= patience) {
      break;
    }
  }

  // restore the best-epoch parameters before scoring the test mask
  if (!best_params.empty()) {
    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_params[i];
  }
  model.trained = true;

  Tape final_tape;
  LayerTrace trace;
  TensorRef final_logits =
      model.forward(final_tape, ds, RunMode::eval, 0, cfg.record_trace ? &trace : nullptr);
  result.test_accuracy = evaluate(final_tape.value(final_logits), ds.labels, split.test);
  if (with_val) result.best_validation_accuracy = best_metric;
  if (cfg.record_trace && model.kind() == ModelKind::fagcn) result.trace = std::move(trace);
  return result;
}

}  // namespace fagcn
