#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "fagcn/dataset.hpp"
#include "fagcn/models.hpp"

namespace fagcn {

struct TrainConfig {
  ModelKind model = ModelKind::fagcn;
  double lr = 0.01;
  double dropout = 0.4;
  double weight_decay = 5e-4;
  int num_layers = 2;
  double epsilon = 0.3;
  int hidden_dim = 16;
  int max_epochs = 500;
  int patience = 100;  // epochs without a validation-accuracy improvement
  std::uint64_t seed = 1;
  bool gates_from_h0 = false;
  bool record_trace = false;
};

// Without a validation mask the stopper keys on the training loss instead,
// tolerating this many epochs without improvement.
inline constexpr int kLossPlateauPatience = 50;

struct RunResult {
  std::optional<double> best_validation_accuracy;  // absent when the split has no val mask
  double test_accuracy = 0.0;
  int epoch_of_best = 0;  // 1-based
  int epochs_run = 0;
  std::vector<double> loss_history;      // training loss per epoch
  std::vector<double> accuracy_history;  // val accuracy per epoch, train accuracy without val
  std::optional<LayerTrace> trace;       // eval-mode trace at the restored best, on request
};

// Fraction of masked nodes whose argmax matches the label; argmax ties go to
// the lowest class index. An empty mask is an error.
double evaluate(const Matrix& logits, const LabelVector& labels,
                const std::vector<std::uint8_t>& mask);

std::unique_ptr<Model> make_model(const TrainConfig& cfg, int in_dim, int num_classes);

// Full-batch Adam training with early stopping and best-epoch restore: the
// parameters scored on the test mask are exactly the best-epoch snapshot.
// Aborts with a diagnostic if the loss turns non-finite.
RunResult train(Model& model, const Dataset& ds, const Split& split, const TrainConfig& cfg);

}  // namespace fagcn
