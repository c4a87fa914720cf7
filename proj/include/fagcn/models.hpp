#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fagcn/dataset.hpp"
#include "fagcn/spectral.hpp"
#include "fagcn/tape.hpp"

#include "json.hpp"

namespace fagcn {

enum class ModelKind { fagcn, gcn, mlp, low_probe, high_probe };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind k);

enum class RunMode { train, eval };

// Per-arc gate coefficients in CSR arc order. alpha_g is the raw gate output
// in (-1, 1); the low/high shares split it as (1 + a)/2 and (1 - a)/2, i.e.
// the mix of low-pass and high-pass signal flowing over that arc.
struct EdgeCoefficients {
  std::vector<double> alpha_g;

  std::vector<double> alpha_low() const;
  std::vector<double> alpha_high() const;
};

// Eval-mode record of a forward pass: hidden[0] is h^(0), hidden[l] the
// output of propagation layer l; coefficients[l] the gates layer l applied.
struct LayerTrace {
  std::vector<Matrix> hidden;
  std::vector<EdgeCoefficients> coefficients;
};

// Per-arc gate alpha_ij = tanh(g^T [h_i || h_j]), shaped num_arcs x 1.
// h is num_nodes x F, gate_vec 2F x 1. Arc order follows the CSR layout;
// i is the arc's row owner and j its column.
TensorRef edge_gate(Tape& tape, TensorRef h, const Graph& g, TensorRef gate_vec);

// One propagation step:
//   out_i = epsilon * h0_i + sum_{j in N(i)} alpha_ij / sqrt(d_i d_j) * h_prev_j
// alpha is the num_arcs x 1 gate tensor aligned with the CSR arcs.
TensorRef fagcn_propagate(Tape& tape, TensorRef h_prev, TensorRef h0, TensorRef alpha,
                          const Graph& g, double epsilon);

class Model {
 public:
  virtual ~Model() = default;
  virtual ModelKind kind() const = 0;
  // Returns the logits tensor. trace is filled only by gated models and only
  // in eval mode.
  virtual TensorRef forward(Tape& tape, const Dataset& ds, RunMode mode,
                            std::uint64_t dropout_seed, LayerTrace* trace = nullptr) = 0;
  virtual std::vector<Param*> parameters() = 0;
  virtual nlohmann::json hyperparams() const = 0;

  std::vector<const Param*> parameters() const;

  bool trained = false;
};

struct FagcnConfig {
  int in_dim = 0;
  int hidden_dim = 16;
  int num_classes = 2;
  int num_layers = 2;
  double epsilon = 0.3;
  double dropout = 0.0;
  // Gates are recomputed from each layer's input by default; this pins them
  // to h^(0) instead.
  bool gates_from_h0 = false;
};

// h^(0) = relu(dropout(x) W1), then num_layers gated propagation steps
// anchored at epsilon * h^(0), then logits = h^(L) W2. Dropout hits the raw
// input and h^(0) before propagation.
class FagcnModel : public Model {
 public:
  FagcnModel(FagcnConfig cfg, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::fagcn; }
  TensorRef forward(Tape& tape, const Dataset& ds, RunMode mode, std::uint64_t dropout_seed,
                    LayerTrace* trace) override;
  std::vector<Param*> parameters() override;
  nlohmann::json hyperparams() const override;

  const FagcnConfig& config() const { return cfg_; }

 private:
  FagcnConfig cfg_;
  Param w1_;
  Param w2_;
  std::vector<Param> gates_;  // one 2F' x 1 vector per layer
};

struct GcnConfig {
  int in_dim = 0;
  int hidden_dim = 16;
  int num_classes = 2;
  int num_layers = 2;
  double dropout = 0.0;
};

// Renormalized first-order baseline: each layer is
//   h <- (D+I)^{-1/2} (A+I) (D+I)^{-1/2} (h W)
// with relu between layers (none after the last). Self-loops are added here,
// never in the stored graph.
class GcnModel : public Model {
 public:
  GcnModel(GcnConfig cfg, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::gcn; }
  TensorRef forward(Tape& tape, const Dataset& ds, RunMode mode, std::uint64_t dropout_seed,
                    LayerTrace* trace) override;
  std::vector<Param*> parameters() override;
  nlohmann::json hyperparams() const override;

  const GcnConfig& config() const { return cfg_; }

 private:
  GcnConfig cfg_;
  std::vector<Param> weights_;
};

SparseOperator gcn_operator(const Graph& g);

struct MlpConfig {
  int in_dim = 0;
  int hidden_dim = 16;
  int num_classes = 2;
  double dropout = 0.0;
};

// Structure-blind baseline: two affine layers with relu and dropout.
class MlpModel : public Model {
 public:
  MlpModel(MlpConfig cfg, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::mlp; }
  TensorRef forward(Tape& tape, const Dataset& ds, RunMode mode, std::uint64_t dropout_seed,
                    LayerTrace* trace) override;
  std::vector<Param*> parameters() override;
  nlohmann::json hyperparams() const override;

  const MlpConfig& config() const { return cfg_; }

 private:
  MlpConfig cfg_;
  Param w1_, b1_, w2_, b2_;
};

// One fixed spatial filter application followed by a trained linear map:
// logits = filter(x) w. Only w learns; the filter itself has no parameters.
class FilterProbeModel : public Model {
 public:
  FilterProbeModel(FilterSpec spec, int in_dim, int num_classes, std::uint64_t seed);

  ModelKind kind() const override;
  TensorRef forward(Tape& tape, const Dataset& ds, RunMode mode, std::uint64_t dropout_seed,
                    LayerTrace* trace) override;
  std::vector<Param*> parameters() override;
  nlohmann::json hyperparams() const override;

  const FilterSpec& spec() const { return spec_; }

 private:
  FilterSpec spec_;
  Param w_;
};

// Flat binary checkpoint: 8-byte magic "FAGNCKP1", little-endian u32 tensor
// count, a table of (u32 name length, name bytes, u64 rows, u64 cols), then
// all values row-major as 64-bit doubles in table order. A JSON sidecar at
// <path>.json carries the hyperparameters needed to rebuild the model.
void save_checkpoint(const std::string& path, const Model& model);
std::unique_ptr<Model> load_checkpoint(const std::string& path);

}  // namespace fagcn
