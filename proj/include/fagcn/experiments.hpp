#pragma once

#include <string>
#include <vector>

#include "fagcn/synth.hpp"
#include "fagcn/train.hpp"

namespace fagcn {

struct SweepRow {
  double q = 0.0;
  std::string model;
  std::uint64_t seed = 0;
  double test_acc = 0.0;
};

struct DepthRow {
  int depth = 0;
  std::string model;
  std::uint64_t seed = 0;
  double test_acc = 0.0;
};

struct CoeffRow {
  int src = 0;
  int dst = 0;
  double alpha = 0.0;
  int intra = 0;  // 1 when both endpoints share a label
  int layer = 0;  // 1-based propagation layer the coefficient came from
};

// Inter-class density sweep. For every (q, seed) one dataset is generated
// (cfg = base with q_inter=q, seed=seed) and split 50/50 stratified; every
// requested model trains on the same split. Row order is q-major, then
// model, then seed.
std::vector<SweepRow> sweep_q(const SynthConfig& base, const TrainConfig& train_cfg,
                              const std::vector<double>& q_values,
                              const std::vector<ModelKind>& models,
                              const std::vector<std::uint64_t>& seeds);

// Depth grid on one fixed dataset/split; seeds only reseed init and dropout.
std::vector<DepthRow> depth_sweep(const Dataset& ds, const Split& split, const TrainConfig& base,
                                  const std::vector<int>& depths,
                                  const std::vector<ModelKind>& models,
                                  const std::vector<std::uint64_t>& seeds);

struct CoeffHistogram {
  std::vector<CoeffRow> rows;  // last propagation layer, CSR arc order
  double mean_intra = 0.0;
  double mean_inter = 0.0;
  std::size_t num_intra = 0;
  std::size_t num_inter = 0;
};

// Last-layer gate coefficients of a trained gated model, tagged intra/inter.
// Untrained models are rejected.
CoeffHistogram coeff_histogram(Model& model, const Dataset& ds);

struct FilterResponseRow {
  FilterKind kind = FilterKind::low;
  double epsilon = 0.0;
  double lambda = 0.0;
  double amplitude = 0.0;
};

// Kernel amplitudes on the lambda grid 0.00, 0.01, ..., 2.00 (201 rows per
// kind/epsilon pair).
std::vector<FilterResponseRow> filter_response_grid(const std::vector<FilterKind>& kinds,
                                                    const std::vector<double>& epsilons);

// CSV emission. Accuracies and coefficients print with 6 decimals; filter
// amplitudes print with enough digits to round-trip exactly.
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
void write_depth_csv(const std::string& path, const std::vector<DepthRow>& rows);
void write_coeff_csv(const std::string& path, const std::vector<CoeffRow>& rows);
void write_filter_response_csv(const std::string& path, const std::vector<FilterResponseRow>& rows);

}  // namespace fagcn
