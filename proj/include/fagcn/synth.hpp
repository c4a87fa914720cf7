#pragma once

#include <cstdint>

#include "fagcn/dataset.hpp"

namespace fagcn {

// Two-block stochastic block model with Gaussian class features. Nodes
// 0..n/2-1 are class 0 and draw features from N(+mu, sigma^2); the rest are
// class 1 and draw from N(-mu, sigma^2). Every intra-class pair becomes an
// edge with probability p_intra, every inter-class pair with q_inter.
struct SynthConfig {
  int num_nodes = 200;
  int num_classes = 2;  // fixed: only the two-block model is generated
  int feature_dim = 20;
  double mu = 0.5;
  double sigma = 1.0;
  double p_intra = 0.05;
  double q_inter = 0.05;
  std::uint64_t seed = 1;
};

struct SynthDataset {
  Dataset data;
  SynthConfig config;
};

// Deterministic in cfg: the same config is bit-identical on regeneration.
// Isolated nodes are kept.
SynthDataset generate_synthetic(const SynthConfig& cfg);

// Stratified train/test split: per class, floor(count * train_fraction)
// nodes go to train, then classes with the largest fractional remainder top
// up until floor(n * train_fraction) is reached. No validation mask.
Split random_split(const LabelVector& labels, double train_fraction, std::uint64_t seed);

}  // namespace fagcn
