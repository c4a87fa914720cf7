#pragma once

#include <cstdint>
#include <vector>

#include "fagcn/graph.hpp"
#include "fagcn/matrix.hpp"

namespace fagcn {

struct Dataset {
  Graph graph;
  Matrix features;     // num_nodes x feature_dim
  LabelVector labels;  // class ids in [0, K)
};

int num_classes(const LabelVector& labels);

// Boolean node masks. val may be all-zero: protocols without a validation
// set fall back to train-loss plateau early stopping.
struct Split {
  std::vector<std::uint8_t> train;
  std::vector<std::uint8_t> val;
  std::vector<std::uint8_t> test;

  bool has_val() const {
    for (auto m : val)
      if (m) return true;
    return false;
  }
};

}  // namespace fagcn
