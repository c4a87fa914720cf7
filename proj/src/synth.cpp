#include "fagcn/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "fagcn/rng.hpp"

namespace fagcn {

int num_classes(const LabelVector& labels) {
  int k = 0;
  for (int y : labels) {
    if (y < 0) throw std::invalid_argument("num_classes: negative label");
    k = std::max(k, y + 1);
  }
  if (k < 2) throw std::invalid_argument("num_classes: need at least two classes");
  return k;
}

namespace {

void check_config(const SynthConfig& cfg) {
  if (cfg.num_classes != 2) throw std::invalid_argument("generate_synthetic: num_classes is fixed at 2");
  if (cfg.num_nodes < 2 || cfg.num_nodes % 2 != 0)
    throw std::invalid_argument("generate_synthetic: num_nodes must be even and positive");
  if (cfg.feature_dim < 1) throw std::invalid_argument("generate_synthetic: feature_dim must be positive");
  if (!(cfg.p_intra >= 0.0 && cfg.p_intra <= 1.0))
    throw std::invalid_argument("generate_synthetic: p_intra outside [0, 1]");
  if (!(cfg.q_inter >= 0.0 && cfg.q_inter <= 1.0))
    throw std::invalid_argument("generate_synthetic: q_inter outside [0, 1]");
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("generate_synthetic: sigma must be positive");
}

}  // namespace

SynthDataset generate_synthetic(const SynthConfig& cfg) {
  check_config(cfg);
  const int n = cfg.num_nodes;
  const int half = n / 2;

  LabelVector labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i < half ? 0 : 1;

  // pair scan in a fixed i<j order keeps the edge stream reproducible
  SplitMix64 edge_rng = substream(cfg.seed, StreamTag::edges);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? cfg.p_intra : cfg.q_inter;
      if (edge_rng.uniform() < p) edges.emplace_back(i, j);
    }

  SplitMix64 feat_rng = substream(cfg.seed, StreamTag::features);
  Matrix features(n, cfg.feature_dim);
  for (int i = 0; i < n; ++i) {
    const double mean = labels[i] == 0 ? cfg.mu : -cfg.mu;
    for (int f = 0; f < cfg.feature_dim; ++f)
      features(i, f) = mean + cfg.sigma * feat_rng.gaussian();
  }

  SynthDataset out;
  out.data.graph = build_graph(edges, n);
  out.data.features = std::move(features);
  out.data.labels = std::move(labels);
  out.config = cfg;
  return out;
}

Split random_split(const LabelVector& labels, double train_fraction, std::uint64_t seed) {
  const int n = static_cast<int>(labels.size());
  if (n == 0) throw std::invalid_argument("random_split: empty label vector");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("random_split: train_fraction must lie in (0, 1)");
  const int k = num_classes(labels);

  std::vector<std::vector<int>> members(k);
  for (int i = 0; i < n; ++i) members[labels[i]].push_back(i);

  SplitMix64 rng = substream(seed, StreamTag::split);
  const int target = static_cast<int>(train_fraction * n);
  std::vector<int> take(k);
  int assigned = 0;
  for (int c = 0; c < k; ++c) {
    take[c] = static_cast<int>(train_fraction * members[c].size());
    assigned += take[c];
  }
  // top up by largest fractional remainder, ties to the lower class id
  std::vector<int> order(k);
  for (int c = 0; c < k; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ra = train_fraction * members[a].size() - take[a];
    const double rb = train_fraction * members[b].size() - take[b];
    return ra > rb;
  });
  for (int idx = 0; assigned < target && idx < k; ++idx) {
    const int c = order[idx];
    if (take[c] < static_cast<int>(members[c].size())) {
      ++take[c];
      ++assigned;
    }
  }

  Split split;
  split.train.assign(n, 0);
  split.val.assign(n, 0);
  split.test.assign(n, 0);
  for (int c = 0; c < k; ++c) {
    auto& ids = members[c];
    for (std::size_t i = ids.size(); i > 1; --i)
      std::swap(ids[i - 1], ids[rng.below(i)]);  // Fisher-Yates
    for (std::size_t i = 0; i < ids.size(); ++i)
      (static_cast<int>(i) < take[c] ? split.train : split.test)[ids[i]] = 1;
  }
  return split;
}

}  // namespace fagcn
