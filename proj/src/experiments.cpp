#include "fagcn/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fagcn {

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path, const char* who) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(std::string(who) + ": cannot open " + path);
  return out;
}

}  // namespace

std::vector<SweepRow> sweep_q(const SynthConfig& base, const TrainConfig& train_cfg,
                              const std::vector<double>& q_values,
                              const std::vector<ModelKind>& models,
                              const std::vector<std::uint64_t>& seeds) {
  std::vector<SweepRow> rows;
  rows.reserve(q_values.size() * models.size() * seeds.size());
  for (double q : q_values) {
    // one dataset/split per (q, seed), reused for every model
    std::vector<SynthDataset> datasets;
    std::vector<Split> splits;
    for (std::uint64_t seed : seeds) {
      SynthConfig cfg = base;
      cfg.q_inter = q;
      cfg.seed = seed;
      datasets.push_back(generate_synthetic(cfg));
      splits.push_back(random_split(datasets.back().data.labels, 0.5, seed));
    }
    for (ModelKind kind : models) {
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        TrainConfig cfg = train_cfg;
        cfg.model = kind;
        cfg.seed = seeds[s];
        const Dataset& ds = datasets[s].data;
        auto model = make_model(cfg, static_cast<int>(ds.features.cols), num_classes(ds.labels));
        RunResult res = train(*model, ds, splits[s], cfg);
        rows.push_back({q, to_string(kind), seeds[s], res.test_accuracy});
      }
    }
  }
  return rows;
}

std::vector<DepthRow> depth_sweep(const Dataset& ds, const Split& split, const TrainConfig& base,
                                  const std::vector<int>& depths,
                                  const std::vector<ModelKind>& models,
                                  const std::vector<std::uint64_t>& seeds) {
  std::vector<DepthRow> rows;
  rows.reserve(depths.size() * models.size() * seeds.size());
  for (int depth : depths) {
    if (depth < 1) throw std::invalid_argument("depth_sweep: depth must be positive");
    for (ModelKind kind : models) {
      for (std::uint64_t seed : seeds) {
        TrainConfig cfg = base;
        cfg.model = kind;
        cfg.num_layers = depth;
        cfg.seed = seed;
        auto model = make_model(cfg, static_cast<int>(ds.features.cols), num_classes(ds.labels));
        RunResult res = train(*model, ds, split, cfg);
        rows.push_back({depth, to_string(kind), seed, res.test_accuracy});
      }
    }
  }
  return rows;
}

CoeffHistogram coeff_histogram(Model& model, const Dataset& ds) {
  if (!model.trained) throw std::invalid_argument("coeff_histogram: model has not been trained");
  if (model.kind() != ModelKind::fagcn)
    throw std::invalid_argument("coeff_histogram: coefficients only exist for gated models");
  Tape tape;
  LayerTrace trace;
  model.forward(tape, ds, RunMode::eval, 0, &trace);
  if (trace.coefficients.empty())
    throw std::runtime_error("coeff_histogram: forward pass produced no coefficients");

  const EdgeCoefficients& last = trace.coefficients.back();
  const int layer = static_cast<int>(trace.coefficients.size());
  const std::vector<int> sources = ds.graph.arc_sources();

  CoeffHistogram hist;
  hist.rows.reserve(last.alpha_g.size());
  double sum_intra = 0.0, sum_inter = 0.0;
  for (std::size_t a = 0; a < last.alpha_g.size(); ++a) {
    const int i = sources[a];
    const int j = ds.graph.col_indices[a];
    const int intra = ds.labels[i] == ds.labels[j] ? 1 : 0;
    hist.rows.push_back({i, j, last.alpha_g[a], intra, layer});
    if (intra) {
      sum_intra += last.alpha_g[a];
      ++hist.num_intra;
    } else {
      sum_inter += last.alpha_g[a];
      ++hist.num_inter;
    }
  }
  if (hist.num_intra) hist.mean_intra = sum_intra / static_cast<double>(hist.num_intra);
  if (hist.num_inter) hist.mean_inter = sum_inter / static_cast<double>(hist.num_inter);
  return hist;
}

std::vector<FilterResponseRow> filter_response_grid(const std::vector<FilterKind>& kinds,
                                                    const std::vector<double>& epsilons) {
  std::vector<FilterResponseRow> rows;
  rows.reserve(kinds.size() * epsilons.size() * 201);
  for (FilterKind kind : kinds)
    for (double eps : epsilons) {
      FilterSpec spec{kind, eps};
      for (int k = 0; k <= 200; ++k) {
        const double lambda = static_cast<double>(k) / 100.0;
        rows.push_back({kind, eps, lambda, filter_response(spec, lambda)});
      }
    }
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path, "write_sweep_csv");
  out << "q,model,seed,test_acc\n";
  for (const auto& r : rows)
    out << fmt6(r.q) << ',' << r.model << ',' << r.seed << ',' << fmt6(r.test_acc) << '\n';
}

void write_depth_csv(const std::string& path, const std::vector<DepthRow>& rows) {
  auto out = open_out(path, "write_depth_csv");
  out << "depth,model,seed,test_acc\n";
  for (const auto& r : rows)
    out << r.depth << ',' << r.model << ',' << r.seed << ',' << fmt6(r.test_acc) << '\n';
}

void write_coeff_csv(const std::string& path, const std::vector<CoeffRow>& rows) {
  auto out = open_out(path, "write_coeff_csv");
  out << "src,dst,alpha,intra,layer\n";
  for (const auto& r : rows)
    out << r.src << ',' << r.dst << ',' << fmt6(r.alpha) << ',' << r.intra << ',' << r.layer << '\n';
}

void write_filter_response_csv(const std::string& path, const std::vector<FilterResponseRow>& rows) {
  auto out = open_out(path, "write_filter_response_csv");
  out << "kind,epsilon,lambda,amplitude\n";
  for (const auto& r : rows)
    out << to_string(r.kind) << ',' << fmt6(r.epsilon) << ',' << fmt6(r.lambda) << ','
        << fmt17(r.amplitude) << '\n';
}

}  // namespace fagcn
