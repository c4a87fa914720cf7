#include "fagcn/models.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fagcn/rng.hpp"

namespace fagcn {

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "fagcn") return ModelKind::fagcn;
  if (s == "gcn") return ModelKind::gcn;
  if (s == "mlp") return ModelKind::mlp;
  if (s == "low_probe") return ModelKind::low_probe;
  if (s == "high_probe") return ModelKind::high_probe;
  throw std::invalid_argument("model_kind_from_string: unknown kind '" + s + "'");
}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::fagcn: return "fagcn";
    case ModelKind::gcn: return "gcn";
    case ModelKind::mlp: return "mlp";
    case ModelKind::low_probe: return "low_probe";
    case ModelKind::high_probe: return "high_probe";
  }
  throw std::invalid_argument("to_string: bad ModelKind");
}

std::vector<double> EdgeCoefficients::alpha_low() const {
  std::vector<double> out(alpha_g.size());
  for (std::size_t i = 0; i < alpha_g.size(); ++i) out[i] = 0.5 + 0.5 * alpha_g[i];
  return out;
}

std::vector<double> EdgeCoefficients::alpha_high() const {
  std::vector<double> out(alpha_g.size());
  for (std::size_t i = 0; i < alpha_g.size(); ++i) out[i] = 0.5 - 0.5 * alpha_g[i];
  return out;
}

std::vector<const Param*> Model::parameters() const {
  std::vector<const Param*> out;
  for (Param* p : const_cast<Model*>(this)->parameters()) out.push_back(p);
  return out;
}

TensorRef edge_gate(Tape& tape, TensorRef h, const Graph& g, TensorRef gate_vec) {
  const Matrix& gv = tape.value(gate_vec);
  const Matrix& hv = tape.value(h);
  if (gv.cols != 1 || gv.rows != 2 * hv.cols)
    throw std::invalid_argument("edge_gate: gate vector must be 2F x 1");
  TensorRef hi = tape.gather_rows(h, g.arc_sources());
  TensorRef hj = tape.gather_rows(h, g.col_indices);
  TensorRef pair = tape.concat_cols(hi, hj);
  return tape.tanh(tape.matmul(pair, gate_vec));
}

namespace {

// 1/sqrt(d_i d_j) per arc, CSR order.
Matrix arc_norms(const Graph& g) {
  Matrix w(static_cast<std::size_t>(g.num_arcs()), 1);
  int a = 0;
  for (int i = 0; i < g.num_nodes; ++i)
    for (int k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k, ++a)
      w(a, 0) = 1.0 / std::sqrt(static_cast<double>(g.degrees[i]) * g.degrees[g.col_indices[k]]);
  return w;
}

}  // namespace

TensorRef fagcn_propagate(Tape& tape, TensorRef h_prev, TensorRef h0, TensorRef alpha,
                          const Graph& g, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("fagcn_propagate: epsilon must lie in [0, 1]");
  const Matrix& av = tape.value(alpha);
  if (av.cols != 1 || av.rows != static_cast<std::size_t>(g.num_arcs()))
    throw std::invalid_argument("fagcn_propagate: alpha must align with the arc list");
  TensorRef weights = tape.mul(alpha, tape.constant(arc_norms(g)));
  TensorRef messages = tape.gather_rows(h_prev, g.col_indices);
  TensorRef agg = tape.edge_scatter_sum(weights, messages, g.arc_sources(), g.num_nodes);
  return tape.add(tape.scale(h0, epsilon), agg);
}

// ---- FAGCN ----

FagcnModel::FagcnModel(FagcnConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      w1_("w1", cfg.in_dim, cfg.hidden_dim),
      w2_("w2", cfg.hidden_dim, cfg.num_classes) {
  if (cfg_.in_dim < 1 || cfg_.hidden_dim < 1 || cfg_.num_classes < 2 || cfg_.num_layers < 1)
    throw std::invalid_argument("FagcnModel: bad dimensions");
  if (!(cfg_.epsilon >= 0.0 && cfg_.epsilon <= 1.0))
    throw std::invalid_argument("FagcnModel: epsilon must lie in [0, 1]");
  SplitMix64 rng = substream(seed, StreamTag::init);
  glorot_init(w1_, rng);
  glorot_init(w2_, rng);
  gates_.reserve(cfg_.num_layers);
  for (int l = 0; l < cfg_.num_layers; ++l) {
    gates_.emplace_back("gate" + std::to_string(l), 2 * cfg_.hidden_dim, 1);
    glorot_init(gates_.back(), rng, 0.1);  // small gates: start near the ungated regime
  }
}

TensorRef FagcnModel::forward(Tape& tape, const Dataset& ds, RunMode mode,
                              std::uint64_t dropout_seed, LayerTrace* trace) {
  if (ds.features.cols != static_cast<std::size_t>(cfg_.in_dim))
    throw std::invalid_argument("FagcnModel::forward: feature dimension mismatch");
  const bool train = mode == RunMode::train;
  TensorRef x = tape.dropout(tape.constant(ds.features), cfg_.dropout, substream(dropout_seed, 0).next(), train);
  TensorRef h0 = tape.dropout(tape.relu(tape.matmul(x, tape.leaf(w1_))), cfg_.dropout,
                              substream(dropout_seed, 1).next(), train);
  if (trace && mode == RunMode::eval) {
    trace->hidden.clear();
    trace->coefficients.clear();
    trace->hidden.push_back(tape.value(h0));
  }
  TensorRef h = h0;
  for (int l = 0; l < cfg_.num_layers; ++l) {
    TensorRef gate_in = cfg_.gates_from_h0 ? h0 : h;
    TensorRef alpha = edge_gate(tape, gate_in, ds.graph, tape.leaf(gates_[l]));
    h = fagcn_propagate(tape, h, h0, alpha, ds.graph, cfg_.epsilon);
    if (trace && mode == RunMode::eval) {
      EdgeCoefficients coeffs;
      coeffs.alpha_g = tape.value(alpha).data;
      trace->coefficients.push_back(std::move(coeffs));
      trace->hidden.push_back(tape.value(h));
    }
  }
  return tape.matmul(h, tape.leaf(w2_));
}

std::vector<Param*> FagcnModel::parameters() {
  std::vector<Param*> out{&w1_, &w2_};
  for (Param& g : gates_) out.push_back(&g);
  return out;
}

nlohmann::json FagcnModel::hyperparams() const {
  return {{"kind", "fagcn"},        {"in_dim", cfg_.in_dim},
          {"hidden_dim", cfg_.hidden_dim}, {"num_classes", cfg_.num_classes},
          {"num_layers", cfg_.num_layers}, {"epsilon", cfg_.epsilon},
          {"dropout", cfg_.dropout},       {"gates_from_h0", cfg_.gates_from_h0}};
}

// ---- GCN ----

SparseOperator gcn_operator(const Graph& g) {
  SparseOperator op;
  op.num_nodes = g.num_nodes;
  op.row_offsets.assign(g.num_nodes + 1, 0);
  op.col_indices.reserve(g.col_indices.size() + g.num_nodes);
  op.weights.reserve(g.col_indices.size() + g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) {
    const double di = g.degrees[i] + 1.0;
    bool diag_done = false;
    for (int k = g.row_offsets[i]; k < g.row_offsets[i + 1]; ++k) {
      const int j = g.col_indices[k];
      if (!diag_done && j > i) {
        op.col_indices.push_back(i);
        op.weights.push_back(1.0 / di);
        diag_done = true;
      }
      op.col_indices.push_back(j);
      op.weights.push_back(1.0 / std::sqrt(di * (g.degrees[j] + 1.0)));
    }
    if (!diag_done) {
      op.col_indices.push_back(i);
      op.weights.push_back(1.0 / di);
    }
    op.row_offsets[i + 1] = static_cast<int>(op.col_indices.size());
  }
  return op;
}

GcnModel::GcnModel(GcnConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg_.in_dim < 1 || cfg_.hidden_dim < 1 || cfg_.num_classes < 2 || cfg_.num_layers < 1)
    throw std::invalid_argument("GcnModel: bad dimensions");
  SplitMix64 rng = substream(seed, StreamTag::init);
  weights_.reserve(cfg_.num_layers);
  for (int l = 0; l < cfg_.num_layers; ++l) {
    const int rows = l == 0 ? cfg_.in_dim : cfg_.hidden_dim;
    const int cols = l == cfg_.num_layers - 1 ? cfg_.num_classes : cfg_.hidden_dim;
    weights_.emplace_back("w" + std::to_string(l), rows, cols);
    glorot_init(weights_.back(), rng);
  }
}

TensorRef GcnModel::forward(Tape& tape, const Dataset& ds, RunMode mode,
                            std::uint64_t dropout_seed, LayerTrace*) {
  if (ds.features.cols != static_cast<std::size_t>(cfg_.in_dim))
    throw std::invalid_argument("GcnModel::forward: feature dimension mismatch");
  const bool train = mode == RunMode::train;
  const SparseOperator op = gcn_operator(ds.graph);
  // realize the operator through gather/scatter so one code path serves all models
  std::vector<int> op_sources(op.col_indices.size());
  for (int i = 0; i < op.num_nodes; ++i)
    for (int k = op.row_offsets[i]; k < op.row_offsets[i + 1]; ++k) op_sources[k] = i;
  Matrix wcol(op.weights.size(), 1);
  for (std::size_t k = 0; k < op.weights.size(); ++k) wcol(k, 0) = op.weights[k];

  TensorRef h = tape.constant(ds.features);
  for (int l = 0; l < cfg_.num_layers; ++l) {
    h = tape.dropout(h, cfg_.dropout, substream(dropout_seed, static_cast<std::uint64_t>(l)).next(),
                     train);
    h = tape.matmul(h, tape.leaf(weights_[l]));
    TensorRef msgs = tape.gather_rows(h, op.col_indices);
    h = tape.edge_scatter_sum(tape.constant(wcol), msgs, op_sources, op.num_nodes);
    if (l + 1 < cfg_.num_layers) h = tape.relu(h);
  }
  return h;
}

std::vector<Param*> GcnModel::parameters() {
  std::vector<Param*> out;
  for (Param& w : weights_) out.push_back(&w);
  return out;
}

nlohmann::json GcnModel::hyperparams() const {
  return {{"kind", "gcn"},
          {"in_dim", cfg_.in_dim},
          {"hidden_dim", cfg_.hidden_dim},
          {"num_classes", cfg_.num_classes},
          {"num_layers", cfg_.num_layers},
          {"dropout", cfg_.dropout}};
}

// ---- MLP ----

MlpModel::MlpModel(MlpConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      w1_("w1", cfg.in_dim, cfg.hidden_dim),
      b1_("b1", 1, cfg.hidden_dim),
      w2_("w2", cfg.hidden_dim, cfg.num_classes),
      b2_("b2", 1, cfg.num_classes) {
  if (cfg_.in_dim < 1 || cfg_.hidden_dim < 1 || cfg_.num_classes < 2)
    throw std::invalid_argument("MlpModel: bad dimensions");
  SplitMix64 rng = substream(seed, StreamTag::init);
  glorot_init(w1_, rng);
  glorot_init(w2_, rng);
  // biases start at zero
}

TensorRef MlpModel::forward(Tape& tape, const Dataset& ds, RunMode mode,
                            std::uint64_t dropout_seed, LayerTrace*) {
  if (ds.features.cols != static_cast<std::size_t>(cfg_.in_dim))
    throw std::invalid_argument("MlpModel::forward: feature dimension mismatch");
  const bool train = mode == RunMode::train;
  TensorRef x = tape.dropout(tape.constant(ds.features), cfg_.dropout,
                             substream(dropout_seed, 0).next(), train);
  TensorRef h = tape.relu(tape.add_rowvec(tape.matmul(x, tape.leaf(w1_)), tape.leaf(b1_)));
  h = tape.dropout(h, cfg_.dropout, substream(dropout_seed, 1).next(), train);
  return tape.add_rowvec(tape.matmul(h, tape.leaf(w2_)), tape.leaf(b2_));
}

std::vector<Param*> MlpModel::parameters() { return {&w1_, &b1_, &w2_, &b2_}; }

nlohmann::json MlpModel::hyperparams() const {
  return {{"kind", "mlp"},
          {"in_dim", cfg_.in_dim},
          {"hidden_dim", cfg_.hidden_dim},
          {"num_classes", cfg_.num_classes},
          {"dropout", cfg_.dropout}};
}

// ---- filter probe ----

FilterProbeModel::FilterProbeModel(FilterSpec spec, int in_dim, int num_classes, std::uint64_t seed)
    : spec_(spec), w_("w", in_dim, num_classes) {
  if (spec_.kind != FilterKind::low && spec_.kind != FilterKind::high)
    throw std::invalid_argument("FilterProbeModel: probe kind must be low or high");
  if (in_dim < 1 || num_classes < 2) throw std::invalid_argument("FilterProbeModel: bad dimensions");
  SplitMix64 rng = substream(seed, StreamTag::init);
  glorot_init(w_, rng);
}

ModelKind FilterProbeModel::kind() const {
  return spec_.kind == FilterKind::low ? ModelKind::low_probe : ModelKind::high_probe;
}

TensorRef FilterProbeModel::forward(Tape& tape, const Dataset& ds, RunMode, std::uint64_t,
                                    LayerTrace*) {
  if (ds.features.cols != w_.value.rows)
    throw std::invalid_argument("FilterProbeModel::forward: feature dimension mismatch");
  TensorRef filtered = tape.constant(apply_filter_spatial(ds.graph, spec_, ds.features));
  return tape.matmul(filtered, tape.leaf(w_));
}

std::vector<Param*> FilterProbeModel::parameters() { return {&w_}; }

nlohmann::json FilterProbeModel::hyperparams() const {
  return {{"kind", to_string(kind())},
          {"filter", to_string(spec_.kind)},
          {"epsilon", spec_.epsilon},
          {"in_dim", static_cast<int>(w_.value.rows)},
          {"num_classes", static_cast<int>(w_.value.cols)}};
}

// ---- checkpoints ----

namespace {

constexpr char kMagic[8] = {'F', 'A', 'G', 'N', 'C', 'K', 'P', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  const auto params = model.parameters();
  out.write(kMagic, sizeof kMagic);
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    write_u32(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u64(out, p->value.rows);
    write_u64(out, p->value.cols);
  }
  for (const Param* p : params)
    out.write(reinterpret_cast<const char*>(p->value.data.data()),
              static_cast<std::streamsize>(p->value.data.size() * sizeof(double)));
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);

  nlohmann::json side = model.hyperparams();
  side["trained"] = model.trained;
  std::ofstream js(path + ".json");
  if (!js) throw std::runtime_error("save_checkpoint: cannot open " + path + ".json");
  js << side.dump(2) << '\n';
}

std::unique_ptr<Model> load_checkpoint(const std::string& path) {
  std::ifstream js(path + ".json");
  if (!js) throw std::runtime_error("load_checkpoint: missing sidecar " + path + ".json");
  nlohmann::json side = nlohmann::json::parse(js);

  std::unique_ptr<Model> model;
  const std::string kind = side.at("kind").get<std::string>();
  if (kind == "fagcn") {
    FagcnConfig cfg;
    cfg.in_dim = side.at("in_dim").get<int>();
    cfg.hidden_dim = side.at("hidden_dim").get<int>();
    cfg.num_classes = side.at("num_classes").get<int>();
    cfg.num_layers = side.at("num_layers").get<int>();
    cfg.epsilon = side.at("epsilon").get<double>();
    cfg.dropout = side.at("dropout").get<double>();
    cfg.gates_from_h0 = side.at("gates_from_h0").get<bool>();
    model = std::make_unique<FagcnModel>(cfg, 0);
  } else if (kind == "gcn") {
    GcnConfig cfg;
    cfg.in_dim = side.at("in_dim").get<int>();
    cfg.hidden_dim = side.at("hidden_dim").get<int>();
    cfg.num_classes = side.at("num_classes").get<int>();
    cfg.num_layers = side.at("num_layers").get<int>();
    cfg.dropout = side.at("dropout").get<double>();
    model = std::make_unique<GcnModel>(cfg, 0);
  } else if (kind == "mlp") {
    MlpConfig cfg;
    cfg.in_dim = side.at("in_dim").get<int>();
    cfg.hidden_dim = side.at("hidden_dim").get<int>();
    cfg.num_classes = side.at("num_classes").get<int>();
    cfg.dropout = side.at("dropout").get<double>();
    model = std::make_unique<MlpModel>(cfg, 0);
  } else if (kind == "low_probe" || kind == "high_probe") {
    FilterSpec spec;
    spec.kind = filter_kind_from_string(side.at("filter").get<std::string>());
    spec.epsilon = side.at("epsilon").get<double>();
    model = std::make_unique<FilterProbeModel>(spec, side.at("in_dim").get<int>(),
                                               side.at("num_classes").get<int>(), 0);
  } else {
    throw std::runtime_error("load_checkpoint: unknown model kind '" + kind + "'");
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  const std::uint32_t count = read_u32(in);
  auto params = model->parameters();
  if (count != params.size()) throw std::runtime_error("load_checkpoint: tensor count mismatch");
  for (Param* p : params) {
    const std::uint32_t len = read_u32(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    const std::uint64_t rows = read_u64(in);
    const std::uint64_t cols = read_u64(in);
    if (!in || name != p->name || rows != p->value.rows || cols != p->value.cols)
      throw std::runtime_error("load_checkpoint: shape table mismatch for '" + name + "'");
  }
  for (Param* p : params)
    in.read(reinterpret_cast<char*>(p->value.data.data()),
            static_cast<std::streamsize>(p->value.data.size() * sizeof(double)));
  if (!in) throw std::runtime_error("load_checkpoint: truncated values in " + path);
  model->trained = side.value("trained", false);
  return model;
}

}  // namespace fagcn
