// Command-line front end: synthetic dataset generation, filter response
// curves, training runs and the three analysis sweeps. Every command is a
// pure function of (config, seed): re-runs write byte-identical outputs.
// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fagcn/experiments.hpp"
#include "fagcn/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// config problems exit with 1, runtime failures with 2
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool force = false;
};

json load_config(const GlobalOpts& g) {
  if (g.config_path.empty()) return json::object();
  std::ifstream in(g.config_path);
  if (!in) throw ConfigError("cannot open config " + g.config_path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for key '" + key + "'");
  }
}

fagcn::SynthConfig parse_synth(const json& j, const GlobalOpts& g) {
  check_keys(j, {"num_nodes", "feature_dim", "mu", "sigma", "p_intra", "q_inter", "seed"}, "synth");
  fagcn::SynthConfig cfg;
  cfg.num_nodes = get_or(j, "num_nodes", cfg.num_nodes);
  cfg.feature_dim = get_or(j, "feature_dim", cfg.feature_dim);
  cfg.mu = get_or(j, "mu", cfg.mu);
  cfg.sigma = get_or(j, "sigma", cfg.sigma);
  cfg.p_intra = get_or(j, "p_intra", cfg.p_intra);
  cfg.q_inter = get_or(j, "q_inter", cfg.q_inter);
  cfg.seed = get_or(j, "seed", cfg.seed);
  if (g.seed_set) cfg.seed = g.seed;
  return cfg;
}

fagcn::TrainConfig parse_train(const json& j, const GlobalOpts& g) {
  check_keys(j,
             {"model", "lr", "dropout", "weight_decay", "num_layers", "epsilon", "hidden_dim",
              "max_epochs", "patience", "seed", "gates_from_h0"},
             "train");
  fagcn::TrainConfig cfg;
  if (j.contains("model")) {
    try {
      cfg.model = fagcn::model_kind_from_string(j.at("model").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  cfg.lr = get_or(j, "lr", cfg.lr);
  cfg.dropout = get_or(j, "dropout", cfg.dropout);
  cfg.weight_decay = get_or(j, "weight_decay", cfg.weight_decay);
  cfg.num_layers = get_or(j, "num_layers", cfg.num_layers);
  cfg.epsilon = get_or(j, "epsilon", cfg.epsilon);
  cfg.hidden_dim = get_or(j, "hidden_dim", cfg.hidden_dim);
  cfg.max_epochs = get_or(j, "max_epochs", cfg.max_epochs);
  cfg.patience = get_or(j, "patience", cfg.patience);
  cfg.seed = get_or(j, "seed", cfg.seed);
  cfg.gates_from_h0 = get_or(j, "gates_from_h0", cfg.gates_from_h0);
  if (g.seed_set) cfg.seed = g.seed;
  return cfg;
}

std::vector<fagcn::ModelKind> parse_models(const json& j, const std::string& key,
                                           std::vector<fagcn::ModelKind> fallback) {
  if (!j.contains(key)) return fallback;
  std::vector<fagcn::ModelKind> out;
  try {
    for (const auto& s : j.at(key)) out.push_back(fagcn::model_kind_from_string(s.get<std::string>()));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad '") + key + "' list: " + e.what());
  }
  if (out.empty()) throw ConfigError("'" + key + "' must not be empty");
  return out;
}

template <typename T>
std::vector<T> parse_list(const json& j, const std::string& key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  try {
    auto out = j.at(key).get<std::vector<T>>();
    if (out.empty()) throw ConfigError("'" + key + "' must not be empty");
    return out;
  } catch (const json::exception&) {
    throw ConfigError("bad value for key '" + key + "'");
  }
}

fs::path out_file(const GlobalOpts& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  fs::path p = fs::path(g.out_dir) / name;
  if (fs::exists(p) && !g.force)
    throw std::runtime_error("refusing to overwrite " + p.string() + " (pass --force)");
  return p;
}

int cmd_synth_gen(const GlobalOpts& g) {
  const json cfg_json = load_config(g);
  check_keys(cfg_json, {"synth"}, "config");
  const fagcn::SynthConfig cfg = parse_synth(cfg_json.value("synth", json::object()), g);
  const fs::path graph_path = out_file(g, "graph.txt");
  const fs::path feat_path = out_file(g, "features.csv");
  const fs::path label_path = out_file(g, "labels.csv");

  fagcn::SynthDataset ds = fagcn::generate_synthetic(cfg);
  fagcn::write_graph_text(graph_path.string(), ds.data.graph);
  fagcn::write_features_csv(feat_path.string(), ds.data.features);
  fagcn::write_labels_csv(label_path.string(), ds.data.labels);

  std::cout << "nodes=" << ds.data.graph.num_nodes << " edges=" << ds.data.graph.num_edges();
  if (ds.data.graph.num_edges() > 0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", fagcn::label_assortativity(ds.data.graph, ds.data.labels));
    std::cout << " assortativity=" << buf;
  }
  std::cout << '\n';
  return 0;
}

int cmd_filter_response(const GlobalOpts& g) {
  const json cfg_json = load_config(g);
  check_keys(cfg_json, {"kinds", "epsilons"}, "config");
  std::vector<fagcn::FilterKind> kinds = {fagcn::FilterKind::low,         fagcn::FilterKind::high,
                                          fagcn::FilterKind::low_squared, fagcn::FilterKind::high_squared,
                                          fagcn::FilterKind::gcn,         fagcn::FilterKind::gcn_squared};
  if (cfg_json.contains("kinds")) {
    kinds.clear();
    try {
      for (const auto& s : cfg_json.at("kinds"))
        kinds.push_back(fagcn::filter_kind_from_string(s.get<std::string>()));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad 'kinds' list: ") + e.what());
    }
    if (kinds.empty()) throw ConfigError("'kinds' must not be empty");
  }
  const std::vector<double> epsilons = parse_list<double>(cfg_json, "epsilons", {0.3});
  const fs::path path = out_file(g, "filter_response.csv");
  fagcn::write_filter_response_csv(path.string(), fagcn::filter_response_grid(kinds, epsilons));
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

json run_result_json(const fagcn::TrainConfig& cfg, const fagcn::RunResult& res) {
  json out;
  out["model"] = fagcn::to_string(cfg.model);
  out["seed"] = cfg.seed;
  out["test_accuracy"] = res.test_accuracy;
  if (res.best_validation_accuracy)
    out["best_validation_accuracy"] = *res.best_validation_accuracy;
  else
    out["best_validation_accuracy"] = nullptr;
  out["epoch_of_best"] = res.epoch_of_best;
  out["epochs_run"] = res.epochs_run;
  out["loss_history"] = res.loss_history;
  out["accuracy_history"] = res.accuracy_history;
  return out;
}

int cmd_train(const GlobalOpts& g, const fagcn::DatasetBundle& flag_bundle) {
  const json cfg_json = load_config(g);
  check_keys(cfg_json, {"bundle", "train", "train_fraction"}, "config");
  fagcn::DatasetBundle bundle;
  if (cfg_json.contains("bundle")) {
    const json& b = cfg_json.at("bundle");
    check_keys(b, {"graph", "features", "labels", "splits"}, "bundle");
    bundle.graph_path = get_or<std::string>(b, "graph", "");
    bundle.features_path = get_or<std::string>(b, "features", "");
    bundle.labels_path = get_or<std::string>(b, "labels", "");
    bundle.splits_path = get_or<std::string>(b, "splits", "");
  }
  // flags win over the config
  if (!flag_bundle.graph_path.empty()) bundle.graph_path = flag_bundle.graph_path;
  if (!flag_bundle.features_path.empty()) bundle.features_path = flag_bundle.features_path;
  if (!flag_bundle.labels_path.empty()) bundle.labels_path = flag_bundle.labels_path;
  if (!flag_bundle.splits_path.empty()) bundle.splits_path = flag_bundle.splits_path;
  if (bundle.graph_path.empty() || bundle.features_path.empty() || bundle.labels_path.empty())
    throw ConfigError("train needs graph, features and labels paths (config or flags)");

  const fagcn::TrainConfig cfg = parse_train(cfg_json.value("train", json::object()), g);
  const double train_fraction = get_or(cfg_json, "train_fraction", 0.5);

  const fs::path run_path = out_file(g, "run.json");
  const fs::path ckpt_path = out_file(g, "model.ckpt");

  const fagcn::Dataset ds = fagcn::load_bundle(bundle);
  const fagcn::Split split =
      bundle.splits_path.empty()
          ? fagcn::random_split(ds.labels, train_fraction, cfg.seed)
          : fagcn::load_split_masks(bundle.splits_path, ds.graph.num_nodes);

  auto model = fagcn::make_model(cfg, static_cast<int>(ds.features.cols),
                                 fagcn::num_classes(ds.labels));
  const fagcn::RunResult res = fagcn::train(*model, ds, split, cfg);

  std::ofstream out(run_path);
  if (!out) throw std::runtime_error("cannot open " + run_path.string());
  out << run_result_json(cfg, res).dump(2) << '\n';
  fagcn::save_checkpoint(ckpt_path.string(), *model);

  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", res.test_accuracy);
  std::cout << "test_accuracy=" << buf << " epoch_of_best=" << res.epoch_of_best << '\n';
  return 0;
}

int cmd_sweep_q(const GlobalOpts& g) {
  const json cfg_json = load_config(g);
  check_keys(cfg_json, {"synth", "train", "q_values", "models", "seeds"}, "config");
  const fagcn::SynthConfig synth = parse_synth(cfg_json.value("synth", json::object()), g);
  const fagcn::TrainConfig train_cfg = parse_train(cfg_json.value("train", json::object()), g);
  const auto q_values = parse_list<double>(
      cfg_json, "q_values", {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10});
  const auto seeds = parse_list<std::uint64_t>(cfg_json, "seeds", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  const auto models = parse_models(cfg_json, "models",
                                   {fagcn::ModelKind::low_probe, fagcn::ModelKind::high_probe,
                                    fagcn::ModelKind::fagcn});
  const fs::path path = out_file(g, "sweep_q.csv");
  fagcn::write_sweep_csv(path.string(), fagcn::sweep_q(synth, train_cfg, q_values, models, seeds));
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_depth_sweep(const GlobalOpts& g) {
  const json cfg_json = load_config(g);
  check_keys(cfg_json, {"synth", "train", "depths", "models", "seeds"}, "config");
  const fagcn::SynthConfig synth = parse_synth(cfg_json.value("synth", json::object()), g);
  const fagcn::TrainConfig train_cfg = parse_train(cfg_json.value("train", json::object()), g);
  const auto depths = parse_list<int>(cfg_json, "depths", {1, 2, 3, 4, 5, 6, 7, 8});
  const auto seeds = parse_list<std::uint64_t>(cfg_json, "seeds", {1, 2, 3, 4, 5});
  const auto models =
      parse_models(cfg_json, "models", {fagcn::ModelKind::fagcn, fagcn::ModelKind::gcn});
  const fs::path path = out_file(g, "depth_sweep.csv");

  const fagcn::SynthDataset ds = fagcn::generate_synthetic(synth);
  const fagcn::Split split = fagcn::random_split(ds.data.labels, 0.5, synth.seed);
  fagcn::write_depth_csv(path.string(),
                         fagcn::depth_sweep(ds.data, split, train_cfg, depths, models, seeds));
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_coeff_hist(const GlobalOpts& g) {
  const json cfg_json = load_config(g);
  check_keys(cfg_json, {"synth", "train"}, "config");
  const fagcn::SynthConfig synth = parse_synth(cfg_json.value("synth", json::object()), g);
  fagcn::TrainConfig train_cfg = parse_train(cfg_json.value("train", json::object()), g);
  if (train_cfg.model != fagcn::ModelKind::fagcn)
    throw ConfigError("coeff-hist requires the gated model");
  const fs::path path = out_file(g, "coeffs.csv");

  const fagcn::SynthDataset ds = fagcn::generate_synthetic(synth);
  const fagcn::Split split = fagcn::random_split(ds.data.labels, 0.5, synth.seed);
  auto model = fagcn::make_model(train_cfg, static_cast<int>(ds.data.features.cols),
                                 fagcn::num_classes(ds.data.labels));
  fagcn::train(*model, ds.data, split, train_cfg);
  const fagcn::CoeffHistogram hist = fagcn::coeff_histogram(*model, ds.data);
  fagcn::write_coeff_csv(path.string(), hist.rows);

  char bi[32], be[32];
  std::snprintf(bi, sizeof bi, "%.6f", hist.mean_intra);
  std::snprintf(be, sizeof be, "%.6f", hist.mean_inter);
  std::cout << "mean_alpha_intra=" << bi << " mean_alpha_inter=" << be << '\n';
  return 0;
}

int cmd_assortativity(const std::string& graph_path, const std::string& labels_path) {
  const fagcn::Graph graph = fagcn::read_graph_text(graph_path);
  const fagcn::LabelVector labels = fagcn::read_labels_csv(labels_path);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", fagcn::label_assortativity(graph, labels));
  std::cout << buf << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frequency-adaptive graph convolution toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON config file")->expected(1);
  app.add_option("--out", g.out_dir, "output directory (default .)")->expected(1);
  auto* seed_opt = app.add_option("--seed", g.seed, "override the config seed");
  app.add_flag("--force", g.force, "overwrite existing outputs");

  auto* synth_gen = app.add_subcommand("synth-gen", "generate a synthetic two-block dataset");
  auto* filter_response = app.add_subcommand("filter-response", "emit kernel amplitude curves");
  auto* train_cmd = app.add_subcommand("train", "train one model on a dataset bundle");
  auto* sweep_q_cmd = app.add_subcommand("sweep-q", "accuracy vs inter-class density");
  auto* depth_cmd = app.add_subcommand("depth-sweep", "accuracy vs propagation depth");
  auto* coeff_cmd = app.add_subcommand("coeff-hist", "gate coefficients of a trained model");
  auto* assort_cmd = app.add_subcommand("assortativity", "label assortativity of a bundle");

  fagcn::DatasetBundle flag_bundle;
  train_cmd->add_option("--graph", flag_bundle.graph_path, "graph text file");
  train_cmd->add_option("--features", flag_bundle.features_path, "features CSV");
  train_cmd->add_option("--labels", flag_bundle.labels_path, "labels CSV");
  train_cmd->add_option("--splits", flag_bundle.splits_path, "split mask file");

  std::string assort_graph, assort_labels;
  assort_cmd->add_option("--graph", assort_graph, "graph text file")->required();
  assort_cmd->add_option("--labels", assort_labels, "labels CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  g.seed_set = seed_opt->count() > 0;

  try {
    if (synth_gen->parsed()) return cmd_synth_gen(g);
    if (filter_response->parsed()) return cmd_filter_response(g);
    if (train_cmd->parsed()) return cmd_train(g, flag_bundle);
    if (sweep_q_cmd->parsed()) return cmd_sweep_q(g);
    if (depth_cmd->parsed()) return cmd_depth_sweep(g);
    if (coeff_cmd->parsed()) return cmd_coeff_hist(g);
    if (assort_cmd->parsed()) return cmd_assortativity(assort_graph, assort_labels);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
