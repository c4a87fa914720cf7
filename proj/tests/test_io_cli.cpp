#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fagcn/experiments.hpp"
#include "fagcn/io.hpp"
#include "fagcn/synth.hpp"
#include "test_util.hpp"

using namespace fagcn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

// ---- CLI harness -----------------------------------------------------------

std::string cli_path() {
  const char* p = std::getenv("FAGCN_CLI");
  REQUIRE_MESSAGE(p != nullptr, "FAGCN_CLI must point at the command-line binary");
  return p;
}

int run_cli(const std::string& args, const fs::path& capture) {
  const std::string cmd = cli_path() + " " + args + " >" + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status >= 0);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("features csv round trips bit-exactly") {
  const fs::path dir = fresh_dir("fagcn_io_feat");
  Matrix m = testutil::random_matrix(17, 6, 71);
  m(0, 0) = 1e-300;
  m(1, 1) = -0.1;
  m(2, 2) = 12345678.987654321;
  write_features_csv((dir / "f.csv").string(), m);
  Matrix back = read_features_csv((dir / "f.csv").string());
  CHECK(back.rows == m.rows);
  CHECK(back.cols == m.cols);
  CHECK(back.data == m.data);
  fs::remove_all(dir);
}

TEST_CASE("labels csv round trips") {
  const fs::path dir = fresh_dir("fagcn_io_lab");
  LabelVector labels = {0, 1, 1, 0, 1};
  write_labels_csv((dir / "l.csv").string(), labels);
  CHECK(read_labels_csv((dir / "l.csv").string()) == labels);
  fs::remove_all(dir);
}

TEST_CASE("malformed tabular files are rejected") {
  const fs::path dir = fresh_dir("fagcn_io_bad");
  SUBCASE("ragged feature rows") {
    spit(dir / "f.csv", "1.0,2.0\n3.0\n");
    CHECK_THROWS_AS(read_features_csv((dir / "f.csv").string()), std::runtime_error);
  }
  SUBCASE("non-numeric feature") {
    spit(dir / "f.csv", "1.0,abc\n");
    CHECK_THROWS_AS(read_features_csv((dir / "f.csv").string()), std::runtime_error);
  }
  SUBCASE("negative label") {
    spit(dir / "l.csv", "0\n-2\n");
    CHECK_THROWS_AS(read_labels_csv((dir / "l.csv").string()), std::runtime_error);
  }
  SUBCASE("missing files") {
    CHECK_THROWS_AS(read_features_csv((dir / "absent.csv").string()), std::runtime_error);
    CHECK_THROWS_AS(read_labels_csv((dir / "absent.csv").string()), std::runtime_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("split masks round trip and validate") {
  const fs::path dir = fresh_dir("fagcn_io_split");
  Split sp;
  sp.train = {1, 0, 0, 0};
  sp.val = {0, 1, 0, 0};
  sp.test = {0, 0, 1, 0};  // node 3 unused
  write_split_masks((dir / "s.txt").string(), sp);
  Split back = load_split_masks((dir / "s.txt").string(), 4);
  CHECK(back.train == sp.train);
  CHECK(back.val == sp.val);
  CHECK(back.test == sp.test);

  SUBCASE("wrong node count") {
    CHECK_THROWS_AS(load_split_masks((dir / "s.txt").string(), 5), std::runtime_error);
  }
  SUBCASE("invalid code") {
    spit(dir / "bad.txt", "0\n4\n");
    CHECK_THROWS_AS(load_split_masks((dir / "bad.txt").string(), 2), std::runtime_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("load_bundle cross-checks row counts") {
  const fs::path dir = fresh_dir("fagcn_io_bundle");
  SynthConfig cfg;
  cfg.num_nodes = 10;
  cfg.feature_dim = 3;
  Dataset ds = generate_synthetic(cfg).data;
  write_graph_text((dir / "g.txt").string(), ds.graph);
  write_features_csv((dir / "f.csv").string(), ds.features);
  write_labels_csv((dir / "l.csv").string(), ds.labels);

  DatasetBundle bundle{(dir / "g.txt").string(), (dir / "f.csv").string(),
                       (dir / "l.csv").string(), ""};
  Dataset back = load_bundle(bundle);
  CHECK(back.graph.num_nodes == 10);
  CHECK(back.features.data == ds.features.data);
  CHECK(back.labels == ds.labels);

  SUBCASE("feature row mismatch") {
    Matrix wrong(9, 3);
    write_features_csv((dir / "f.csv").string(), wrong);
    CHECK_THROWS_AS(load_bundle(bundle), std::runtime_error);
  }
  SUBCASE("label count mismatch") {
    write_labels_csv((dir / "l.csv").string(), {0, 1});
    CHECK_THROWS_AS(load_bundle(bundle), std::runtime_error);
  }
  fs::remove_all(dir);
}

TEST_CASE("csv writers freeze their headers") {
  const fs::path dir = fresh_dir("fagcn_io_csv");
  write_sweep_csv((dir / "s.csv").string(), {{0.05, "fagcn", 3, 0.925}});
  CHECK(slurp(dir / "s.csv") == "q,model,seed,test_acc\n0.050000,fagcn,3,0.925000\n");

  write_depth_csv((dir / "d.csv").string(), {{8, "gcn", 1, 0.5}});
  CHECK(slurp(dir / "d.csv") == "depth,model,seed,test_acc\n8,gcn,1,0.500000\n");

  write_coeff_csv((dir / "c.csv").string(), {{4, 7, -0.25, 0, 2}});
  CHECK(slurp(dir / "c.csv") == "src,dst,alpha,intra,layer\n4,7,-0.250000,0,2\n");

  write_filter_response_csv((dir / "fr.csv").string(), {{FilterKind::low, 0.3, 0.0, 1.3}});
  CHECK(slurp(dir / "fr.csv") == "kind,epsilon,lambda,amplitude\nlow,0.300000,0.000000,1.3\n");
  fs::remove_all(dir);
}

TEST_CASE("filter_response_grid covers the lambda grid") {
  auto rows = filter_response_grid({FilterKind::low, FilterKind::high}, {0.0, 0.3});
  CHECK(rows.size() == 2 * 2 * 201);
  CHECK(rows.front().lambda == 0.0);
  CHECK(rows[200].lambda == 2.0);
  for (const auto& r : rows)
    CHECK(r.amplitude == filter_response({r.kind, r.epsilon}, r.lambda));
}

// ---- command-line integration ----------------------------------------------

TEST_CASE("cli synth-gen writes a loadable bundle and refuses overwrites") {
  const fs::path dir = fresh_dir("fagcn_cli_synth");
  const fs::path log = dir / "log.txt";
  const std::string out = (dir / "data").string();

  CHECK(run_cli("--out " + out + " synth-gen", log) == 0);
  CHECK(fs::exists(dir / "data" / "graph.txt"));
  CHECK(fs::exists(dir / "data" / "features.csv"));
  CHECK(fs::exists(dir / "data" / "labels.csv"));
  const std::string stdout_text = slurp(log);
  CHECK(stdout_text.find("nodes=200") != std::string::npos);

  SUBCASE("second run without --force fails") {
    CHECK(run_cli("--out " + out + " synth-gen", log) == 2);
    CHECK(slurp(log).find("--force") != std::string::npos);
  }
  SUBCASE("re-run with --force is byte-identical") {
    const std::string first = slurp(dir / "data" / "features.csv");
    const std::string first_graph = slurp(dir / "data" / "graph.txt");
    CHECK(run_cli("--out " + out + " --force synth-gen", log) == 0);
    CHECK(slurp(dir / "data" / "features.csv") == first);
    CHECK(slurp(dir / "data" / "graph.txt") == first_graph);
  }
  SUBCASE("seed flag changes the dataset") {
    const std::string first = slurp(dir / "data" / "features.csv");
    CHECK(run_cli("--out " + out + " --force --seed 7 synth-gen", log) == 0);
    CHECK(slurp(dir / "data" / "features.csv") != first);
  }
  fs::remove_all(dir);
}

TEST_CASE("cli train produces a run report and checkpoint") {
  const fs::path dir = fresh_dir("fagcn_cli_train");
  const fs::path log = dir / "log.txt";
  spit(dir / "cfg.json",
       R"({"synth": {"num_nodes": 40, "feature_dim": 6, "mu": 1.0, "p_intra": 0.2, "q_inter": 0.02}})");
  CHECK(run_cli("--config " + (dir / "cfg.json").string() + " --out " + (dir / "data").string() +
                    " synth-gen",
                log) == 0);

  spit(dir / "train.json", R"({
    "bundle": {
      "graph": ")" + (dir / "data" / "graph.txt").string() + R"(",
      "features": ")" + (dir / "data" / "features.csv").string() + R"(",
      "labels": ")" + (dir / "data" / "labels.csv").string() + R"("
    },
    "train": {"max_epochs": 60, "hidden_dim": 8}
  })");
  const std::string run_args =
      "--config " + (dir / "train.json").string() + " --out " + (dir / "run").string() + " train";
  CHECK(run_cli(run_args, log) == 0);
  CHECK(fs::exists(dir / "run" / "run.json"));
  CHECK(fs::exists(dir / "run" / "model.ckpt"));
  CHECK(fs::exists(dir / "run" / "model.ckpt.json"));
  CHECK(slurp(log).find("test_accuracy=") != std::string::npos);

  SUBCASE("re-run is byte identical") {
    const std::string run_json = slurp(dir / "run" / "run.json");
    const std::string ckpt = slurp(dir / "run" / "model.ckpt");
    CHECK(run_cli("--force " + run_args, log) == 0);
    CHECK(slurp(dir / "run" / "run.json") == run_json);
    CHECK(slurp(dir / "run" / "model.ckpt") == ckpt);
  }
  SUBCASE("missing input file exits 2") {
    fs::remove(dir / "data" / "features.csv");
    CHECK(run_cli("--force " + run_args, log) == 2);
  }
  fs::remove_all(dir);
}

TEST_CASE("cli rejects bad invocations with exit 1") {
  const fs::path dir = fresh_dir("fagcn_cli_bad");
  const fs::path log = dir / "log.txt";
  SUBCASE("no subcommand") { CHECK(run_cli("", log) == 1); }
  SUBCASE("unknown flag") { CHECK(run_cli("--bogus synth-gen", log) == 1); }
  SUBCASE("malformed config json") {
    spit(dir / "bad.json", "{nope");
    CHECK(run_cli("--config " + (dir / "bad.json").string() + " synth-gen", log) == 1);
  }
  SUBCASE("unknown config key") {
    spit(dir / "bad.json", R"({"synth": {"p_intro": 0.1}})");
    CHECK(run_cli("--config " + (dir / "bad.json").string() + " --out " + (dir / "o").string() +
                      " synth-gen",
                  log) == 1);
    CHECK(slurp(log).find("p_intro") != std::string::npos);
  }
  SUBCASE("bad model name") {
    spit(dir / "bad.json", R"({"train": {"model": "resnet"}})");
    CHECK(run_cli("--config " + (dir / "bad.json").string() + " --out " + (dir / "o").string() +
                      " sweep-q",
                  log) == 1);
  }
  SUBCASE("help exits 0") { CHECK(run_cli("--help", log) == 0); }
  fs::remove_all(dir);
}

TEST_CASE("cli filter-response emits the frozen grid") {
  const fs::path dir = fresh_dir("fagcn_cli_fr");
  const fs::path log = dir / "log.txt";
  CHECK(run_cli("--out " + (dir / "fr").string() + " filter-response", log) == 0);
  const std::string text = slurp(dir / "fr" / "filter_response.csv");
  CHECK(text.rfind("kind,epsilon,lambda,amplitude\n", 0) == 0);
  CHECK(text.find("low,0.300000,0.000000,1.3\n") != std::string::npos);
  // 6 kinds x 1 epsilon x 201 lambdas + header
  CHECK(std::count(text.begin(), text.end(), '\n') == 6 * 201 + 1);
}

TEST_CASE("cli assortativity prints the closed-form value") {
  const fs::path dir = fresh_dir("fagcn_cli_assort");
  const fs::path log = dir / "log.txt";
  spit(dir / "g.txt", "3 2\n0 1\n1 2\n");
  spit(dir / "l.csv", "0\n0\n1\n");
  CHECK(run_cli("assortativity --graph " + (dir / "g.txt").string() + " --labels " +
                    (dir / "l.csv").string(),
                log) == 0);
  CHECK(slurp(log) == "-0.333333\n");
  fs::remove_all(dir);
}

TEST_CASE("cli sweep and coefficient commands re-run byte-identically") {
  const fs::path dir = fresh_dir("fagcn_cli_sweeps");
  const fs::path log = dir / "log.txt";
  // tiny instances: this exercises plumbing, not the acceptance-scale physics
  spit(dir / "cfg.json", R"({
    "synth": {"num_nodes": 30, "feature_dim": 5, "mu": 1.0, "p_intra": 0.25},
    "train": {"max_epochs": 25, "hidden_dim": 4},
    "q_values": [0.02, 0.08],
    "models": ["low_probe", "fagcn"],
    "seeds": [1, 2]
  })");
  const std::string sweep_args = "--config " + (dir / "cfg.json").string() + " --out " +
                                 (dir / "sweep_out").string() + " sweep-q";
  CHECK(run_cli(sweep_args, log) == 0);
  const std::string sweep_csv = slurp(dir / "sweep_out" / "sweep_q.csv");
  CHECK(sweep_csv.rfind("q,model,seed,test_acc\n", 0) == 0);
  // 2 q x 2 models x 2 seeds + header
  CHECK(std::count(sweep_csv.begin(), sweep_csv.end(), '\n') == 9);
  CHECK(run_cli("--force " + sweep_args, log) == 0);
  CHECK(slurp(dir / "sweep_out" / "sweep_q.csv") == sweep_csv);

  spit(dir / "depth.json", R"({
    "synth": {"num_nodes": 30, "feature_dim": 5, "mu": 1.0, "p_intra": 0.25, "q_inter": 0.02},
    "train": {"max_epochs": 25, "hidden_dim": 4},
    "depths": [1, 2],
    "models": ["fagcn", "gcn"],
    "seeds": [1]
  })");
  const std::string depth_args = "--config " + (dir / "depth.json").string() + " --out " +
                                 (dir / "depth").string() + " depth-sweep";
  CHECK(run_cli(depth_args, log) == 0);
  const std::string depth_csv = slurp(dir / "depth" / "depth_sweep.csv");
  CHECK(depth_csv.rfind("depth,model,seed,test_acc\n", 0) == 0);
  CHECK(std::count(depth_csv.begin(), depth_csv.end(), '\n') == 5);
  CHECK(run_cli("--force " + depth_args, log) == 0);
  CHECK(slurp(dir / "depth" / "depth_sweep.csv") == depth_csv);

  spit(dir / "coeff.json", R"({
    "synth": {"num_nodes": 30, "feature_dim": 5, "mu": 1.0, "p_intra": 0.25, "q_inter": 0.02},
    "train": {"max_epochs": 25, "hidden_dim": 4}
  })");
  const std::string coeff_args = "--config " + (dir / "coeff.json").string() + " --out " +
                                 (dir / "coeff").string() + " coeff-hist";
  CHECK(run_cli(coeff_args, log) == 0);
  const std::string coeff_csv = slurp(dir / "coeff" / "coeffs.csv");
  CHECK(coeff_csv.rfind("src,dst,alpha,intra,layer\n", 0) == 0);
  CHECK(slurp(log).find("mean_alpha_intra=") != std::string::npos);
  CHECK(run_cli("--force " + coeff_args, log) == 0);
  CHECK(slurp(dir / "coeff" / "coeffs.csv") == coeff_csv);
  fs::remove_all(dir);
}
