#include "fagcn/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fagcn {

Dataset load_bundle(const DatasetBundle& bundle) {
  Dataset ds;
  ds.graph = read_graph_text(bundle.graph_path);
  ds.features = read_features_csv(bundle.features_path);
  ds.labels = read_labels_csv(bundle.labels_path);
  if (ds.features.rows != static_cast<std::size_t>(ds.graph.num_nodes))
    throw std::runtime_error("load_bundle: feature rows do not match the node count");
  if (ds.labels.size() != static_cast<std::size_t>(ds.graph.num_nodes))
    throw std::runtime_error("load_bundle: label rows do not match the node count");
  return ds;
}

Split load_split_masks(const std::string& path, int num_nodes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_split_masks: cannot open " + path);
  Split split;
  split.train.assign(num_nodes, 0);
  split.val.assign(num_nodes, 0);
  split.test.assign(num_nodes, 0);
  int code = 0, i = 0;
  for (; i < num_nodes && (in >> code); ++i) {
    switch (code) {
      case 0: split.train[i] = 1; break;
      case 1: split.val[i] = 1; break;
      case 2: split.test[i] = 1; break;
      case 3: break;
      default:
        throw std::runtime_error("load_split_masks: bad code " + std::to_string(code) + " in " + path);
    }
  }
  if (i != num_nodes || (in >> code))
    throw std::runtime_error("load_split_masks: mask rows do not match the node count");
  return split;
}

void write_split_masks(const std::string& path, const Split& split) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_split_masks: cannot open " + path);
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    int code = 3;
    if (split.train[i]) code = 0;
    else if (!split.val.empty() && split.val[i]) code = 1;
    else if (split.test[i]) code = 2;
    out << code << '\n';
  }
}

void write_features_csv(const std::string& path, const Matrix& features) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_features_csv: cannot open " + path);
  char buf[64];
  for (std::size_t i = 0; i < features.rows; ++i) {
    for (std::size_t j = 0; j < features.cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", features(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_features_csv: write failed for " + path);
}

Matrix read_features_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_features_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("read_features_csv: bad value '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("read_features_csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_features_csv: empty file " + path);
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  return m;
}

void write_labels_csv(const std::string& path, const LabelVector& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_labels_csv: cannot open " + path);
  for (int y : labels) out << y << '\n';
  if (!out) throw std::runtime_error("write_labels_csv: write failed for " + path);
}

LabelVector read_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_labels_csv: cannot open " + path);
  LabelVector labels;
  int y = 0;
  while (in >> y) {
    if (y < 0) throw std::runtime_error("read_labels_csv: negative label in " + path);
    labels.push_back(y);
  }
  if (!in.eof()) throw std::runtime_error("read_labels_csv: bad value in " + path);
  if (labels.empty()) throw std::runtime_error("read_labels_csv: empty file " + path);
  return labels;
}

}  // namespace fagcn
