#pragma once

#include <string>

#include "fagcn/dataset.hpp"

namespace fagcn {

// On-disk dataset: graph text file, features CSV (one row per node), labels
// CSV (one class id per line) and optionally a split-mask file with one code
// per node: 0 train, 1 val, 2 test, 3 unused. Row counts must agree.
struct DatasetBundle {
  std::string graph_path;
  std::string features_path;
  std::string labels_path;
  std::string splits_path;  // empty when absent
};

Dataset load_bundle(const DatasetBundle& bundle);

Split load_split_masks(const std::string& path, int num_nodes);
void write_split_masks(const std::string& path, const Split& split);

void write_features_csv(const std::string& path, const Matrix& features);
Matrix read_features_csv(const std::string& path);

void write_labels_csv(const std::string& path, const LabelVector& labels);
LabelVector read_labels_csv(const std::string& path);

}  // namespace fagcn
