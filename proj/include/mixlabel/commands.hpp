#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "mixlabel/labels.hpp"

namespace mixlabel::cli {

struct GlobalOptions {
  std::filesystem::path manifest;
  std::optional<std::uint64_t> seed;  // overrides the manifest seed
  int jobs = 1;
  std::filesystem::path out_dir = "out";
};

struct GenLabelsOptions {
  std::string noise = "noise0";                      // preset name
  std::optional<std::filesystem::path> noise_config;  // JSON file with named presets
  double ratio = 0.1;
  std::map<ClassId, double> class_weights;
};

struct AssignOptions {
  std::string mode = "center";  // center | box
  std::filesystem::path config;
  std::optional<std::filesystem::path> labels_dir;  // default: <out>/labels
};

struct PointSamOptions {
  std::optional<std::filesystem::path> radii_config;
  double calib_noise_cm = 0.0;
};

struct EvalOptions {
  std::filesystem::path pred_dir;
  std::optional<std::filesystem::path> gt_dir;  // default: manifest label files
  double iou_match = 0.5;
};

struct SelfTrainOptions {
  std::optional<std::filesystem::path> labels_dir;  // default: <out>/labels
  std::optional<std::filesystem::path> pseudo_dir;  // default: manifest pseudo files
  double score_thresh = 0.7;
  double match_iou = 0.25;
};

struct CostOptions {
  std::optional<std::filesystem::path> labels_dir;  // default: <out>/labels
  std::optional<std::size_t> n_total;               // default: ground-truth box count
};

/// Each command processes every scene of the manifest on a pool of `jobs`
/// workers, writes one output file per scene plus an index, and returns the
/// process exit code: 0 iff no scene failed. Failing scene ids go to `err`.
int gen_labels(const GlobalOptions& g, const GenLabelsOptions& o, std::ostream& out, std::ostream& err);
int assign(const GlobalOptions& g, const AssignOptions& o, std::ostream& out, std::ostream& err);
int pointsam(const GlobalOptions& g, const PointSamOptions& o, std::ostream& out, std::ostream& err);
int eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out, std::ostream& err);
int selftrain(const GlobalOptions& g, const SelfTrainOptions& o, std::ostream& out, std::ostream& err);
int cost(const GlobalOptions& g, const CostOptions& o, std::ostream& out, std::ostream& err);

/// Parses "cls=weight" pairs, e.g. "3=5".
std::map<ClassId, double> parse_class_weights(const std::vector<std::string>& specs);

}  // namespace mixlabel::cli
