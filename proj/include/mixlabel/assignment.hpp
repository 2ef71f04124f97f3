#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mixlabel/labels.hpp"

namespace mixlabel {

using SampleId = std::uint64_t;

/// BEV grid of center-based samples. Cell (ix, iy) covers
/// [x_min + ix*cell, x_min + (ix+1)*cell) and likewise in y.
struct BevGrid {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double cell_size = 1.0;

  void validate() const;
  std::size_t nx() const;
  std::size_t ny() const;
  std::size_t cell_count() const { return nx() * ny(); }

  struct Cell {
    std::size_t ix = 0, iy = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
  };
  std::optional<Cell> cell_of(double x, double y) const;
  SampleId sample_id(const Cell& c) const { return static_cast<SampleId>(c.iy * nx() + c.ix); }
  Cell cell_from_sample(SampleId id) const { return {static_cast<std::size_t>(id % nx()), static_cast<std::size_t>(id / nx())}; }
};

enum class SampleSet { kAccurate, kCoarse, kNegative, kIgnored };

struct Sample {
  SampleId sample_id = 0;
  std::optional<InstanceId> matched_instance;
  ClassId class_target = kBackgroundClass;
  std::optional<Box3D> regression_target;
  double iou = 0.0;  // box-based only
};

/// S_a (box-supervised positives), S_c (cluster-supervised positives), S_n
/// (negatives). Each set is sorted by sample_id.
struct AssignmentPartition {
  std::vector<Sample> accurate;
  std::vector<Sample> coarse;
  std::vector<Sample> negative;
  std::vector<Sample> ignored;                // box-based band between thresholds
  std::vector<InstanceId> out_of_grid;        // center-based labels outside the grid
  std::vector<InstanceId> shadowed;           // center-based labels sharing a cell with a stronger label

  std::size_t candidate_count() const {
    return accurate.size() + coarse.size() + negative.size() + ignored.size();
  }
};

/// Center-based assignment with inconsistency removal: every label, box or
/// cluster, is positive at the cell of its cluster center. Box labels
/// additionally carry their box as regression target. A box label enclosing
/// no points falls back to its geometric center.
///
/// When several labels land in one cell, a box label wins over a cluster
/// label, then the smaller instance id; the rest are reported as shadowed.
AssignmentPartition center_assign(const LabelSet& labels, const PointCloud& cloud, const BevGrid& grid);

/// Point-level IoU between the points inside `candidate` and the label's points.
double box_cluster_iou(const PointCloud& cloud, const Box3D& candidate, const ClusterLabel& label);

struct BoxAssignConfig {
  double pos_thresh = 0.55;
  double neg_thresh = 0.45;
  void validate() const;
};

/// Box-based assignment over candidate boxes (anchors or proposals). Sample
/// ids are candidate indices.
AssignmentPartition box_assign(const PointCloud& cloud, std::span<const Box3D> candidates,
                               const LabelSet& labels, const BoxAssignConfig& config);

/// Mean classification loss over S_a ∪ S_c ∪ S_n plus mean regression loss
/// over S_a (0 when S_a is empty). Ignored samples do not contribute.
/// Throws std::invalid_argument when a required loss value is missing.
double combine_loss(const AssignmentPartition& partition, const std::map<SampleId, double>& cls_losses,
                    const std::map<SampleId, double>& reg_losses);

struct BoxDelta {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d dims = Eigen::Vector3d::Zero();
  double yaw = 0.0;

  Box3D apply(const Box3D& box) const;
};

struct ProbeEntry {
  bool membership_changed = false;
  bool iou_changed = false;
  double base_iou = 0.0;
  double perturbed_iou = 0.0;
};

/// For each perturbation, whether the enclosed point set and the box-cluster
/// IoU changed relative to the unperturbed candidate.
std::vector<ProbeEntry> iou_ambiguity_probe(const PointCloud& cloud, const Box3D& candidate,
                                            const ClusterLabel& label, std::span<const BoxDelta> perturbations);

}  // namespace mixlabel
