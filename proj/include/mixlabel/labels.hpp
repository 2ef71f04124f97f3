#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixlabel/geometry.hpp"

namespace mixlabel {

/// Coarse label: a set of foreground points with a class, no geometry.
struct ClusterLabel {
  PointIndexSet points;
  ClassId class_id = 0;
  InstanceId instance_id = 0;
};

/// A box as stored in label files (ground truth, accurate labels, pseudo boxes).
struct BoxRecord {
  Box3D box;
  InstanceId instance_id = 0;
};

/// Accurate label: the box plus the cluster it encloses.
struct BoxLabel {
  Box3D box;
  ClusterLabel cluster;

  InstanceId instance_id() const { return cluster.instance_id; }
  static BoxLabel enclose(const PointCloud& cloud, const Box3D& box, InstanceId id);
};

struct LabelSet {
  std::string scene_id;
  std::vector<ClusterLabel> clusters;
  std::vector<BoxLabel> boxes;

  std::size_t label_count() const { return clusters.size() + boxes.size(); }

  /// Checks the label-set invariants against `cloud`: nonempty clusters,
  /// enclosed clusters equal to the box interior, unique instance ids.
  /// Box labels may enclose zero points. Throws std::invalid_argument.
  void validate(const PointCloud& cloud) const;
};

// ---------------------------------------------------------------------------
// Cluster center

/// Per-axis midpoint of the min and max coordinate over the cluster's points.
Eigen::Vector3d cluster_center(const ClusterLabel& label, const PointCloud& cloud);
Eigen::Vector3d cluster_center(const PointIndexSet& points, const PointCloud& cloud);

// ---------------------------------------------------------------------------
// Noisy clusters from boxes

struct NoiseModel {
  double shift_range = 0.0;   // meters, uniform per BEV axis in [-r, r)
  double expand_range = 0.0;  // fraction, each dim scaled by 1 + U[0, r)
  double rotate_range = 0.0;  // radians, uniform in [-r, r)
  std::uint64_t seed = 0;

  void validate() const;

  /// "noise0" (expand 0-10%), "noise1" (shift 0.1 m, expand 0-50%),
  /// "noise2" (shift 0.2 m, expand 0-20%, rotate 15 deg), or "none".
  static NoiseModel preset(std::string_view name);
};

class Rng;

/// Applies one draw of `noise` to `box`. Draw order is fixed:
/// shift x, shift y, expand l, expand w, expand h, rotate.
Box3D perturb_box(const Box3D& box, const NoiseModel& noise, Rng& rng);

struct ClusterGeneration {
  std::vector<ClusterLabel> clusters;
  std::vector<InstanceId> dropped;  // boxes whose noisy interior was empty
};

ClusterGeneration clusters_from_boxes(const PointCloud& cloud, std::span<const BoxRecord> gt_boxes,
                                      const NoiseModel& noise);

// ---------------------------------------------------------------------------
// Three-click parallelogram

struct ClickConfig {
  double z_min = -3.0;
  double z_max = 5.0;
};

/// Parallelogram corners (A, B, B + C - A, C) for clicks (A, B, C) with A the corner vertex.
std::array<Eigen::Vector2d, 4> parallelogram_from_clicks(const std::array<Eigen::Vector2d, 3>& clicks);

/// Throws std::invalid_argument for collinear clicks or an empty cluster.
ClusterLabel cluster_from_clicks(const PointCloud& cloud, const std::array<Eigen::Vector2d, 3>& clicks,
                                 ClassId class_id, InstanceId instance_id,
                                 const ClickConfig& config = {});

// ---------------------------------------------------------------------------
// Box budget

struct BudgetItem {
  std::size_t id = 0;
  ClassId class_id = 0;
};

struct BudgetSelection {
  std::vector<std::size_t> selected;   // ascending
  std::vector<std::size_t> remainder;  // ascending
};

/// Weighted sampling without replacement of round(ratio * N) items (at least
/// one when N > 0). Classes missing from `class_weights` weigh 1.
BudgetSelection select_budget(std::span<const BudgetItem> items, double ratio,
                              const std::map<ClassId, double>& class_weights, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Annotation cost

/// Cost of one cluster label relative to one accurate box label.
inline constexpr double kClusterCostRatio = 0.14;

struct CostReport {
  std::size_t n_box = 0;
  std::size_t n_cluster = 0;
  std::size_t n_total = 0;
  double cost = 0.0;
};

CostReport annotation_cost(std::size_t n_box, std::size_t n_cluster, std::size_t n_total);
CostReport annotation_cost(const LabelSet& labels, std::size_t n_total);

// ---------------------------------------------------------------------------
// Pilot-study crops

struct PilotCropParams {
  double expand = 2.0;      // meters added to each full dimension
  double shift_min = 0.2;   // meters
  double shift_max = 0.5;   // meters
  double rotate_range = 0.7853981633974483;  // 45 deg
};

struct CropRegion {
  std::size_t proposal_index = 0;
  Box3D region_box;
  double shift_magnitude = 0.0;
  PointIndexSet source_points;
  std::vector<Eigen::Vector3d> local_points;  // in the perturbed box frame
  bool empty = false;
};

std::vector<CropRegion> pilot_crop_regions(const PointCloud& cloud, std::span<const Box3D> proposals,
                                           std::uint64_t seed, const PilotCropParams& params = {});

// ---------------------------------------------------------------------------
// Roadmap augmentation

enum class AugmentLevel { kNone, kCenter, kCenterShape, kCenterShapeHeading };

struct AugmentedCluster {
  ClusterLabel cluster;
  std::optional<Eigen::Vector3d> center;
  std::optional<Eigen::Vector3d> dims;
  std::optional<double> yaw;

  /// Full box supervision, only when every geometric field is attached.
  std::optional<Box3D> as_box() const;
};

AugmentedCluster augment_cluster(const ClusterLabel& label, const Box3D& gt, AugmentLevel level);

}  // namespace mixlabel
