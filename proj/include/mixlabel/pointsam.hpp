#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mixlabel/labels.hpp"

namespace mixlabel {

/// Pinhole camera. Extrinsics map sensor coordinates into the camera frame
/// (x right, y down, z forward): p_cam = rotation * p_sensor + translation.
struct CameraModel {
  std::string name;
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int width = 1, height = 1;

  void validate() const;
};

struct PixelHit {
  double u = 0.0, v = 0.0;
  double depth = 0.0;
  int col() const;  // nearest pixel, pixel k covers [k, k+1)
  int row() const;
};

/// Per point: pixel hit, or nullopt when behind the camera or outside the image.
std::vector<std::optional<PixelHit>> project_points(const PointCloud& cloud, const CameraModel& camera);

/// One camera's 2D masks: instance ids (0 = no mask) and semantic classes,
/// row-major, width * height entries each.
struct InstanceMasks2D {
  int width = 0, height = 0;
  std::vector<std::uint32_t> instance;
  std::vector<std::uint16_t> semantic;

  std::size_t at(int col, int row) const { return static_cast<std::size_t>(row) * width + col; }
  void validate() const;
};

/// Per-point mask membership. mask_id 0 means background; a point carries a
/// nonzero class iff it carries a nonzero mask.
struct PointLabeling {
  std::vector<std::uint32_t> mask_id;
  std::vector<ClassId> class_id;

  std::size_t size() const { return mask_id.size(); }
  bool is_foreground(std::size_t i) const { return mask_id[i] != 0; }
  static PointLabeling background(std::size_t n) { return {std::vector<std::uint32_t>(n, 0), std::vector<ClassId>(n, 0)}; }
  void validate(std::size_t n_points) const;
  friend bool operator==(const PointLabeling&, const PointLabeling&) = default;
};

/// Class of each mask: the semantic category with the highest pixel count
/// inside it (background pixels excluded, ties to the smaller class).
/// Masks with no foreground pixels map to kBackgroundClass.
std::map<std::uint32_t, ClassId> vote_mask_classes(const InstanceMasks2D& masks);

struct LiftStats {
  std::size_t in_view = 0;     // points visible in at least one camera
  std::size_t on_mask = 0;     // of those, landing on a nonzero mask pixel in the chosen camera
  std::size_t labeled = 0;     // of those, with a foreground mask class
};

/// Lifts 2D masks onto points. A point seen by several cameras takes its
/// labeling from the camera with the smallest depth. Mask ids are renumbered
/// to be unique across cameras: ordered by (camera index, local id), from 1.
/// Throws std::invalid_argument on mask/camera size mismatch.
PointLabeling lift_masks(const PointCloud& cloud, std::span<const CameraModel> cameras,
                         std::span<const InstanceMasks2D> masks, LiftStats* stats = nullptr);

struct SarRadii {
  std::map<ClassId, double> per_class;
  double fallback = 0.5;

  double radius_for(ClassId c) const;
  void validate() const;
  /// vehicle 0.6, pedestrian 0.2, cyclist 0.4, others 0.5 for classes 1/2/3.
  static SarRadii defaults();
};

struct SarStats {
  std::size_t masks_in = 0;
  std::size_t masks_split = 0;           // masks that spanned several components
  std::size_t points_backgrounded = 0;
  std::size_t masks_merged = 0;          // masks fused into another mask's instance
  std::size_t instances_out = 0;
  std::size_t rounds = 0;
};

/// Separability-aware refinement.
///  1. Connected components over foreground points, per class, with the
///     class radius.
///  2. Split: a mask spanning several components keeps only its points in
///     the component where it has the most points (ties to the smaller
///     component id); the rest become background.
///  3. Merge: all masks within one component fuse into one instance.
/// Steps 1-2 repeat until no split happens, since dropping points can
/// disconnect a component. Output instance ids are 1.. by smallest point index.
PointLabeling sar_refine(const PointCloud& cloud, const PointLabeling& labeling, const SarRadii& radii,
                         SarStats* stats = nullptr);

/// Offsets each camera translation by an independent uniform draw per axis
/// in [-half_range_m, half_range_m). Cameras are processed in order.
std::vector<CameraModel> perturb_calibration(std::span<const CameraModel> cameras, double half_range_m,
                                             std::uint64_t seed);

/// One cluster per foreground mask id, instance_id = mask id, ascending.
std::vector<ClusterLabel> labeling_to_clusters(const PointLabeling& labeling);

}  // namespace mixlabel
