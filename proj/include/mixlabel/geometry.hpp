#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mixlabel {

using PointIndex = std::uint32_t;
using ClassId = int;
using InstanceId = std::int64_t;

inline constexpr ClassId kBackgroundClass = 0;

/// An ordered LiDAR sweep. Point indices 0..N-1 are the identity of points
/// and are never reordered after construction.
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(std::string scene_id, std::vector<Eigen::Vector3d> points,
             std::vector<float> intensity = {});

  const std::string& scene_id() const { return scene_id_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const Eigen::Vector3d& operator[](PointIndex i) const { return points_[i]; }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }

  bool has_intensity() const { return !intensity_.empty(); }
  const std::vector<float>& intensity() const { return intensity_; }

 private:
  std::string scene_id_;
  std::vector<Eigen::Vector3d> points_;
  std::vector<float> intensity_;
};

/// Wraps an angle into (-pi, pi].
double normalize_yaw(double yaw);

/// Oriented 3D box. dims are (length along heading, width, height).
struct Box3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d dims = Eigen::Vector3d::Ones();
  double yaw = 0.0;
  ClassId class_id = 0;
  std::optional<double> score;

  /// Throws std::invalid_argument unless dims are strictly positive and finite.
  void validate() const;

  /// Coordinates of `p` in the box frame (translate by -center, rotate by -yaw).
  Eigen::Vector3d to_local(const Eigen::Vector3d& p) const;
  Eigen::Vector3d to_world(const Eigen::Vector3d& local) const;

  /// Closed containment.
  bool contains(const Eigen::Vector3d& p) const;

  /// BEV corners, counter-clockwise starting at (+l/2, +w/2).
  std::array<Eigen::Vector2d, 4> bev_corners() const;
};

/// Sorted, duplicate-free point indices into one cloud.
class PointIndexSet {
 public:
  PointIndexSet() = default;

  /// Sorts and deduplicates.
  static PointIndexSet from_unsorted(std::vector<PointIndex> indices);
  /// Throws std::invalid_argument if `indices` is not strictly increasing.
  static PointIndexSet from_sorted(std::vector<PointIndex> indices);

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(PointIndex i) const;

  const std::vector<PointIndex>& indices() const { return indices_; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  PointIndex operator[](std::size_t k) const { return indices_[k]; }

  /// Throws std::out_of_range if any index is >= n.
  void check_bounds(std::size_t n) const;

  friend bool operator==(const PointIndexSet&, const PointIndexSet&) = default;

 private:
  explicit PointIndexSet(std::vector<PointIndex> sorted) : indices_(std::move(sorted)) {}
  std::vector<PointIndex> indices_;
};

std::size_t intersection_size(const PointIndexSet& a, const PointIndexSet& b);

PointIndexSet points_in_box(const PointCloud& cloud, const Box3D& box);

/// |a ∩ b| / |a ∪ b|, 0 when both are empty.
double point_set_iou(const PointIndexSet& a, const PointIndexSet& b);

/// Component id per member of the input subset, aligned with subset order.
/// Ids are dense, ordered by the smallest point index of each component.
struct ComponentLabeling {
  std::vector<std::uint32_t> component_of;
  std::size_t num_components = 0;
};

/// Radius-graph connected components (distance <= radius links two points).
ComponentLabeling connected_components(const PointCloud& cloud,
                                       const PointIndexSet& subset, double radius);

/// Closed point-in-polygon test in the XY plane. Throws std::invalid_argument
/// for a polygon with zero area.
bool bev_polygon_contains(std::span<const Eigen::Vector2d, 4> polygon,
                          const Eigen::Vector2d& point);

double polygon_signed_area(std::span<const Eigen::Vector2d> polygon);

}  // namespace mixlabel
