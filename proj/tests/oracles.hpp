#pragma once
// Independent reference implementations used as test oracles. They favour
// obviousness over speed and share no code with the library.

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <Eigen/Geometry>

#include "mixlabel/geometry.hpp"

namespace oracle {

inline bool in_box(const Eigen::Vector3d& p, const mixlabel::Box3D& box) {
  const Eigen::Matrix3d to_box = Eigen::AngleAxisd(-box.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Vector3d q = to_box * (p - box.center);
  return std::abs(q.x()) <= box.dims.x() / 2 && std::abs(q.y()) <= box.dims.y() / 2 &&
         std::abs(q.z()) <= box.dims.z() / 2;
}

inline std::set<mixlabel::PointIndex> points_in_box(const mixlabel::PointCloud& cloud, const mixlabel::Box3D& box) {
  std::set<mixlabel::PointIndex> out;
  for (mixlabel::PointIndex i = 0; i < cloud.size(); ++i) {
    if (in_box(cloud[i], box)) out.insert(i);
  }
  return out;
}

inline double set_iou(const std::set<mixlabel::PointIndex>& a, const std::set<mixlabel::PointIndex>& b) {
  std::set<mixlabel::PointIndex> uni = a;
  uni.insert(b.begin(), b.end());
  if (uni.empty()) return 0.0;
  std::size_t inter = 0;
  for (auto i : a) inter += b.count(i);
  return static_cast<double>(inter) / static_cast<double>(uni.size());
}

inline std::set<mixlabel::PointIndex> to_set(const mixlabel::PointIndexSet& s) { return {s.begin(), s.end()}; }

/// Reachability by repeated relaxation over the full pair matrix; returns for
/// each subset member the smallest subset position it is connected to.
inline std::vector<std::size_t> closure_roots(const mixlabel::PointCloud& cloud, const std::vector<mixlabel::PointIndex>& subset,
                                              double radius) {
  const std::size_t n = subset.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) reach[i][j] = (cloud[subset[i]] - cloud[subset[j]]).norm() <= radius;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = true;
      }
    }
  }
  std::vector<std::size_t> root(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (reach[i][j]) {
        root[i] = j;
        break;
      }
    }
  }
  return root;
}

/// Even-odd crossing test with an explicit on-edge check (closed polygon).
inline bool ray_cast_contains(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % n];
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (cross == 0.0 && p.x() >= std::min(a.x(), b.x()) && p.x() <= std::max(a.x(), b.x()) &&
        p.y() >= std::min(a.y(), b.y()) && p.y() <= std::max(a.y(), b.y())) {
      return true;
    }
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace oracle
