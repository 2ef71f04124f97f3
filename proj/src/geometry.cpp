#include "mixlabel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace mixlabel {

PointCloud::PointCloud(std::string scene_id, std::vector<Eigen::Vector3d> points,
                       std::vector<float> intensity)
    : scene_id_(std::move(scene_id)), points_(std::move(points)), intensity_(std::move(intensity)) {
  if (!intensity_.empty() && intensity_.size() != points_.size()) {
    throw std::invalid_argument("intensity count does not match point count");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw std::invalid_argument("point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
}

double normalize_yaw(double yaw) {
  constexpr double kPi = std::numbers::pi;
  if (yaw > -kPi && yaw <= kPi) return yaw;
  double r = std::remainder(yaw, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

void Box3D::validate() const {
  if (!center.allFinite() || !std::isfinite(yaw)) {
    throw std::invalid_argument("box has non-finite center or yaw");
  }
  if (!dims.allFinite() || (dims.array() <= 0.0).any()) {
    throw std::invalid_argument("box dims must be strictly positive");
  }
}

Eigen::Vector3d Box3D::to_local(const Eigen::Vector3d& p) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double dx = p.x() - center.x();
  const double dy = p.y() - center.y();
  return {c * dx + s * dy, -s * dx + c * dy, p.z() - center.z()};
}

Eigen::Vector3d Box3D::to_world(const Eigen::Vector3d& local) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {c * local.x() - s * local.y() + center.x(), s * local.x() + c * local.y() + center.y(),
          local.z() + center.z()};
}

bool Box3D::contains(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d q = to_local(p);
  return std::abs(q.x()) <= 0.5 * dims.x() && std::abs(q.y()) <= 0.5 * dims.y() &&
         std::abs(q.z()) <= 0.5 * dims.z();
}

std::array<Eigen::Vector2d, 4> Box3D::bev_corners() const {
  const double hl = 0.5 * dims.x();
  const double hw = 0.5 * dims.y();
  const std::array<Eigen::Vector3d, 4> local = {Eigen::Vector3d(hl, hw, 0), Eigen::Vector3d(-hl, hw, 0),
                                                Eigen::Vector3d(-hl, -hw, 0), Eigen::Vector3d(hl, -hw, 0)};
  std::array<Eigen::Vector2d, 4> out;
  for (std::size_t k = 0; k < 4; ++k) out[k] = to_world(local[k]).head<2>();
  return out;
}

PointIndexSet PointIndexSet::from_unsorted(std::vector<PointIndex> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return PointIndexSet(std::move(indices));
}

PointIndexSet PointIndexSet::from_sorted(std::vector<PointIndex> indices) {
  for (std::size_t k = 1; k < indices.size(); ++k) {
    if (indices[k - 1] >= indices[k]) {
      throw std::invalid_argument("point index set is not strictly increasing");
    }
  }
  return PointIndexSet(std::move(indices));
}

bool PointIndexSet::contains(PointIndex i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

void PointIndexSet::check_bounds(std::size_t n) const {
  if (!indices_.empty() && indices_.back() >= n) {
    throw std::out_of_range("point index " + std::to_string(indices_.back()) +
                            " out of range for cloud of " + std::to_string(n) + " points");
  }
}

std::size_t intersection_size(const PointIndexSet& a, const PointIndexSet& b) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

PointIndexSet points_in_box(const PointCloud& cloud, const Box3D& box) {
  std::vector<PointIndex> inside;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (box.contains(cloud[static_cast<PointIndex>(i)])) inside.push_back(static_cast<PointIndex>(i));
  }
  return PointIndexSet::from_sorted(std::move(inside));
}

double point_set_iou(const PointIndexSet& a, const PointIndexSet& b) {
  const std::size_t inter = intersection_size(a, b);
  const std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h);
  }
};

CellKey cell_of(const Eigen::Vector3d& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell)),
          static_cast<std::int64_t>(std::floor(p.y() / cell)),
          static_cast<std::int64_t>(std::floor(p.z() / cell))};
}

}  // namespace

ComponentLabeling connected_components(const PointCloud& cloud, const PointIndexSet& subset,
                                       double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("connected_components radius must be > 0");
  subset.check_bounds(cloud.size());

  const std::size_t n = subset.size();
  ComponentLabeling out;
  if (n == 0) return out;

  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> grid;
  grid.reserve(n);
  std::vector<CellKey> keys(n);
  for (std::size_t k = 0; k < n; ++k) {
    keys[k] = cell_of(cloud[subset[k]], radius);
    grid[keys[k]].push_back(static_cast<std::uint32_t>(k));
  }

  const double r2 = radius * radius;
  UnionFind uf(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Vector3d& p = cloud[subset[k]];
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({keys[k].x + dx, keys[k].y + dy, keys[k].z + dz});
          if (it == grid.end()) continue;
          for (std::uint32_t j : it->second) {
            if (j <= k) continue;
            if ((cloud[subset[j]] - p).squaredNorm() <= r2) uf.unite(k, j);
          }
        }
      }
    }
  }

  // subset is ascending, so first-seen order is smallest-member order.
  constexpr std::uint32_t kUnset = ~std::uint32_t{0};
  std::vector<std::uint32_t> root_id(n, kUnset);
  out.component_of.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t root = uf.find(k);
    if (root_id[root] == kUnset) root_id[root] = static_cast<std::uint32_t>(out.num_components++);
    out.component_of[k] = root_id[root];
  }
  return out;
}

double polygon_signed_area(std::span<const Eigen::Vector2d> polygon) {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

bool bev_polygon_contains(std::span<const Eigen::Vector2d, 4> polygon, const Eigen::Vector2d& point) {
  const double area = polygon_signed_area(polygon);
  if (!std::isfinite(area) || std::abs(area) <= 1e-12) {
    throw std::invalid_argument("degenerate annotation polygon (zero area)");
  }

  // Boundary first, so the decision is closed.
  for (std::size_t i = 0; i < 4; ++i) {
    const Eigen::Vector2d& a = polygon[i];
    const Eigen::Vector2d& b = polygon[(i + 1) % 4];
    const Eigen::Vector2d ab = b - a;
    const Eigen::Vector2d ap = point - a;
    const double cross = ab.x() * ap.y() - ab.y() * ap.x();
    if (cross == 0.0) {
      const double dot = ab.dot(ap);
      if (dot >= 0.0 && dot <= ab.squaredNorm()) return true;
    }
  }

  // Winding number.
  int winding = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Eigen::Vector2d& a = polygon[i];
    const Eigen::Vector2d& b = polygon[(i + 1) % 4];
    const double side = (b.x() - a.x()) * (point.y() - a.y()) - (point.x() - a.x()) * (b.y() - a.y());
    if (a.y() <= point.y()) {
      if (b.y() > point.y() && side > 0.0) ++winding;
    } else {
      if (b.y() <= point.y() && side < 0.0) --winding;
    }
  }
  return winding != 0;
}

}  // namespace mixlabel
