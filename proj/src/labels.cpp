#include "mixlabel/labels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "mixlabel/rng.hpp"

namespace mixlabel {

BoxLabel BoxLabel::enclose(const PointCloud& cloud, const Box3D& box, InstanceId id) {
  box.validate();
  BoxLabel out;
  out.box = box;
  out.box.yaw = normalize_yaw(box.yaw);
  out.cluster.points = points_in_box(cloud, out.box);
  out.cluster.class_id = box.class_id;
  out.cluster.instance_id = id;
  return out;
}

void LabelSet::validate(const PointCloud& cloud) const {
  std::set<InstanceId> seen;
  auto claim = [&](InstanceId id) {
    if (!seen.insert(id).second) {
      throw std::invalid_argument("scene " + scene_id + ": duplicate instance_id " + std::to_string(id));
    }
  };
  for (const auto& c : clusters) {
    if (c.points.empty()) {
      throw std::invalid_argument("scene " + scene_id + ": cluster " + std::to_string(c.instance_id) +
                                  " is empty");
    }
    c.points.check_bounds(cloud.size());
    claim(c.instance_id);
  }
  for (const auto& b : boxes) {
    b.box.validate();
    if (b.cluster.points != points_in_box(cloud, b.box)) {
      throw std::invalid_argument("scene " + scene_id + ": box " + std::to_string(b.instance_id()) +
                                  " enclosed cluster differs from its interior");
    }
    claim(b.instance_id());
  }
}

Eigen::Vector3d cluster_center(const PointIndexSet& points, const PointCloud& cloud) {
  if (points.empty()) throw std::invalid_argument("cluster_center of an empty cluster");
  points.check_bounds(cloud.size());
  Eigen::Vector3d lo = cloud[points[0]];
  Eigen::Vector3d hi = lo;
  for (PointIndex i : points) {
    lo = lo.cwiseMin(cloud[i]);
    hi = hi.cwiseMax(cloud[i]);
  }
  return 0.5 * (lo + hi);
}

Eigen::Vector3d cluster_center(const ClusterLabel& label, const PointCloud& cloud) {
  return cluster_center(label.points, cloud);
}

void NoiseModel::validate() const {
  if (!(shift_range >= 0.0) || !(expand_range >= 0.0) || !(rotate_range >= 0.0)) {
    throw std::invalid_argument("noise ranges must be nonnegative");
  }
}

NoiseModel NoiseModel::preset(std::string_view name) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  if (name == "none") return {};
  if (name == "noise0") return {0.0, 0.10, 0.0, 0};
  if (name == "noise1") return {0.1, 0.50, 0.0, 0};
  if (name == "noise2") return {0.2, 0.20, 15.0 * kDeg, 0};
  throw std::invalid_argument("unknown noise preset '" + std::string(name) + "'");
}

Box3D perturb_box(const Box3D& box, const NoiseModel& noise, Rng& rng) {
  Box3D out = box;
  out.center.x() += rng.symmetric(noise.shift_range);
  out.center.y() += rng.symmetric(noise.shift_range);
  for (int d = 0; d < 3; ++d) out.dims[d] *= 1.0 + rng.uniform(0.0, noise.expand_range);
  out.yaw = normalize_yaw(box.yaw + rng.symmetric(noise.rotate_range));
  return out;
}

ClusterGeneration clusters_from_boxes(const PointCloud& cloud, std::span<const BoxRecord> gt_boxes,
                                      const NoiseModel& noise) {
  noise.validate();
  Rng rng(noise.seed);
  ClusterGeneration out;
  for (const auto& rec : gt_boxes) {
    rec.box.validate();
    const Box3D noisy = perturb_box(rec.box, noise, rng);
    PointIndexSet pts = points_in_box(cloud, noisy);
    if (pts.empty()) {
      out.dropped.push_back(rec.instance_id);
      continue;
    }
    out.clusters.push_back({std::move(pts), rec.box.class_id, rec.instance_id});
  }
  return out;
}

std::array<Eigen::Vector2d, 4> parallelogram_from_clicks(const std::array<Eigen::Vector2d, 3>& clicks) {
  const auto& [a, b, c] = clicks;
  return {a, b, Eigen::Vector2d(b + c - a), c};
}

ClusterLabel cluster_from_clicks(const PointCloud& cloud, const std::array<Eigen::Vector2d, 3>& clicks,
                                 ClassId class_id, InstanceId instance_id, const ClickConfig& config) {
  const Eigen::Vector2d ab = clicks[1] - clicks[0];
  const Eigen::Vector2d ac = clicks[2] - clicks[0];
  const double cross = ab.x() * ac.y() - ab.y() * ac.x();
  if (std::abs(cross) <= 1e-12) throw std::invalid_argument("collinear clicks do not span a parallelogram");

  const auto polygon = parallelogram_from_clicks(clicks);
  std::vector<PointIndex> inside;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud[static_cast<PointIndex>(i)];
    if (p.z() < config.z_min || p.z() > config.z_max) continue;
    if (bev_polygon_contains(polygon, p.head<2>())) inside.push_back(static_cast<PointIndex>(i));
  }
  if (inside.empty()) throw std::invalid_argument("click parallelogram encloses no points");
  return {PointIndexSet::from_sorted(std::move(inside)), class_id, instance_id};
}

BudgetSelection select_budget(std::span<const BudgetItem> items, double ratio,
                              const std::map<ClassId, double>& class_weights, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("budget ratio must be in (0, 1]");
  for (const auto& [cls, w] : class_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("class weight for class " + std::to_string(cls) + " must be positive");
    }
  }

  const std::size_t n = items.size();
  std::size_t k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (n > 0) k = std::clamp<std::size_t>(k, 1, n);

  // Exponential-key sampling: the top-k keys log(u)/w are distributed as
  // successive draws proportional to weight, without replacement.
  Rng rng(seed);
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(n);
  for (const auto& item : items) {
    const auto it = class_weights.find(item.class_id);
    const double w = it == class_weights.end() ? 1.0 : it->second;
    const double u = (static_cast<double>(rng.next_u64() >> 11) + 0.5) * 0x1.0p-53;
    keyed.emplace_back(std::log(u) / w, item.id);
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });

  BudgetSelection out;
  for (std::size_t r = 0; r < keyed.size(); ++r) {
    (r < k ? out.selected : out.remainder).push_back(keyed[r].second);
  }
  std::sort(out.selected.begin(), out.selected.end());
  std::sort(out.remainder.begin(), out.remainder.end());
  return out;
}

CostReport annotation_cost(std::size_t n_box, std::size_t n_cluster, std::size_t n_total) {
  if (n_total == 0) throw std::invalid_argument("annotation cost needs a nonzero total label count");
  if (n_box + n_cluster > n_total) {
    throw std::invalid_argument("counted labels exceed the total label count");
  }
  CostReport r{n_box, n_cluster, n_total, 0.0};
  r.cost = (static_cast<double>(n_box) + kClusterCostRatio * static_cast<double>(n_cluster)) /
           static_cast<double>(n_total);
  return r;
}

CostReport annotation_cost(const LabelSet& labels, std::size_t n_total) {
  return annotation_cost(labels.boxes.size(), labels.clusters.size(), n_total);
}

std::vector<CropRegion> pilot_crop_regions(const PointCloud& cloud, std::span<const Box3D> proposals,
                                           std::uint64_t seed, const PilotCropParams& params) {
  Rng rng(seed);
  std::vector<CropRegion> out;
  out.reserve(proposals.size());
  for (std::size_t p = 0; p < proposals.size(); ++p) {
    proposals[p].validate();
    CropRegion region;
    region.proposal_index = p;
    region.region_box = proposals[p];
    region.region_box.dims.array() += params.expand;

    region.shift_magnitude = rng.uniform(params.shift_min, params.shift_max);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    region.region_box.center.x() += region.shift_magnitude * std::cos(heading);
    region.region_box.center.y() += region.shift_magnitude * std::sin(heading);
    region.region_box.yaw = normalize_yaw(proposals[p].yaw + rng.symmetric(params.rotate_range));

    region.source_points = points_in_box(cloud, region.region_box);
    region.local_points.reserve(region.source_points.size());
    for (PointIndex i : region.source_points) region.local_points.push_back(region.region_box.to_local(cloud[i]));
    region.empty = region.source_points.empty();
    out.push_back(std::move(region));
  }
  return out;
}

std::optional<Box3D> AugmentedCluster::as_box() const {
  if (!center || !dims || !yaw) return std::nullopt;
  Box3D b;
  b.center = *center;
  b.dims = *dims;
  b.yaw = *yaw;
  b.class_id = cluster.class_id;
  return b;
}

AugmentedCluster augment_cluster(const ClusterLabel& label, const Box3D& gt, AugmentLevel level) {
  AugmentedCluster out{label, std::nullopt, std::nullopt, std::nullopt};
  switch (level) {
    case AugmentLevel::kCenterShapeHeading:
      out.yaw = normalize_yaw(gt.yaw);
      [[fallthrough]];
    case AugmentLevel::kCenterShape:
      out.dims = gt.dims;
      [[fallthrough]];
    case AugmentLevel::kCenter:
      out.center = gt.center;
      break;
    case AugmentLevel::kNone:
      break;
  }
  return out;
}

}  // namespace mixlabel
