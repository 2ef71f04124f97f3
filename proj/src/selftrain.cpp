#include "mixlabel/selftrain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mixlabel {

namespace {

// Widens fitted extents so the closed box still contains its own points
// after the round trip through the box frame.
constexpr double kFitMargin = 1e-6;
constexpr double kMinFitExtent = 1e-3;

double nearer_edge_distance_sum(std::span<const double> proj, double lo, double hi, std::vector<double>& out) {
  double to_hi = 0.0, to_lo = 0.0;
  for (double c : proj) {
    to_hi += (hi - c) * (hi - c);
    to_lo += (c - lo) * (c - lo);
  }
  const bool use_hi = to_hi < to_lo;
  out.resize(proj.size());
  for (std::size_t i = 0; i < proj.size(); ++i) out[i] = use_hi ? hi - proj[i] : proj[i] - lo;
  return use_hi ? to_hi : to_lo;
}

}  // namespace

double lshape_closeness(std::span<const Eigen::Vector2d> points, double theta, double min_distance) {
  const Eigen::Vector2d e1(std::cos(theta), std::sin(theta));
  const Eigen::Vector2d e2(-std::sin(theta), std::cos(theta));
  std::vector<double> c1(points.size()), c2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    c1[i] = points[i].dot(e1);
    c2[i] = points[i].dot(e2);
  }
  const auto [lo1, hi1] = std::minmax_element(c1.begin(), c1.end());
  const auto [lo2, hi2] = std::minmax_element(c2.begin(), c2.end());
  std::vector<double> d1, d2;
  nearer_edge_distance_sum(c1, *lo1, *hi1, d1);
  nearer_edge_distance_sum(c2, *lo2, *hi2, d2);

  double score = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) score += 1.0 / std::max(std::min(d1[i], d2[i]), min_distance);
  return score;
}

PseudoBox fit_lshape(const PointCloud& cloud, const ClusterLabel& label, const LShapeParams& params) {
  if (label.points.size() < 3) throw std::invalid_argument("L-shape fitting needs at least 3 points");
  if (!(params.angle_step_deg > 0.0)) throw std::invalid_argument("angle_step must be > 0");
  label.points.check_bounds(cloud.size());

  std::vector<Eigen::Vector2d> bev;
  bev.reserve(label.points.size());
  double z_lo = cloud[label.points[0]].z(), z_hi = z_lo;
  for (PointIndex i : label.points) {
    bev.push_back(cloud[i].head<2>());
    z_lo = std::min(z_lo, cloud[i].z());
    z_hi = std::max(z_hi, cloud[i].z());
  }

  constexpr double kDeg = std::numbers::pi / 180.0;
  double best_theta = 0.0;
  double best_score = -1.0;
  for (std::size_t k = 0;; ++k) {
    const double deg = static_cast<double>(k) * params.angle_step_deg;
    if (deg >= 90.0) break;
    const double score = lshape_closeness(bev, deg * kDeg, params.min_distance);
    if (score > best_score) {
      best_score = score;
      best_theta = deg * kDeg;
    }
  }

  const Eigen::Vector2d e1(std::cos(best_theta), std::sin(best_theta));
  const Eigen::Vector2d e2(-std::sin(best_theta), std::cos(best_theta));
  double lo1 = bev[0].dot(e1), hi1 = lo1, lo2 = bev[0].dot(e2), hi2 = lo2;
  for (const auto& p : bev) {
    lo1 = std::min(lo1, p.dot(e1));
    hi1 = std::max(hi1, p.dot(e1));
    lo2 = std::min(lo2, p.dot(e2));
    hi2 = std::max(hi2, p.dot(e2));
  }

  PseudoBox out;
  const Eigen::Vector2d mid = 0.5 * (lo1 + hi1) * e1 + 0.5 * (lo2 + hi2) * e2;
  out.box.center = {mid.x(), mid.y(), 0.5 * (z_lo + z_hi)};
  out.box.dims = {std::max(hi1 - lo1 + kFitMargin, kMinFitExtent), std::max(hi2 - lo2 + kFitMargin, kMinFitExtent),
                  std::max(z_hi - z_lo + kFitMargin, kMinFitExtent)};
  out.box.yaw = best_theta;
  out.box.class_id = label.class_id;
  return out;
}

void SelfTrainParams::validate() const {
  if (!(score_thresh >= 0.0 && score_thresh <= 1.0) || !(match_iou >= 0.0 && match_iou <= 1.0)) {
    throw std::invalid_argument("self-training thresholds must lie in [0, 1]");
  }
}

SelfTrainResult selftrain_merge(const LabelSet& labels, std::span<const BoxRecord> pseudo, const PointCloud& cloud,
                                const SelfTrainParams& params) {
  params.validate();

  std::vector<const BoxRecord*> order;
  for (const auto& p : pseudo) {
    if (p.box.score.value_or(0.0) > params.score_thresh) order.push_back(&p);
  }
  std::sort(order.begin(), order.end(), [](const BoxRecord* a, const BoxRecord* b) {
    const double sa = *a->box.score, sb = *b->box.score;
    return sa != sb ? sa > sb : a->instance_id < b->instance_id;
  });

  SelfTrainResult result;
  result.labels = labels;
  result.diff.above_threshold = order.size();
  auto& clusters = result.labels.clusters;
  auto& boxes = result.labels.boxes;

  for (const BoxRecord* p : order) {
    Box3D pbox = p->box;
    pbox.validate();
    pbox.yaw = normalize_yaw(pbox.yaw);
    const PointIndexSet inside = points_in_box(cloud, pbox);

    double best_iou = -1.0;
    InstanceId best_id = 0;
    std::ptrdiff_t best_cluster = -1;  // index into clusters, -1 when the best is a box label
    auto consider = [&](const ClusterLabel& c, std::ptrdiff_t cluster_index) {
      const double iou = point_set_iou(inside, c.points);
      if (iou > best_iou || (iou == best_iou && c.instance_id < best_id)) {
        best_iou = iou;
        best_id = c.instance_id;
        best_cluster = cluster_index;
      }
    };
    for (const auto& b : boxes) consider(b.cluster, -1);
    for (std::size_t k = 0; k < clusters.size(); ++k) consider(clusters[k], static_cast<std::ptrdiff_t>(k));

    if (best_cluster < 0 || best_iou <= 0.0 || best_iou < params.match_iou) {
      ++result.diff.discarded;
      continue;
    }
    const InstanceId id = clusters[static_cast<std::size_t>(best_cluster)].instance_id;
    clusters.erase(clusters.begin() + best_cluster);
    BoxLabel promoted;
    promoted.box = pbox;
    promoted.cluster = {inside, pbox.class_id, id};
    boxes.push_back(std::move(promoted));
    ++result.diff.replaced;
    result.diff.replaced_instances.push_back(id);
  }
  std::sort(result.diff.replaced_instances.begin(), result.diff.replaced_instances.end());
  return result;
}

}  // namespace mixlabel
