#include "mixlabel/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace mixlabel {

void BevGrid::validate() const {
  if (!(cell_size > 0.0)) throw std::invalid_argument("grid cell_size must be > 0");
  if (!(x_max > x_min) || !(y_max > y_min)) throw std::invalid_argument("grid ranges must be nonempty");
}

std::size_t BevGrid::nx() const { return static_cast<std::size_t>(std::ceil((x_max - x_min) / cell_size)); }
std::size_t BevGrid::ny() const { return static_cast<std::size_t>(std::ceil((y_max - y_min) / cell_size)); }

std::optional<BevGrid::Cell> BevGrid::cell_of(double x, double y) const {
  if (!(x >= x_min && x < x_max && y >= y_min && y < y_max)) return std::nullopt;
  const auto ix = std::min(static_cast<std::size_t>(std::floor((x - x_min) / cell_size)), nx() - 1);
  const auto iy = std::min(static_cast<std::size_t>(std::floor((y - y_min) / cell_size)), ny() - 1);
  return Cell{ix, iy};
}

AssignmentPartition center_assign(const LabelSet& labels, const PointCloud& cloud, const BevGrid& grid) {
  grid.validate();
  AssignmentPartition out;

  struct Claim {
    bool is_box;
    InstanceId id;
    ClassId cls;
    const Box3D* box;
  };
  auto stronger = [](const Claim& a, const Claim& b) {
    if (a.is_box != b.is_box) return a.is_box;
    return a.id < b.id;
  };

  std::unordered_map<SampleId, Claim> claims;
  auto place = [&](const Eigen::Vector3d& center, const Claim& claim) {
    const auto cell = grid.cell_of(center.x(), center.y());
    if (!cell) {
      out.out_of_grid.push_back(claim.id);
      return;
    }
    const SampleId sid = grid.sample_id(*cell);
    auto [it, inserted] = claims.try_emplace(sid, claim);
    if (inserted) return;
    if (stronger(claim, it->second)) {
      out.shadowed.push_back(it->second.id);
      it->second = claim;
    } else {
      out.shadowed.push_back(claim.id);
    }
  };

  for (const auto& b : labels.boxes) {
    const Eigen::Vector3d c = b.cluster.points.empty() ? b.box.center : cluster_center(b.cluster, cloud);
    place(c, {true, b.instance_id(), b.cluster.class_id, &b.box});
  }
  for (const auto& c : labels.clusters) {
    place(cluster_center(c, cloud), {false, c.instance_id, c.class_id, nullptr});
  }

  const std::size_t cells = grid.cell_count();
  for (std::size_t sid = 0; sid < cells; ++sid) {
    Sample s;
    s.sample_id = sid;
    const auto it = claims.find(sid);
    if (it == claims.end()) {
      out.negative.push_back(s);
      continue;
    }
    s.matched_instance = it->second.id;
    s.class_target = it->second.cls;
    if (it->second.is_box) {
      s.regression_target = *it->second.box;
      out.accurate.push_back(std::move(s));
    } else {
      out.coarse.push_back(std::move(s));
    }
  }
  std::sort(out.out_of_grid.begin(), out.out_of_grid.end());
  std::sort(out.shadowed.begin(), out.shadowed.end());
  return out;
}

double box_cluster_iou(const PointCloud& cloud, const Box3D& candidate, const ClusterLabel& label) {
  return point_set_iou(points_in_box(cloud, candidate), label.points);
}

void BoxAssignConfig::validate() const {
  if (!(neg_thresh >= 0.0 && neg_thresh <= pos_thresh && pos_thresh <= 1.0)) {
    throw std::invalid_argument("box assignment requires 0 <= neg_thresh <= pos_thresh <= 1");
  }
}

AssignmentPartition box_assign(const PointCloud& cloud, std::span<const Box3D> candidates,
                               const LabelSet& labels, const BoxAssignConfig& config) {
  config.validate();

  struct Target {
    const ClusterLabel* cluster;
    const Box3D* box;  // null for cluster-only labels
  };
  std::vector<Target> targets;
  targets.reserve(labels.label_count());
  for (const auto& b : labels.boxes) targets.push_back({&b.cluster, &b.box});
  for (const auto& c : labels.clusters) targets.push_back({&c, nullptr});
  std::sort(targets.begin(), targets.end(),
            [](const Target& a, const Target& b) { return a.cluster->instance_id < b.cluster->instance_id; });

  AssignmentPartition out;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const PointIndexSet inside = points_in_box(cloud, candidates[k]);
    const Target* best = nullptr;
    double best_iou = -1.0;
    // targets are ascending by instance id, so strict > keeps the smaller id on ties
    for (const auto& t : targets) {
      const double iou = point_set_iou(inside, t.cluster->points);
      if (iou > best_iou) {
        best_iou = iou;
        best = &t;
      }
    }

    Sample s;
    s.sample_id = k;
    if (best == nullptr) {
      out.negative.push_back(s);
      continue;
    }
    s.iou = best_iou;
    if (best_iou >= config.pos_thresh) {
      s.matched_instance = best->cluster->instance_id;
      s.class_target = best->cluster->class_id;
      if (best->box != nullptr) {
        s.regression_target = *best->box;
        out.accurate.push_back(std::move(s));
      } else {
        out.coarse.push_back(std::move(s));
      }
    } else if (best_iou < config.neg_thresh) {
      out.negative.push_back(std::move(s));
    } else {
      s.matched_instance = best->cluster->instance_id;
      out.ignored.push_back(std::move(s));
    }
  }
  return out;
}

double combine_loss(const AssignmentPartition& partition, const std::map<SampleId, double>& cls_losses,
                    const std::map<SampleId, double>& reg_losses) {
  auto lookup = [](const std::map<SampleId, double>& m, SampleId id, const char* what) {
    const auto it = m.find(id);
    if (it == m.end()) {
      throw std::invalid_argument(std::string("missing ") + what + " loss for sample " + std::to_string(id));
    }
    return it->second;
  };

  double cls_sum = 0.0;
  std::size_t cls_count = 0;
  for (const auto* set : {&partition.accurate, &partition.coarse, &partition.negative}) {
    for (const auto& s : *set) {
      cls_sum += lookup(cls_losses, s.sample_id, "classification");
      ++cls_count;
    }
  }
  double reg_sum = 0.0;
  for (const auto& s : partition.accurate) reg_sum += lookup(reg_losses, s.sample_id, "regression");

  const double cls_term = cls_count == 0 ? 0.0 : cls_sum / static_cast<double>(cls_count);
  const double reg_term =
      partition.accurate.empty() ? 0.0 : reg_sum / static_cast<double>(partition.accurate.size());
  return cls_term + reg_term;
}

Box3D BoxDelta::apply(const Box3D& box) const {
  Box3D out = box;
  out.center += center;
  out.dims += dims;
  out.yaw = normalize_yaw(box.yaw + yaw);
  out.validate();
  return out;
}

std::vector<ProbeEntry> iou_ambiguity_probe(const PointCloud& cloud, const Box3D& candidate,
                                            const ClusterLabel& label, std::span<const BoxDelta> perturbations) {
  std::vector<ProbeEntry> report;
  report.reserve(perturbations.size());
  if (perturbations.empty()) return report;

  const PointIndexSet base_set = points_in_box(cloud, candidate);
  const double base_iou = point_set_iou(base_set, label.points);
  for (const auto& delta : perturbations) {
    const PointIndexSet moved = points_in_box(cloud, delta.apply(candidate));
    ProbeEntry e;
    e.base_iou = base_iou;
    e.perturbed_iou = point_set_iou(moved, label.points);
    e.membership_changed = moved != base_set;
    e.iou_changed = e.perturbed_iou != e.base_iou;
    report.push_back(e);
  }
  return report;
}

}  // namespace mixlabel
