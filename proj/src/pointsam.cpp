#include "mixlabel/pointsam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixlabel/rng.hpp"

namespace mixlabel {

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera " + name + ": focal lengths must be > 0");
  if (width <= 0 || height <= 0) throw std::invalid_argument("camera " + name + ": image size must be > 0");
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw std::invalid_argument("camera " + name + ": non-finite extrinsics");
  }
}

int PixelHit::col() const { return static_cast<int>(std::floor(u)); }
int PixelHit::row() const { return static_cast<int>(std::floor(v)); }

std::vector<std::optional<PixelHit>> project_points(const PointCloud& cloud, const CameraModel& camera) {
  camera.validate();
  std::vector<std::optional<PixelHit>> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = camera.rotation * cloud[static_cast<PointIndex>(i)] + camera.translation;
    if (!(p.z() > 0.0)) continue;
    const double u = camera.fx * p.x() / p.z() + camera.cx;
    const double v = camera.fy * p.y() / p.z() + camera.cy;
    if (!(u >= 0.0 && u < camera.width && v >= 0.0 && v < camera.height)) continue;
    out[i] = PixelHit{u, v, p.z()};
  }
  return out;
}

void InstanceMasks2D::validate() const {
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (width <= 0 || height <= 0 || instance.size() != n || semantic.size() != n) {
    throw std::invalid_argument("mask maps do not match their declared dimensions");
  }
}

void PointLabeling::validate(std::size_t n_points) const {
  if (mask_id.size() != n_points || class_id.size() != n_points) {
    throw std::invalid_argument("point labeling size does not match the cloud");
  }
  for (std::size_t i = 0; i < n_points; ++i) {
    if ((mask_id[i] != 0) != (class_id[i] != kBackgroundClass)) {
      throw std::invalid_argument("point " + std::to_string(i) + " has a class without a mask or vice versa");
    }
  }
}

std::map<std::uint32_t, ClassId> vote_mask_classes(const InstanceMasks2D& masks) {
  masks.validate();
  std::map<std::uint32_t, std::map<ClassId, std::size_t>> counts;
  for (std::size_t k = 0; k < masks.instance.size(); ++k) {
    const std::uint32_t id = masks.instance[k];
    if (id == 0) continue;
    auto& per_class = counts[id];
    if (masks.semantic[k] != 0) ++per_class[masks.semantic[k]];
  }
  std::map<std::uint32_t, ClassId> out;
  for (const auto& [id, per_class] : counts) {
    ClassId best = kBackgroundClass;
    std::size_t best_count = 0;
    for (const auto& [cls, n] : per_class) {  // ascending class, strict > keeps the smaller on ties
      if (n > best_count) {
        best = cls;
        best_count = n;
      }
    }
    out[id] = best;
  }
  return out;
}

PointLabeling lift_masks(const PointCloud& cloud, std::span<const CameraModel> cameras,
                         std::span<const InstanceMasks2D> masks, LiftStats* stats) {
  if (cameras.size() != masks.size()) throw std::invalid_argument("one mask set is required per camera");

  std::vector<std::vector<std::optional<PixelHit>>> hits;
  std::vector<std::map<std::uint32_t, ClassId>> mask_class;
  std::vector<std::map<std::uint32_t, std::uint32_t>> global_id;
  std::uint32_t next_id = 1;
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    cameras[c].validate();
    masks[c].validate();
    if (masks[c].width != cameras[c].width || masks[c].height != cameras[c].height) {
      throw std::invalid_argument("masks for camera " + cameras[c].name + " are " +
                                  std::to_string(masks[c].width) + "x" + std::to_string(masks[c].height) +
                                  " but the camera image is " + std::to_string(cameras[c].width) + "x" +
                                  std::to_string(cameras[c].height));
    }
    hits.push_back(project_points(cloud, cameras[c]));
    mask_class.push_back(vote_mask_classes(masks[c]));
    auto& ids = global_id.emplace_back();
    for (const auto& [local, cls] : mask_class.back()) {
      if (cls != kBackgroundClass) ids[local] = next_id++;
    }
  }

  LiftStats local_stats;
  PointLabeling out = PointLabeling::background(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::size_t cam = cameras.size();
    double depth = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cameras.size(); ++c) {
      if (hits[c][i] && hits[c][i]->depth < depth) {
        depth = hits[c][i]->depth;
        cam = c;
      }
    }
    if (cam == cameras.size()) continue;
    ++local_stats.in_view;

    const PixelHit& hit = *hits[cam][i];
    const std::uint32_t local = masks[cam].instance[masks[cam].at(hit.col(), hit.row())];
    if (local == 0) continue;
    ++local_stats.on_mask;
    const auto it = global_id[cam].find(local);
    if (it == global_id[cam].end()) continue;
    ++local_stats.labeled;
    out.mask_id[i] = it->second;
    out.class_id[i] = mask_class[cam].at(local);
  }
  if (stats) *stats = local_stats;
  return out;
}

double SarRadii::radius_for(ClassId c) const {
  const auto it = per_class.find(c);
  return it == per_class.end() ? fallback : it->second;
}

void SarRadii::validate() const {
  if (!(fallback > 0.0)) throw std::invalid_argument("fallback SAR radius must be > 0");
  for (const auto& [cls, r] : per_class) {
    if (!(r > 0.0)) throw std::invalid_argument("SAR radius for class " + std::to_string(cls) + " must be > 0");
  }
}

SarRadii SarRadii::defaults() { return {{{1, 0.6}, {2, 0.2}, {3, 0.4}}, 0.5}; }

namespace {

struct Components {
  std::vector<std::uint32_t> of_point;  // indexed by point, valid for foreground points
  std::vector<std::vector<PointIndex>> members;  // ordered by smallest member
};

constexpr std::uint32_t kNoComponent = ~std::uint32_t{0};

Components class_components(const PointCloud& cloud, const PointLabeling& labeling, const SarRadii& radii) {
  std::map<ClassId, std::vector<PointIndex>> by_class;
  for (std::size_t i = 0; i < labeling.size(); ++i) {
    if (labeling.is_foreground(i)) by_class[labeling.class_id[i]].push_back(static_cast<PointIndex>(i));
  }

  std::vector<std::vector<PointIndex>> groups;
  for (auto& [cls, idx] : by_class) {
    const PointIndexSet subset = PointIndexSet::from_sorted(std::move(idx));
    const ComponentLabeling ccl = connected_components(cloud, subset, radii.radius_for(cls));
    const std::size_t base = groups.size();
    groups.resize(base + ccl.num_components);
    for (std::size_t k = 0; k < subset.size(); ++k) groups[base + ccl.component_of[k]].push_back(subset[k]);
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

  Components out;
  out.of_point.assign(labeling.size(), kNoComponent);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (PointIndex i : groups[g]) out.of_point[i] = static_cast<std::uint32_t>(g);
  }
  out.members = std::move(groups);
  return out;
}

}  // namespace

PointLabeling sar_refine(const PointCloud& cloud, const PointLabeling& labeling, const SarRadii& radii,
                         SarStats* stats) {
  labeling.validate(cloud.size());
  radii.validate();

  SarStats st;
  {
    std::vector<std::uint32_t> ids;
    for (auto m : labeling.mask_id) {
      if (m != 0) ids.push_back(m);
    }
    std::sort(ids.begin(), ids.end());
    st.masks_in = static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
  }

  PointLabeling work = labeling;
  Components comps;
  while (true) {
    ++st.rounds;
    comps = class_components(cloud, work, radii);

    // mask -> component -> count
    std::map<std::uint32_t, std::map<std::uint32_t, std::size_t>> spread;
    for (std::size_t i = 0; i < work.size(); ++i) {
      if (work.is_foreground(i)) ++spread[work.mask_id[i]][comps.of_point[i]];
    }
    std::map<std::uint32_t, std::uint32_t> keep;
    for (const auto& [mask, per_comp] : spread) {
      std::uint32_t best = per_comp.begin()->first;
      std::size_t best_n = 0;
      for (const auto& [comp, n] : per_comp) {  // ascending component id
        if (n > best_n) {
          best = comp;
          best_n = n;
        }
      }
      keep[mask] = best;
      if (per_comp.size() > 1) ++st.masks_split;
    }

    std::size_t dropped = 0;
    for (std::size_t i = 0; i < work.size(); ++i) {
      if (work.is_foreground(i) && comps.of_point[i] != keep.at(work.mask_id[i])) {
        work.mask_id[i] = 0;
        work.class_id[i] = kBackgroundClass;
        ++dropped;
      }
    }
    st.points_backgrounded += dropped;
    if (dropped == 0) break;
  }

  // Components are class-pure, so the majority class of a component is the
  // class of any of its points.
  PointLabeling out = PointLabeling::background(work.size());
  std::size_t masks_remaining = 0;
  for (std::size_t g = 0; g < comps.members.size(); ++g) {
    std::vector<std::uint32_t> masks_here;
    for (PointIndex i : comps.members[g]) {
      out.mask_id[i] = static_cast<std::uint32_t>(g + 1);
      out.class_id[i] = work.class_id[i];
      masks_here.push_back(work.mask_id[i]);
    }
    std::sort(masks_here.begin(), masks_here.end());
    masks_remaining += static_cast<std::size_t>(std::unique(masks_here.begin(), masks_here.end()) - masks_here.begin());
  }
  st.instances_out = comps.members.size();
  st.masks_merged = masks_remaining - st.instances_out;
  if (stats) *stats = st;
  return out;
}

std::vector<CameraModel> perturb_calibration(std::span<const CameraModel> cameras, double half_range_m,
                                             std::uint64_t seed) {
  if (!(half_range_m >= 0.0)) throw std::invalid_argument("calibration noise range must be nonnegative");
  Rng rng(seed);
  std::vector<CameraModel> out(cameras.begin(), cameras.end());
  for (auto& cam : out) {
    for (int a = 0; a < 3; ++a) cam.translation[a] += rng.symmetric(half_range_m);
  }
  return out;
}

std::vector<ClusterLabel> labeling_to_clusters(const PointLabeling& labeling) {
  std::map<std::uint32_t, std::vector<PointIndex>> members;
  std::map<std::uint32_t, ClassId> cls;
  for (std::size_t i = 0; i < labeling.size(); ++i) {
    if (!labeling.is_foreground(i)) continue;
    members[labeling.mask_id[i]].push_back(static_cast<PointIndex>(i));
    cls.emplace(labeling.mask_id[i], labeling.class_id[i]);
  }
  std::vector<ClusterLabel> out;
  out.reserve(members.size());
  for (auto& [id, idx] : members) {
    out.push_back({PointIndexSet::from_sorted(std::move(idx)), cls.at(id), static_cast<InstanceId>(id)});
  }
  return out;
}

}  // namespace mixlabel
