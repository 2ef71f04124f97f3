#include "mixlabel/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mixlabel/io.hpp"
#include "mixlabel/rng.hpp"

namespace mixlabel::synth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGroundZ = -1.75;

Box3D random_box(Rng& rng, double extent) {
  Box3D b;
  b.center = {rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-1.0, 1.0)};
  b.dims = {rng.uniform(0.5, 5.0), rng.uniform(0.5, 2.5), rng.uniform(0.5, 2.5)};
  b.yaw = normalize_yaw(rng.uniform(-kPi, kPi));
  b.class_id = 1 + static_cast<ClassId>(rng.next_u64() % 3);
  return b;
}

}  // namespace

Scene random_scene(Rng& rng, const RandomSceneParams& params) {
  Scene scene;
  const std::size_t n_obj = rng.next_u64() % (params.max_objects + 1);
  for (std::size_t k = 0; k < n_obj; ++k) {
    scene.boxes.push_back({random_box(rng, params.extent), static_cast<InstanceId>(k + 1)});
  }

  const std::size_t n_pts = 1 + rng.next_u64() % params.max_points;
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(n_pts);
  for (std::size_t i = 0; i < n_pts; ++i) {
    if (!scene.boxes.empty() && rng.uniform01() < 0.6) {
      const Box3D& b = scene.boxes[rng.next_u64() % scene.boxes.size()].box;
      // slightly beyond the box so that some samples fall outside
      const Eigen::Vector3d local(rng.symmetric(0.6 * b.dims.x()), rng.symmetric(0.6 * b.dims.y()),
                                  rng.symmetric(0.6 * b.dims.z()));
      pts.push_back(b.to_world(local));
    } else {
      pts.emplace_back(rng.symmetric(params.extent + 3.0), rng.symmetric(params.extent + 3.0), rng.uniform(-2.0, 3.0));
    }
  }
  scene.cloud = PointCloud("random", std::move(pts));
  for (const auto& rec : scene.boxes) {
    scene.gt_instances.push_back({points_in_box(scene.cloud, rec.box), rec.box.class_id, rec.instance_id});
  }
  return scene;
}

LabelSet random_label_set(const Scene& scene, double box_fraction, Rng& rng) {
  LabelSet set;
  set.scene_id = scene.cloud.scene_id();
  for (std::size_t k = 0; k < scene.boxes.size(); ++k) {
    const bool as_box = rng.uniform01() < box_fraction;
    if (scene.gt_instances[k].points.empty()) continue;
    if (as_box) {
      set.boxes.push_back(BoxLabel::enclose(scene.cloud, scene.boxes[k].box, scene.boxes[k].instance_id));
    } else {
      set.clusters.push_back(scene.gt_instances[k]);
    }
  }
  return set;
}

std::vector<CameraModel> camera_rig() {
  constexpr int kWidth = 960;
  constexpr int kHeight = 320;
  const double f = 0.5 * kWidth / std::tan(50.0 * kPi / 180.0);
  std::vector<CameraModel> rig;
  const char* names[] = {"front", "left", "back", "right"};
  for (int k = 0; k < 4; ++k) {
    const double phi = k * 0.5 * kPi;
    const Eigen::Vector3d forward(std::cos(phi), std::sin(phi), 0.0);
    const Eigen::Vector3d right(std::sin(phi), -std::cos(phi), 0.0);
    const Eigen::Vector3d down(0.0, 0.0, -1.0);
    CameraModel cam;
    cam.name = names[k];
    cam.fx = cam.fy = f;
    cam.cx = 0.5 * kWidth;
    cam.cy = 0.5 * kHeight;
    cam.width = kWidth;
    cam.height = kHeight;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation.setZero();
    rig.push_back(cam);
  }
  return rig;
}

namespace {

struct ClassShape {
  ClassId cls;
  Eigen::Vector3d dims;
  Eigen::Vector3d jitter;
  double spacing;  // 0.4 x the default SAR radius of the class
};

const ClassShape kShapes[] = {
    {1, {4.2, 1.8, 1.5}, {0.4, 0.1, 0.1}, 0.24},
    {2, {0.7, 0.7, 1.75}, {0.1, 0.1, 0.1}, 0.08},
    {3, {1.8, 0.6, 1.7}, {0.2, 0.1, 0.1}, 0.16},
};

void sample_surface(const Box3D& box, double spacing, Rng& rng, std::vector<Eigen::Vector3d>& out) {
  // 1 mm inset keeps every sample strictly inside the box after float32 rounding
  const Eigen::Vector3d half = 0.5 * box.dims - Eigen::Vector3d::Constant(1e-3);
  // faces: (normal axis, sign); bottom face skipped
  const std::pair<int, double> faces[] = {{0, 1.0}, {0, -1.0}, {1, 1.0}, {1, -1.0}, {2, 1.0}};
  for (const auto& [axis, sign] : faces) {
    const int ua = (axis + 1) % 3;
    const int va = (axis + 2) % 3;
    const auto nu = static_cast<int>(std::ceil(box.dims[ua] / spacing));
    const auto nv = static_cast<int>(std::ceil(box.dims[va] / spacing));
    for (int i = 0; i < nu; ++i) {
      for (int j = 0; j < nv; ++j) {
        Eigen::Vector3d local;
        local[axis] = sign * half[axis];
        local[ua] = (i + 0.5) * box.dims[ua] / nu - half[ua] + rng.symmetric(0.2 * spacing);
        local[va] = (j + 0.5) * box.dims[va] / nv - half[va] + rng.symmetric(0.2 * spacing);
        local[ua] = std::clamp(local[ua], -half[ua], half[ua]);
        local[va] = std::clamp(local[va], -half[va], half[va]);
        out.push_back(box.to_world(local).cast<float>().cast<double>());
      }
    }
  }
}

}  // namespace

Scene rig_scene(std::uint64_t seed, const RigParams& params) {
  Rng rng(seed);
  constexpr std::size_t kSlots = 6;
  constexpr double kSlotWidth = 2.0 * kPi / kSlots;

  std::vector<std::size_t> slots(kSlots);
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  for (std::size_t i = kSlots - 1; i > 0; --i) std::swap(slots[i], slots[rng.next_u64() % (i + 1)]);
  const std::size_t span = params.max_objects - params.min_objects + 1;
  const std::size_t n_obj = std::min(kSlots, params.min_objects + rng.next_u64() % span);

  Scene scene;
  std::vector<Eigen::Vector3d> pts;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t k = 0; k < n_obj; ++k) {
    const double u = rng.uniform01();
    const ClassShape& shape = u < 0.5 ? kShapes[0] : (u < 0.75 ? kShapes[1] : kShapes[2]);
    const double azimuth = (static_cast<double>(slots[k]) + 0.5) * kSlotWidth + rng.symmetric(5.0 * kPi / 180.0);
    const double range = rng.uniform(9.0, 16.0);

    Box3D box;
    box.class_id = shape.cls;
    for (int d = 0; d < 3; ++d) box.dims[d] = shape.dims[d] + rng.symmetric(shape.jitter[d]);
    box.center = {range * std::cos(azimuth), range * std::sin(azimuth), kGroundZ + 0.5 * box.dims.z()};
    box.yaw = normalize_yaw(rng.uniform(-kPi, kPi));

    const std::size_t first = pts.size();
    sample_surface(box, shape.spacing, rng, pts);
    ranges.emplace_back(first, pts.size());
    scene.boxes.push_back({box, static_cast<InstanceId>(k + 1)});
  }

  for (std::size_t i = 0; i < params.background_points; ++i) {
    const auto boundary = static_cast<double>(rng.next_u64() % kSlots) * kSlotWidth;
    const double azimuth = boundary + rng.symmetric(5.0 * kPi / 180.0);
    const double r = rng.uniform(5.0, 25.0);
    pts.push_back(Eigen::Vector3d(r * std::cos(azimuth), r * std::sin(azimuth), kGroundZ + rng.symmetric(0.03))
                      .cast<float>()
                      .cast<double>());
  }

  scene.cloud = PointCloud("rig_" + std::to_string(seed), std::move(pts));
  for (std::size_t k = 0; k < n_obj; ++k) {
    std::vector<PointIndex> idx(ranges[k].second - ranges[k].first);
    std::iota(idx.begin(), idx.end(), static_cast<PointIndex>(ranges[k].first));
    scene.gt_instances.push_back(
        {PointIndexSet::from_sorted(std::move(idx)), scene.boxes[k].box.class_id, scene.boxes[k].instance_id});
  }
  return scene;
}

namespace {

using Pt2 = Eigen::Vector2d;

double cross2(const Pt2& o, const Pt2& a, const Pt2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

std::vector<Pt2> convex_hull(std::vector<Pt2> p) {
  std::sort(p.begin(), p.end(), [](const Pt2& a, const Pt2& b) { return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y(); });
  if (p.size() < 3) return p;
  std::vector<Pt2> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross2(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  return h;
}

bool in_convex(const std::vector<Pt2>& hull, const Pt2& q) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross2(hull[i], hull[(i + 1) % hull.size()], q) < 0) return false;
  }
  return true;
}

struct ObjectFootprint {
  std::size_t object = 0;
  double depth = 0.0;
  std::vector<std::size_t> pixels;
};

}  // namespace

std::vector<InstanceMasks2D> render_masks(const Scene& scene, const std::vector<CameraModel>& cameras,
                                          const MaskCorruption& corruption, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<InstanceMasks2D> out;
  for (const auto& cam : cameras) {
    InstanceMasks2D m;
    m.width = cam.width;
    m.height = cam.height;
    m.instance.assign(static_cast<std::size_t>(cam.width) * cam.height, 0);
    m.semantic.assign(m.instance.size(), 0);

    const auto hits = project_points(scene.cloud, cam);
    std::vector<ObjectFootprint> footprints;
    for (std::size_t k = 0; k < scene.gt_instances.size(); ++k) {
      std::vector<Pt2> uv;
      ObjectFootprint fp{k, std::numeric_limits<double>::infinity(), {}};
      for (PointIndex i : scene.gt_instances[k].points) {
        if (!hits[i]) continue;
        uv.emplace_back(hits[i]->u, hits[i]->v);
        fp.depth = std::min(fp.depth, hits[i]->depth);
        fp.pixels.push_back(m.at(hits[i]->col(), hits[i]->row()));
      }
      if (uv.empty()) continue;
      const auto hull = convex_hull(uv);
      const auto [umin, umax] = std::minmax_element(uv.begin(), uv.end(), [](auto& a, auto& b) { return a.x() < b.x(); });
      const auto [vmin, vmax] = std::minmax_element(uv.begin(), uv.end(), [](auto& a, auto& b) { return a.y() < b.y(); });
      const int c0 = std::max(0, static_cast<int>(std::floor(umin->x())));
      const int c1 = std::min(cam.width - 1, static_cast<int>(std::floor(umax->x())));
      const int r0 = std::max(0, static_cast<int>(std::floor(vmin->y())));
      const int r1 = std::min(cam.height - 1, static_cast<int>(std::floor(vmax->y())));
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          if (in_convex(hull, Pt2(c + 0.5, r + 0.5))) fp.pixels.push_back(m.at(c, r));
        }
      }
      footprints.push_back(std::move(fp));
    }

    // painter's order: far to near
    std::sort(footprints.begin(), footprints.end(), [](const auto& a, const auto& b) { return a.depth > b.depth; });
    auto base_id = [](std::size_t object) { return static_cast<std::uint32_t>(4 * object + 1); };
    for (const auto& fp : footprints) {
      const auto cls = static_cast<std::uint16_t>(scene.gt_instances[fp.object].class_id);
      for (std::size_t px : fp.pixels) {
        m.instance[px] = base_id(fp.object);
        m.semantic[px] = cls;
      }
    }

    if (corruption.over_segment) {
      for (const auto& fp : footprints) {
        const std::uint32_t id = base_id(fp.object);
        int cmin = cam.width, cmax = -1;
        for (std::size_t px : fp.pixels) {
          if (m.instance[px] != id) continue;
          const int c = static_cast<int>(px % static_cast<std::size_t>(cam.width));
          cmin = std::min(cmin, c);
          cmax = std::max(cmax, c);
        }
        if (cmax < cmin) continue;
        const int strips = 2 + static_cast<int>(rng.next_u64() % 2);
        const double width = static_cast<double>(cmax - cmin + 1) / strips;
        for (std::size_t px : fp.pixels) {
          if (m.instance[px] != id) continue;
          const int c = static_cast<int>(px % static_cast<std::size_t>(cam.width));
          const int strip = std::min(strips - 1, static_cast<int>((c - cmin) / width));
          m.instance[px] = id + static_cast<std::uint32_t>(strip);
        }
      }
    }

    if (corruption.bleed && footprints.size() >= 2 && rng.uniform01() < 0.7) {
      const std::size_t b = rng.next_u64() % footprints.size();
      std::size_t a = rng.next_u64() % (footprints.size() - 1);
      if (a >= b) ++a;
      const std::uint32_t a_id = base_id(footprints[a].object);
      const std::uint32_t b_lo = base_id(footprints[b].object);
      int cmin = cam.width, cmax = -1;
      for (std::size_t px : footprints[b].pixels) {
        const int c = static_cast<int>(px % static_cast<std::size_t>(cam.width));
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
      }
      const double cut = cmin + 0.4 * (cmax - cmin + 1);
      for (std::size_t px : footprints[b].pixels) {
        const int c = static_cast<int>(px % static_cast<std::size_t>(cam.width));
        if (m.instance[px] >= b_lo && m.instance[px] < b_lo + 4 && c < cut) m.instance[px] = a_id;
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace mixlabel::synth

namespace mixlabel::synth {

void write_demo_dataset(const std::filesystem::path& dir, const DemoParams& params) {
  const auto cams = camera_rig();
  json scenes = json::array();
  for (std::size_t k = 0; k < params.scenes; ++k) {
    const std::uint64_t scene_seed_value = splitmix64(params.seed * 1000003ULL + k);
    Scene scene = rig_scene(scene_seed_value);
    const std::string id = "scene_" + std::to_string(k);
    scene.cloud = PointCloud(id, scene.cloud.points());
    Rng rng(scene_seed_value ^ 0x5eedULL);

    write_cloud_bin(dir / "clouds" / (id + ".bin"), scene.cloud);
    write_label_file(dir / "gt" / (id + ".json"), {id, {}, scene.boxes});

    LabelFile candidates{id, {}, {}};
    LabelFile pseudo{id, {}, {}};
    InstanceId next = 1;
    for (const auto& rec : scene.boxes) {
      for (int c = 0; c < 3; ++c) {
        Box3D b = rec.box;
        b.center.x() += rng.symmetric(0.3);
        b.center.y() += rng.symmetric(0.3);
        for (int d = 0; d < 3; ++d) b.dims[d] *= rng.uniform(0.9, 1.1);
        candidates.boxes.push_back({b, next++});
      }
      Box3D p = rec.box;
      p.center.x() += rng.symmetric(0.1);
      p.center.y() += rng.symmetric(0.1);
      p.score = rng.uniform(0.3, 1.0);
      pseudo.boxes.push_back({p, rec.instance_id});
    }
    for (int c = 0; c < 10; ++c) {
      Box3D b;
      b.center = {rng.symmetric(20.0), rng.symmetric(20.0), -1.0};
      b.dims = {4.0, 1.8, 1.6};
      b.yaw = rng.uniform(-3.14159, 3.14159);
      candidates.boxes.push_back({b, next++});
    }
    write_label_file(dir / "candidates" / (id + ".json"), candidates);
    write_label_file(dir / "pseudo" / (id + ".json"), pseudo);

    const auto masks = render_masks(scene, cams, {params.corrupt_masks, params.corrupt_masks}, scene_seed_value);
    json cam_entries = json::array();
    for (std::size_t c = 0; c < cams.size(); ++c) {
      const std::string stem = "masks/" + id + "_" + cams[c].name;
      write_masks(dir / (stem + ".inst.bin"), dir / (stem + ".sem.bin"), dir / (stem + ".json"), masks[c]);
      json cj = camera_to_json(cams[c]);
      cj["masks"] = {{"instance", stem + ".inst.bin"}, {"semantic", stem + ".sem.bin"}, {"sidecar", stem + ".json"}};
      cam_entries.push_back(std::move(cj));
    }
    scenes.push_back({{"scene_id", id},
                      {"cloud", "clouds/" + id + ".bin"},
                      {"labels", "gt/" + id + ".json"},
                      {"candidates", "candidates/" + id + ".json"},
                      {"pseudo", "pseudo/" + id + ".json"},
                      {"cameras", std::move(cam_entries)}});
  }
  const json manifest = {{"schema_version", 1},
                         {"seed", params.seed},
                         {"classes", {{"1", "car"}, {"2", "pedestrian"}, {"3", "cyclist"}}},
                         {"scenes", std::move(scenes)}};
  write_text(dir / "manifest.json", manifest.dump(1) + "\n");
}

}  // namespace mixlabel::synth
