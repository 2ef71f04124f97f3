#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mixlabel/labels.hpp"
#include "mixlabel/pointsam.hpp"

namespace mixlabel {
class Rng;
}

/// Deterministic synthetic scenes for tests, the acceptance suite and demos.
namespace mixlabel::synth {

struct Scene {
  PointCloud cloud;
  std::vector<BoxRecord> boxes;             // ground-truth boxes, instance ids 1..K
  std::vector<ClusterLabel> gt_instances;   // points generated for each object
};

struct RandomSceneParams {
  std::size_t max_points = 500;
  std::size_t max_objects = 8;
  double extent = 20.0;  // meters, half-width of the scene square
};

/// Boxes with random pose and size; a share of the points is drawn inside
/// the boxes, the rest uniformly over the scene. gt_instances are the
/// points_in_box sets of the boxes.
Scene random_scene(Rng& rng, const RandomSceneParams& params = {});

/// A labeled version of `scene`: every box with a nonempty interior becomes
/// a box label with probability `box_fraction`, otherwise a cluster label
/// with its exact interior. Empty boxes are skipped.
LabelSet random_label_set(const Scene& scene, double box_fraction, Rng& rng);

// ---------------------------------------------------------------------------
// Camera rig scenes for PointSAM.

struct RigParams {
  std::size_t min_objects = 3;
  std::size_t max_objects = 6;
  std::size_t background_points = 300;
};

/// Four outward-looking pinhole cameras at the sensor origin, 100 deg
/// horizontal field of view each.
std::vector<CameraModel> camera_rig();

/// Objects (car / pedestrian / cyclist as classes 1 / 2 / 3) placed in
/// separate azimuth sectors, sampled densely on their surfaces so that each
/// is a single connected component under the default SAR radii; background
/// ground points lie between sectors.
Scene rig_scene(std::uint64_t seed, const RigParams& params = {});

struct MaskCorruption {
  bool over_segment = false;  // split each object's mask into vertical strips
  bool bleed = false;         // paint part of one object with another's mask id
};

/// Renders per-camera instance/semantic maps of `scene` as seen by
/// `cameras`: each object's mask is the filled convex hull of its projected
/// points, nearer objects win. Without corruption the masks are perfect.
std::vector<InstanceMasks2D> render_masks(const Scene& scene, const std::vector<CameraModel>& cameras,
                                          const MaskCorruption& corruption = {}, std::uint64_t seed = 0);

struct DemoParams {
  std::size_t scenes = 8;
  std::uint64_t seed = 1;
  bool corrupt_masks = false;
};

/// Writes a self-contained dataset under `dir`: clouds, ground-truth label
/// files, box candidates, scored pseudo boxes, per-camera mask grids and a
/// manifest.json referencing all of them.
void write_demo_dataset(const std::filesystem::path& dir, const DemoParams& params);

}  // namespace mixlabel::synth
