#pragma once

#include <span>
#include <vector>

#include "mixlabel/labels.hpp"

namespace mixlabel {

/// Box fitted from a cluster. Shape and heading are not trustworthy for
/// fitted boxes (length/width and heading/heading+pi are indistinguishable).
struct PseudoBox {
  Box3D box;
  bool shape_reliable = false;
  bool heading_reliable = false;
};

struct LShapeParams {
  double angle_step_deg = 1.0;
  double min_distance = 0.01;  // meters, clamp for the closeness score
};

/// Closeness score of the BEV points for a rectangle edge direction theta.
double lshape_closeness(std::span<const Eigen::Vector2d> points, double theta, double min_distance);

/// Searches headings in [0, 90) deg, keeps the rectangle with the best
/// closeness score and extends it over the cluster's z-extent.
/// Throws std::invalid_argument for fewer than 3 points.
PseudoBox fit_lshape(const PointCloud& cloud, const ClusterLabel& label, const LShapeParams& params = {});

struct SelfTrainParams {
  double score_thresh = 0.7;
  double match_iou = 0.25;
  void validate() const;
};

struct SelfTrainDiff {
  std::size_t above_threshold = 0;
  std::size_t replaced = 0;
  std::size_t discarded = 0;
  std::vector<InstanceId> replaced_instances;  // cluster ids now box-supervised
};

struct SelfTrainResult {
  LabelSet labels;
  SelfTrainDiff diff;
};

/// One self-training round. Pseudo boxes scoring above the threshold are
/// visited by (score desc, instance_id asc). Each is compared by box-cluster
/// IoU against every current label; when the best match (ties to the smaller
/// instance id) is a cluster-only label with IoU >= match_iou and > 0, that
/// cluster is replaced by the pseudo box, keeping the cluster's instance id.
/// Otherwise the pseudo box is discarded. Box labels are never replaced.
SelfTrainResult selftrain_merge(const LabelSet& labels, std::span<const BoxRecord> pseudo, const PointCloud& cloud,
                                const SelfTrainParams& params = {});

}  // namespace mixlabel
