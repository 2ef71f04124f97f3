#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mixlabel/labels.hpp"

namespace mixlabel {

struct PanopticClassStats {
  std::size_t tp = 0, fp = 0, fn = 0;
  double iou_sum = 0.0;

  double sq() const { return tp == 0 ? 0.0 : iou_sum / static_cast<double>(tp); }
  double rq() const;
  double pq() const { return sq() * rq(); }
};

struct PanopticReport {
  std::map<ClassId, PanopticClassStats> per_class;
  double mean_pq = 0.0, mean_sq = 0.0, mean_rq = 0.0;
};

/// Accumulates TP/FP/FN and matched IoU over scenes, then averages over the
/// classes seen in either ground truth or prediction.
class PanopticAccumulator {
 public:
  explicit PanopticAccumulator(double iou_match = 0.5) : iou_match_(iou_match) {}

  /// Instances of one scene. Matching is within a class, on point-set IoU
  /// strictly above the threshold, greedily by descending IoU (one-to-one for
  /// thresholds >= 0.5).
  void add_scene(std::span<const ClusterLabel> pred, std::span<const ClusterLabel> gt);
  void merge(const PanopticAccumulator& other);
  PanopticReport report() const;

 private:
  double iou_match_;
  std::map<ClassId, PanopticClassStats> stats_;
};

PanopticReport panoptic_eval(std::span<const ClusterLabel> pred, std::span<const ClusterLabel> gt,
                             double iou_match = 0.5);

/// Per-point class map. Where clusters overlap the later cluster wins.
std::vector<ClassId> per_point_classes(std::span<const ClusterLabel> clusters, std::size_t n_points);

struct SegmentationReport {
  std::map<ClassId, double> per_class_iou;
  double miou = 0.0;
};

class SegmentationAccumulator {
 public:
  void add_scene(std::span<const ClassId> pred, std::span<const ClassId> gt);
  void merge(const SegmentationAccumulator& other);
  SegmentationReport report() const;

 private:
  struct Counts {
    std::size_t inter = 0, uni = 0;
  };
  std::map<ClassId, Counts> counts_;
};

/// Point-level IoU per foreground class over the whole labeling, averaged
/// over classes present in either input.
SegmentationReport segmentation_miou(std::span<const ClassId> pred, std::span<const ClassId> gt);

/// Aligned text table: Class | PQ | SQ | RQ | TP | FP | FN, then a mean row.
std::string format_panoptic_table(const PanopticReport& report, const std::map<ClassId, std::string>& class_names);

}  // namespace mixlabel
