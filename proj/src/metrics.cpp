#include "mixlabel/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <tuple>

namespace mixlabel {

double PanopticClassStats::rq() const {
  const double denom = static_cast<double>(tp) + 0.5 * static_cast<double>(fp) + 0.5 * static_cast<double>(fn);
  return denom == 0.0 ? 0.0 : static_cast<double>(tp) / denom;
}

void PanopticAccumulator::add_scene(std::span<const ClusterLabel> pred, std::span<const ClusterLabel> gt) {
  std::map<ClassId, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> by_class;
  for (std::size_t p = 0; p < pred.size(); ++p) by_class[pred[p].class_id].first.push_back(p);
  for (std::size_t g = 0; g < gt.size(); ++g) by_class[gt[g].class_id].second.push_back(g);

  for (const auto& [cls, members] : by_class) {
    const auto& [pi, gi] = members;
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < pi.size(); ++a) {
      for (std::size_t b = 0; b < gi.size(); ++b) {
        const double iou = point_set_iou(pred[pi[a]].points, gt[gi[b]].points);
        if (iou > iou_match_) pairs.emplace_back(iou, a, b);
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
      if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
      return std::tie(std::get<1>(x), std::get<2>(x)) < std::tie(std::get<1>(y), std::get<2>(y));
    });

    std::vector<bool> pred_used(pi.size(), false), gt_used(gi.size(), false);
    auto& st = stats_[cls];
    for (const auto& [iou, a, b] : pairs) {
      if (pred_used[a] || gt_used[b]) continue;
      pred_used[a] = gt_used[b] = true;
      ++st.tp;
      st.iou_sum += iou;
    }
    st.fp += static_cast<std::size_t>(std::count(pred_used.begin(), pred_used.end(), false));
    st.fn += static_cast<std::size_t>(std::count(gt_used.begin(), gt_used.end(), false));
  }
}

void PanopticAccumulator::merge(const PanopticAccumulator& other) {
  for (const auto& [cls, s] : other.stats_) {
    auto& d = stats_[cls];
    d.tp += s.tp;
    d.fp += s.fp;
    d.fn += s.fn;
    d.iou_sum += s.iou_sum;
  }
}

PanopticReport PanopticAccumulator::report() const {
  PanopticReport r;
  r.per_class = stats_;
  if (stats_.empty()) return r;
  for (const auto& [cls, s] : stats_) {
    r.mean_pq += s.pq();
    r.mean_sq += s.sq();
    r.mean_rq += s.rq();
  }
  const double n = static_cast<double>(stats_.size());
  r.mean_pq /= n;
  r.mean_sq /= n;
  r.mean_rq /= n;
  return r;
}

PanopticReport panoptic_eval(std::span<const ClusterLabel> pred, std::span<const ClusterLabel> gt,
                             double iou_match) {
  PanopticAccumulator acc(iou_match);
  acc.add_scene(pred, gt);
  return acc.report();
}

std::vector<ClassId> per_point_classes(std::span<const ClusterLabel> clusters, std::size_t n_points) {
  std::vector<ClassId> out(n_points, kBackgroundClass);
  for (const auto& c : clusters) {
    c.points.check_bounds(n_points);
    for (PointIndex i : c.points) out[i] = c.class_id;
  }
  return out;
}

void SegmentationAccumulator::add_scene(std::span<const ClassId> pred, std::span<const ClassId> gt) {
  if (pred.size() != gt.size()) throw std::invalid_argument("segmentation inputs differ in point count");
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const ClassId p = pred[i];
    const ClassId g = gt[i];
    if (p == g) {
      if (p != kBackgroundClass) {
        ++counts_[p].inter;
        ++counts_[p].uni;
      }
      continue;
    }
    if (p != kBackgroundClass) ++counts_[p].uni;
    if (g != kBackgroundClass) ++counts_[g].uni;
  }
}

void SegmentationAccumulator::merge(const SegmentationAccumulator& other) {
  for (const auto& [cls, c] : other.counts_) {
    counts_[cls].inter += c.inter;
    counts_[cls].uni += c.uni;
  }
}

SegmentationReport SegmentationAccumulator::report() const {
  SegmentationReport r;
  for (const auto& [cls, c] : counts_) {
    r.per_class_iou[cls] = static_cast<double>(c.inter) / static_cast<double>(c.uni);
    r.miou += r.per_class_iou[cls];
  }
  if (!counts_.empty()) r.miou /= static_cast<double>(counts_.size());
  return r;
}

SegmentationReport segmentation_miou(std::span<const ClassId> pred, std::span<const ClassId> gt) {
  SegmentationAccumulator acc;
  acc.add_scene(pred, gt);
  return acc.report();
}

std::string format_panoptic_table(const PanopticReport& report, const std::map<ClassId, std::string>& class_names) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %7s %7s %7s %7s %7s %7s\n", "Class", "PQ", "SQ", "RQ", "TP", "FP", "FN");
  out += line;
  for (const auto& [cls, s] : report.per_class) {
    const auto it = class_names.find(cls);
    const std::string name = it != class_names.end() ? it->second : "class_" + std::to_string(cls);
    std::snprintf(line, sizeof line, "%-16s %7.1f %7.1f %7.1f %7zu %7zu %7zu\n", name.c_str(), 100.0 * s.pq(),
                  100.0 * s.sq(), 100.0 * s.rq(), s.tp, s.fp, s.fn);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-16s %7.1f %7.1f %7.1f\n", "mean", 100.0 * report.mean_pq,
                100.0 * report.mean_sq, 100.0 * report.mean_rq);
  out += line;
  return out;
}

}  // namespace mixlabel
