#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixlabel/assignment.hpp"
#include "mixlabel/labels.hpp"
#include "mixlabel/metrics.hpp"
#include "mixlabel/pointsam.hpp"

namespace mixlabel {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Little-endian float32 records (x, y, z, intensity), 16 bytes per point.
PointCloud read_cloud_bin(const fs::path& path, std::string scene_id);
void write_cloud_bin(const fs::path& path, const PointCloud& cloud);

/// Label file content as stored: clusters carry indices, boxes carry only
/// geometry (their enclosed cluster is recomputed against the cloud).
struct LabelFile {
  std::string scene_id;
  std::vector<ClusterLabel> clusters;
  std::vector<BoxRecord> boxes;
};

json box_to_json(const BoxRecord& box);
BoxRecord box_from_json(const json& j);

json label_file_to_json(const LabelFile& file);
LabelFile label_file_from_json(const json& j);
LabelFile read_label_file(const fs::path& path);
void write_label_file(const fs::path& path, const LabelFile& file);

/// Box labels are re-enclosed against `cloud`; the result is validated.
LabelSet to_label_set(const LabelFile& file, const PointCloud& cloud);
LabelFile to_label_file(const LabelSet& labels);

/// Every instance in a label set as a cluster: clusters then enclosed clusters.
std::vector<ClusterLabel> all_instances(const LabelSet& labels);

json camera_to_json(const CameraModel& camera);
CameraModel camera_from_json(const json& j);

/// Raw row-major grids: uint32 instance ids and uint16 classes, plus a JSON
/// sidecar {"width": W, "height": H}.
InstanceMasks2D read_masks(const fs::path& instance_path, const fs::path& semantic_path, const fs::path& sidecar_path);
void write_masks(const fs::path& instance_path, const fs::path& semantic_path, const fs::path& sidecar_path,
                 const InstanceMasks2D& masks);

/// {sample_id, set: "a"|"c"|"n", matched_instance, class_target, regression_target?}
/// ordered by sample_id; ignored samples and reports listed separately.
json partition_to_json(const AssignmentPartition& partition);

json panoptic_to_json(const PanopticReport& report, const std::map<ClassId, std::string>& class_names);
json segmentation_to_json(const SegmentationReport& report);

/// Writes `text` to `path`, creating parent directories.
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
json read_json(const fs::path& path);

}  // namespace mixlabel
