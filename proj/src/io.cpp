#include "mixlabel/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mixlabel {

namespace {

template <typename T>
T from_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
std::vector<T> read_raw(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % sizeof(T) != 0) {
    throw std::runtime_error(path.string() + ": size is not a multiple of " + std::to_string(sizeof(T)) + " bytes");
  }
  std::vector<T> out(bytes.size() / sizeof(T));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  for (auto& v : out) v = from_little_endian(v);
  return out;
}

template <typename T>
void write_raw(const fs::path& path, std::vector<T> values) {
  for (auto& v : values) v = from_little_endian(v);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(T)));
}

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from(const json& j, const char* field) {
  const json& a = j.at(field);
  if (!a.is_array() || a.size() != 3) throw std::invalid_argument(std::string("field '") + field + "' must be [x, y, z]");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

}  // namespace

PointCloud read_cloud_bin(const fs::path& path, std::string scene_id) {
  const auto raw = read_raw<float>(path);
  if (raw.size() % 4 != 0) throw std::runtime_error(path.string() + ": truncated point record");
  const std::size_t n = raw.size() / 4;
  std::vector<Eigen::Vector3d> pts(n);
  std::vector<float> intensity(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {raw[4 * i], raw[4 * i + 1], raw[4 * i + 2]};
    intensity[i] = raw[4 * i + 3];
  }
  return PointCloud(std::move(scene_id), std::move(pts), std::move(intensity));
}

void write_cloud_bin(const fs::path& path, const PointCloud& cloud) {
  std::vector<float> raw;
  raw.reserve(cloud.size() * 4);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud[static_cast<PointIndex>(i)];
    raw.push_back(static_cast<float>(p.x()));
    raw.push_back(static_cast<float>(p.y()));
    raw.push_back(static_cast<float>(p.z()));
    raw.push_back(cloud.has_intensity() ? cloud.intensity()[i] : 0.0f);
  }
  write_raw(path, std::move(raw));
}

json box_to_json(const BoxRecord& rec) {
  json j = {{"center", vec3_json(rec.box.center)},
            {"dims", vec3_json(rec.box.dims)},
            {"yaw", rec.box.yaw},
            {"class_id", rec.box.class_id},
            {"instance_id", rec.instance_id}};
  if (rec.box.score) j["score"] = *rec.box.score;
  return j;
}

BoxRecord box_from_json(const json& j) {
  BoxRecord rec;
  rec.box.center = vec3_from(j, "center");
  rec.box.dims = vec3_from(j, "dims");
  rec.box.yaw = normalize_yaw(j.at("yaw").get<double>());
  rec.box.class_id = j.at("class_id").get<ClassId>();
  rec.instance_id = j.at("instance_id").get<InstanceId>();
  if (j.contains("score")) {
    const double s = j.at("score").get<double>();
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("box score must lie in [0, 1]");
    rec.box.score = s;
  }
  rec.box.validate();
  return rec;
}

json label_file_to_json(const LabelFile& file) {
  json clusters = json::array();
  for (const auto& c : file.clusters) {
    clusters.push_back({{"indices", c.points.indices()}, {"class_id", c.class_id}, {"instance_id", c.instance_id}});
  }
  json boxes = json::array();
  for (const auto& b : file.boxes) boxes.push_back(box_to_json(b));
  return {{"scene_id", file.scene_id}, {"clusters", std::move(clusters)}, {"boxes", std::move(boxes)}};
}

LabelFile label_file_from_json(const json& j) {
  LabelFile f;
  f.scene_id = j.at("scene_id").get<std::string>();
  for (const auto& c : j.value("clusters", json::array())) {
    f.clusters.push_back({PointIndexSet::from_unsorted(c.at("indices").get<std::vector<PointIndex>>()),
                          c.at("class_id").get<ClassId>(), c.at("instance_id").get<InstanceId>()});
  }
  for (const auto& b : j.value("boxes", json::array())) f.boxes.push_back(box_from_json(b));
  return f;
}

LabelFile read_label_file(const fs::path& path) {
  try {
    return label_file_from_json(read_json(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": malformed label file: " + e.what());
  }
}

void write_label_file(const fs::path& path, const LabelFile& file) {
  write_text(path, label_file_to_json(file).dump(1) + "\n");
}

LabelSet to_label_set(const LabelFile& file, const PointCloud& cloud) {
  LabelSet set;
  set.scene_id = file.scene_id;
  set.clusters = file.clusters;
  for (const auto& b : file.boxes) set.boxes.push_back(BoxLabel::enclose(cloud, b.box, b.instance_id));
  set.validate(cloud);
  return set;
}

LabelFile to_label_file(const LabelSet& labels) {
  LabelFile f;
  f.scene_id = labels.scene_id;
  f.clusters = labels.clusters;
  for (const auto& b : labels.boxes) f.boxes.push_back({b.box, b.instance_id()});
  std::sort(f.clusters.begin(), f.clusters.end(),
            [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
  std::sort(f.boxes.begin(), f.boxes.end(), [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
  return f;
}

std::vector<ClusterLabel> all_instances(const LabelSet& labels) {
  std::vector<ClusterLabel> out = labels.clusters;
  for (const auto& b : labels.boxes) out.push_back(b.cluster);
  return out;
}

json camera_to_json(const CameraModel& c) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) rot.push_back(c.rotation(r, k));
  }
  return {{"name", c.name},     {"fx", c.fx},         {"fy", c.fy},
          {"cx", c.cx},         {"cy", c.cy},         {"width", c.width},
          {"height", c.height}, {"rotation", rot},    {"translation", vec3_json(c.translation)}};
}

CameraModel camera_from_json(const json& j) {
  CameraModel c;
  c.name = j.value("name", std::string{});
  c.fx = j.at("fx").get<double>();
  c.fy = j.at("fy").get<double>();
  c.cx = j.at("cx").get<double>();
  c.cy = j.at("cy").get<double>();
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  const auto rot = j.at("rotation").get<std::vector<double>>();
  if (rot.size() != 9) throw std::invalid_argument("camera rotation must have 9 row-major entries");
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) c.rotation(r, k) = rot[static_cast<std::size_t>(3 * r + k)];
  }
  c.translation = vec3_from(j, "translation");
  c.validate();
  return c;
}

InstanceMasks2D read_masks(const fs::path& instance_path, const fs::path& semantic_path,
                           const fs::path& sidecar_path) {
  const json meta = read_json(sidecar_path);
  InstanceMasks2D m;
  m.width = meta.at("width").get<int>();
  m.height = meta.at("height").get<int>();
  m.instance = read_raw<std::uint32_t>(instance_path);
  m.semantic = read_raw<std::uint16_t>(semantic_path);
  m.validate();
  return m;
}

void write_masks(const fs::path& instance_path, const fs::path& semantic_path, const fs::path& sidecar_path,
                 const InstanceMasks2D& masks) {
  masks.validate();
  write_raw(instance_path, masks.instance);
  write_raw(semantic_path, masks.semantic);
  write_text(sidecar_path, json{{"width", masks.width}, {"height", masks.height}}.dump() + "\n");
}

json partition_to_json(const AssignmentPartition& partition) {
  std::vector<std::pair<const Sample*, const char*>> all;
  for (const auto& s : partition.accurate) all.emplace_back(&s, "a");
  for (const auto& s : partition.coarse) all.emplace_back(&s, "c");
  for (const auto& s : partition.negative) all.emplace_back(&s, "n");
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first->sample_id < y.first->sample_id; });

  auto sample_json = [](const Sample& s, const char* set) {
    json j = {{"sample_id", s.sample_id},
              {"set", set},
              {"matched_instance", s.matched_instance ? json(*s.matched_instance) : json(nullptr)},
              {"class_target", s.class_target}};
    if (s.regression_target) {
      j["regression_target"] = {{"center", vec3_json(s.regression_target->center)},
                                {"dims", vec3_json(s.regression_target->dims)},
                                {"yaw", s.regression_target->yaw},
                                {"class_id", s.regression_target->class_id}};
    }
    return j;
  };

  json samples = json::array();
  for (const auto& [s, set] : all) samples.push_back(sample_json(*s, set));
  json ignored = json::array();
  for (const auto& s : partition.ignored) {
    ignored.push_back({{"sample_id", s.sample_id}, {"matched_instance", *s.matched_instance}, {"iou", s.iou}});
  }
  return {{"samples", std::move(samples)},
          {"ignored", std::move(ignored)},
          {"out_of_grid", partition.out_of_grid},
          {"shadowed", partition.shadowed},
          {"summary",
           {{"a", partition.accurate.size()},
            {"c", partition.coarse.size()},
            {"n", partition.negative.size()},
            {"ignored", partition.ignored.size()}}}};
}

json panoptic_to_json(const PanopticReport& report, const std::map<ClassId, std::string>& class_names) {
  json classes = json::array();
  for (const auto& [cls, s] : report.per_class) {
    const auto it = class_names.find(cls);
    classes.push_back({{"class_id", cls},
                       {"name", it != class_names.end() ? it->second : std::string{}},
                       {"pq", s.pq()},
                       {"sq", s.sq()},
                       {"rq", s.rq()},
                       {"tp", s.tp},
                       {"fp", s.fp},
                       {"fn", s.fn}});
  }
  return {{"classes", std::move(classes)},
          {"mean", {{"pq", report.mean_pq}, {"sq", report.mean_sq}, {"rq", report.mean_rq}}}};
}

json segmentation_to_json(const SegmentationReport& report) {
  json per_class = json::object();
  for (const auto& [cls, iou] : report.per_class_iou) per_class[std::to_string(cls)] = iou;
  return {{"per_class_iou", std::move(per_class)}, {"miou", report.miou}};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace mixlabel
