#include "mixlabel/manifest.hpp"

#include <set>
#include <stdexcept>

#include "mixlabel/io.hpp"

namespace mixlabel {

namespace {

fs::path resolve(const fs::path& base, const json& j, const char* field, const std::string& scene) {
  fs::path p = j.at(field).get<std::string>();
  if (p.is_relative()) p = base / p;
  if (!fs::exists(p)) throw std::runtime_error("scene " + scene + ": " + field + " file not found: " + p.string());
  return p;
}

std::optional<fs::path> resolve_optional(const fs::path& base, const json& j, const char* field,
                                         const std::string& scene) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  return resolve(base, j, field, scene);
}

}  // namespace

Manifest Manifest::load(const fs::path& path) {
  const json j = read_json(path);
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

  Manifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != 1) {
      throw std::runtime_error("unsupported manifest schema_version " + std::to_string(m.schema_version));
    }
    m.seed = j.value("seed", std::uint64_t{0});
    const json classes = j.value("classes", json::object());
    for (const auto& [key, name] : classes.items()) {
      m.classes[std::stoi(key)] = name.get<std::string>();
    }

    std::set<std::string> ids;
    for (const auto& s : j.at("scenes")) {
      SceneEntry e;
      e.scene_id = s.at("scene_id").get<std::string>();
      if (!ids.insert(e.scene_id).second) throw std::runtime_error("duplicate scene_id " + e.scene_id);
      e.cloud = resolve(base, s, "cloud", e.scene_id);
      e.labels = resolve_optional(base, s, "labels", e.scene_id);
      e.candidates = resolve_optional(base, s, "candidates", e.scene_id);
      e.pseudo = resolve_optional(base, s, "pseudo", e.scene_id);
      for (const auto& c : s.value("cameras", json::array())) {
        SceneCamera cam;
        cam.model = camera_from_json(c);
        if (c.contains("masks")) {
          const json& mk = c.at("masks");
          cam.masks = MaskPaths{resolve(base, mk, "instance", e.scene_id), resolve(base, mk, "semantic", e.scene_id),
                                resolve(base, mk, "sidecar", e.scene_id)};
        }
        e.cameras.push_back(std::move(cam));
      }
      m.scenes.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

}  // namespace mixlabel
