#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixlabel/pointsam.hpp"

namespace mixlabel {

struct MaskPaths {
  std::filesystem::path instance;
  std::filesystem::path semantic;
  std::filesystem::path sidecar;
};

struct SceneCamera {
  CameraModel model;
  std::optional<MaskPaths> masks;
};

struct SceneEntry {
  std::string scene_id;
  std::filesystem::path cloud;
  std::optional<std::filesystem::path> labels;      // ground-truth label file
  std::optional<std::filesystem::path> candidates;  // anchors / proposals (box schema)
  std::optional<std::filesystem::path> pseudo;      // scored pseudo boxes (box schema)
  std::vector<SceneCamera> cameras;
};

/// Scene manifest, schema_version 1. Relative paths resolve against the
/// manifest's directory.
struct Manifest {
  int schema_version = 1;
  std::uint64_t seed = 0;
  std::map<ClassId, std::string> classes;
  std::vector<SceneEntry> scenes;

  /// Throws std::runtime_error on schema errors, duplicate scene ids or
  /// referenced files that do not exist.
  static Manifest load(const std::filesystem::path& path);
};

}  // namespace mixlabel
