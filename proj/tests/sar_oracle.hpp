#pragma once
// Brute-force checks of the refined-labeling invariants: O(n^2) pair scan,
// no spatial hashing, no shared code with the library's CCL.

#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "mixlabel/pointsam.hpp"

namespace oracle {

inline std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

/// Per-class components over the foreground points; returns the component
/// root per point (SIZE_MAX for background).
inline std::vector<std::size_t> class_components(const mixlabel::PointCloud& cloud, const mixlabel::PointLabeling& lab,
                                                 const mixlabel::SarRadii& radii) {
  const std::size_t n = cloud.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!lab.is_foreground(i)) continue;
    const double r = radii.radius_for(lab.class_id[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!lab.is_foreground(j) || lab.class_id[j] != lab.class_id[i]) continue;
      if ((cloud[static_cast<mixlabel::PointIndex>(i)] - cloud[static_cast<mixlabel::PointIndex>(j)]).squaredNorm() <= r * r) {
        parent[find_root(parent, i)] = find_root(parent, j);
      }
    }
  }
  std::vector<std::size_t> root(n, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i) {
    if (lab.is_foreground(i)) root[i] = find_root(parent, i);
  }
  return root;
}

/// Empty string when every instance lies in one component and every
/// component hosts exactly one instance; otherwise a description.
inline std::string sar_violation(const mixlabel::PointCloud& cloud, const mixlabel::PointLabeling& lab,
                                 const mixlabel::SarRadii& radii) {
  const auto root = class_components(cloud, lab, radii);
  std::map<std::uint32_t, std::set<std::size_t>> comps_of_instance;
  std::map<std::size_t, std::set<std::uint32_t>> instances_of_comp;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!lab.is_foreground(i)) continue;
    comps_of_instance[lab.mask_id[i]].insert(root[i]);
    instances_of_comp[root[i]].insert(lab.mask_id[i]);
  }
  for (const auto& [inst, comps] : comps_of_instance) {
    if (comps.size() != 1) return "instance " + std::to_string(inst) + " spans " + std::to_string(comps.size()) + " components";
  }
  for (const auto& [comp, insts] : instances_of_comp) {
    if (insts.size() != 1) return "a component hosts " + std::to_string(insts.size()) + " instances";
  }
  return {};
}

inline bool foreground_subset(const mixlabel::PointLabeling& refined, const mixlabel::PointLabeling& input) {
  for (std::size_t i = 0; i < refined.size(); ++i) {
    if (refined.is_foreground(i) && !input.is_foreground(i)) return false;
  }
  return true;
}

}  // namespace oracle
