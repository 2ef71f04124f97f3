#include "mixlabel/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <thread>

#include "mixlabel/assignment.hpp"
#include "mixlabel/io.hpp"
#include "mixlabel/manifest.hpp"
#include "mixlabel/metrics.hpp"
#include "mixlabel/pointsam.hpp"
#include "mixlabel/rng.hpp"
#include "mixlabel/selftrain.hpp"

namespace mixlabel::cli {

namespace {

constexpr std::uint64_t kBudgetStream = 0x6275646765740001ULL;
constexpr std::uint64_t kCalibrationStream = 0x63616c6962720002ULL;

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Returns one error
/// message per index, empty on success.
std::vector<std::string> for_each_scene(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (errors[i].empty()) errors[i] = "unknown error";
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp<long>(jobs, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return errors;
}

/// Prints per-scene failures; returns the exit code.
int report_failures(const Manifest& m, const std::vector<std::string>& errors, std::ostream& err) {
  std::vector<std::string> failed;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i].empty()) continue;
    err << "scene " << m.scenes[i].scene_id << ": " << errors[i] << "\n";
    failed.push_back(m.scenes[i].scene_id);
  }
  if (failed.empty()) return 0;
  err << "failed scenes:";
  for (const auto& id : failed) err << " " << id;
  err << "\n";
  return 1;
}

std::uint64_t global_seed(const GlobalOptions& g, const Manifest& m) { return g.seed.value_or(m.seed); }

fs::path scene_file(const fs::path& dir, const std::string& scene_id, const char* suffix = ".json") {
  return dir / (scene_id + suffix);
}

PointCloud load_cloud(const SceneEntry& s) { return read_cloud_bin(s.cloud, s.scene_id); }

LabelFile load_gt(const SceneEntry& s) {
  if (!s.labels) throw std::runtime_error("no ground-truth label file in the manifest");
  return read_label_file(*s.labels);
}

void write_json(const fs::path& path, const json& j, int indent = 1) { write_text(path, j.dump(indent) + "\n"); }

NoiseModel load_noise(const GenLabelsOptions& o) {
  if (!o.noise_config) return NoiseModel::preset(o.noise);
  const json j = read_json(*o.noise_config);
  const json& presets = j.at("presets");
  if (!presets.contains(o.noise)) {
    throw std::runtime_error("noise preset '" + o.noise + "' not found in " + o.noise_config->string());
  }
  const json& p = presets.at(o.noise);
  NoiseModel n;
  n.shift_range = p.value("shift", 0.0);
  n.expand_range = p.value("expand", 0.0);
  n.rotate_range = p.value("rotate_deg", 0.0) * 3.14159265358979323846 / 180.0;
  n.validate();
  return n;
}

json cost_json(const CostReport& c) {
  return {{"n_box", c.n_box}, {"n_cluster", c.n_cluster}, {"n_total", c.n_total}, {"cost", c.cost}};
}

void print_cost(std::ostream& out, const CostReport& c) {
  char line[128];
  std::snprintf(line, sizeof line, "N_b=%zu N_c=%zu N_t=%zu cost=%.6g\n", c.n_box, c.n_cluster, c.n_total, c.cost);
  out << line;
}

}  // namespace

std::map<ClassId, double> parse_class_weights(const std::vector<std::string>& specs) {
  std::map<ClassId, double> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("class weight '" + s + "' is not of the form cls=weight");
    out[std::stoi(s.substr(0, eq))] = std::stod(s.substr(eq + 1));
  }
  return out;
}

// ---------------------------------------------------------------------------

int gen_labels(const GlobalOptions& g, const GenLabelsOptions& o, std::ostream& out, std::ostream& err) {
  const Manifest m = Manifest::load(g.manifest);
  const std::uint64_t seed = global_seed(g, m);
  NoiseModel noise = load_noise(o);
  const std::size_t n = m.scenes.size();

  std::vector<PointCloud> clouds(n);
  std::vector<LabelFile> gt(n);
  auto errors = for_each_scene(n, g.jobs, [&](std::size_t i) {
    gt[i] = load_gt(m.scenes[i]);
    if (gt[i].boxes.empty()) throw std::runtime_error("ground-truth label file has no boxes");
    clouds[i] = load_cloud(m.scenes[i]);
  });

  // One budget over the whole dataset, in manifest order.
  std::vector<BudgetItem> items;
  std::vector<std::pair<std::size_t, std::size_t>> owner;  // (scene, box)
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) continue;
    for (std::size_t b = 0; b < gt[i].boxes.size(); ++b) {
      items.push_back({items.size(), gt[i].boxes[b].box.class_id});
      owner.emplace_back(i, b);
    }
  }
  if (items.empty()) {
    err << "no ground-truth boxes found in any scene\n";
    report_failures(m, errors, err);
    return 1;
  }
  const BudgetSelection sel = select_budget(items, o.ratio, o.class_weights, splitmix64(seed ^ kBudgetStream));
  std::vector<std::vector<bool>> selected(n);
  for (std::size_t i = 0; i < n; ++i) selected[i].assign(gt[i].boxes.size(), false);
  for (std::size_t id : sel.selected) selected[owner[id].first][owner[id].second] = true;

  std::vector<json> scene_reports(n);
  std::vector<std::size_t> n_box(n, 0), n_cluster(n, 0);
  const fs::path labels_dir = g.out_dir / "labels";
  auto errors2 = for_each_scene(n, g.jobs, [&](std::size_t i) {
    if (!errors[i].empty()) return;
    const SceneEntry& s = m.scenes[i];
    LabelSet set;
    set.scene_id = s.scene_id;
    std::vector<BoxRecord> remainder;
    for (std::size_t b = 0; b < gt[i].boxes.size(); ++b) {
      const BoxRecord& rec = gt[i].boxes[b];
      if (selected[i][b]) {
        set.boxes.push_back(BoxLabel::enclose(clouds[i], rec.box, rec.instance_id));
      } else {
        remainder.push_back(rec);
      }
    }
    NoiseModel scene_noise = noise;
    scene_noise.seed = scene_seed(seed, s.scene_id);
    ClusterGeneration gen = clusters_from_boxes(clouds[i], remainder, scene_noise);
    set.clusters = std::move(gen.clusters);
    write_label_file(scene_file(labels_dir, s.scene_id), to_label_file(set));
    n_box[i] = set.boxes.size();
    n_cluster[i] = set.clusters.size();
    scene_reports[i] = {{"scene_id", s.scene_id},
                        {"n_box", n_box[i]},
                        {"n_cluster", n_cluster[i]},
                        {"n_gt", gt[i].boxes.size()},
                        {"dropped_empty", gen.dropped}};
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i].empty()) errors[i] = errors2[i];
  }

  std::size_t total_box = 0, total_cluster = 0, total_gt = 0;
  json scenes = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) continue;
    total_box += n_box[i];
    total_cluster += n_cluster[i];
    total_gt += gt[i].boxes.size();
    scenes.push_back(scene_reports[i]);
  }
  const CostReport c = annotation_cost(total_box, total_cluster, total_gt);
  write_json(g.out_dir / "gen_labels.json", {{"seed", seed},
                                              {"ratio", o.ratio},
                                              {"noise",
                                               {{"preset", o.noise},
                                                {"shift", noise.shift_range},
                                                {"expand", noise.expand_range},
                                                {"rotate", noise.rotate_range}}},
                                              {"scenes", std::move(scenes)},
                                              {"cost", cost_json(c)}});
  print_cost(out, c);
  return report_failures(m, errors, err);
}

// ---------------------------------------------------------------------------

int cost(const GlobalOptions& g, const CostOptions& o, std::ostream& out, std::ostream& err) {
  const Manifest m = Manifest::load(g.manifest);
  const fs::path labels_dir = o.labels_dir.value_or(g.out_dir / "labels");
  const std::size_t n = m.scenes.size();
  std::vector<std::size_t> boxes(n, 0), clusters(n, 0), gt(n, 0);
  auto errors = for_each_scene(n, g.jobs, [&](std::size_t i) {
    const LabelFile f = read_label_file(scene_file(labels_dir, m.scenes[i].scene_id));
    boxes[i] = f.boxes.size();
    clusters[i] = f.clusters.size();
    if (!o.n_total) gt[i] = load_gt(m.scenes[i]).boxes.size();
  });
  const int rc = report_failures(m, errors, err);
  if (rc != 0) return rc;

  std::size_t nb = 0, nc = 0, nt = 0;
  for (std::size_t i = 0; i < n; ++i) {
    nb += boxes[i];
    nc += clusters[i];
    nt += gt[i];
  }
  const CostReport c = annotation_cost(nb, nc, o.n_total.value_or(nt));
  write_json(g.out_dir / "cost.json", cost_json(c));
  print_cost(out, c);
  return 0;
}

// ---------------------------------------------------------------------------

int assign(const GlobalOptions& g, const AssignOptions& o, std::ostream& out, std::ostream& err) {
  const Manifest m = Manifest::load(g.manifest);
  const json config = read_json(o.config);

  BevGrid grid;
  BoxAssignConfig box_config;
  if (o.mode == "center") {
    if (!config.contains("grid")) throw std::runtime_error("detector config is missing 'grid' for center mode");
    const json& gj = config.at("grid");
    const auto xr = gj.at("x_range").get<std::vector<double>>();
    const auto yr = gj.at("y_range").get<std::vector<double>>();
    if (xr.size() != 2 || yr.size() != 2) throw std::runtime_error("grid ranges must be [min, max]");
    grid = {xr[0], xr[1], yr[0], yr[1], gj.at("cell_size").get<double>()};
    grid.validate();
  } else if (o.mode == "box") {
    for (const char* key : {"pos_thresh", "neg_thresh"}) {
      if (!config.contains(key)) throw std::runtime_error(std::string("detector config is missing '") + key + "' for box mode");
    }
    box_config = {config.at("pos_thresh").get<double>(), config.at("neg_thresh").get<double>()};
    box_config.validate();
  } else {
    throw std::runtime_error("unknown assignment mode '" + o.mode + "' (expected center or box)");
  }

  const fs::path labels_dir = o.labels_dir.value_or(g.out_dir / "labels");
  const fs::path out_dir = g.out_dir / "assign";
  const std::size_t n = m.scenes.size();
  std::vector<json> summaries(n);
  auto errors = for_each_scene(n, g.jobs, [&](std::size_t i) {
    const SceneEntry& s = m.scenes[i];
    const PointCloud cloud = load_cloud(s);
    const LabelSet labels = to_label_set(read_label_file(scene_file(labels_dir, s.scene_id)), cloud);
    AssignmentPartition part;
    if (o.mode == "center") {
      part = center_assign(labels, cloud, grid);
    } else {
      if (!s.candidates) throw std::runtime_error("box mode needs a candidates file");
      std::vector<Box3D> cands;
      for (const auto& rec : read_label_file(*s.candidates).boxes) cands.push_back(rec.box);
      part = box_assign(cloud, cands, labels, box_config);
    }
    json j = partition_to_json(part);
    j["scene_id"] = s.scene_id;
    j["mode"] = o.mode;
    summaries[i] = {{"scene_id", s.scene_id}, {"summary", j["summary"]}, {"candidates", part.candidate_count()}};
    write_text(scene_file(out_dir, s.scene_id), j.dump() + "\n");
  });

  json index = json::array();
  std::size_t ta = 0, tc = 0, tn = 0, ti = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) continue;
    const json& sm = summaries[i]["summary"];
    ta += sm["a"].get<std::size_t>();
    tc += sm["c"].get<std::size_t>();
    tn += sm["n"].get<std::size_t>();
    ti += sm["ignored"].get<std::size_t>();
    out << m.scenes[i].scene_id << ": |S_a|=" << sm["a"] << " |S_c|=" << sm["c"] << " |S_n|=" << sm["n"]
        << " ignored=" << sm["ignored"] << "\n";
    index.push_back(summaries[i]);
  }
  out << "total: |S_a|=" << ta << " |S_c|=" << tc << " |S_n|=" << tn << " ignored=" << ti << "\n";
  write_json(out_dir / "index.json", {{"mode", o.mode}, {"scenes", std::move(index)}});
  return report_failures(m, errors, err);
}

// ---------------------------------------------------------------------------

int pointsam(const GlobalOptions& g, const PointSamOptions& o, std::ostream& out, std::ostream& err) {
  const Manifest m = Manifest::load(g.manifest);
  const std::uint64_t seed = global_seed(g, m);
  if (!(o.calib_noise_cm >= 0.0)) throw std::runtime_error("calibration noise must be nonnegative");

  SarRadii radii = SarRadii::defaults();
  if (o.radii_config) {
    const json j = read_json(*o.radii_config);
    radii.per_class.clear();
    const json per_class = j.value("per_class", json::object());
    for (const auto& [key, r] : per_class.items()) radii.per_class[std::stoi(key)] = r.get<double>();
    radii.fallback = j.value("fallback", radii.fallback);
  }
  radii.validate();

  const fs::path out_dir = g.out_dir / "pointsam";
  const std::size_t n = m.scenes.size();
  std::vector<json> summaries(n);
  auto errors = for_each_scene(n, g.jobs, [&](std::size_t i) {
    const SceneEntry& s = m.scenes[i];
    if (s.cameras.empty()) throw std::runtime_error("no cameras in the manifest");
    std::vector<CameraModel> cams;
    std::vector<InstanceMasks2D> masks;
    for (const auto& c : s.cameras) {
      if (!c.masks) throw std::runtime_error("missing masks for camera " + c.model.name);
      cams.push_back(c.model);
      masks.push_back(read_masks(c.masks->instance, c.masks->semantic, c.masks->sidecar));
    }
    if (o.calib_noise_cm > 0.0) {
      cams = perturb_calibration(cams, o.calib_noise_cm / 100.0, splitmix64(scene_seed(seed, s.scene_id) ^ kCalibrationStream));
    }
    const PointCloud cloud = load_cloud(s);
    LiftStats lift;
    const PointLabeling lifted = lift_masks(cloud, cams, masks, &lift);
    SarStats sar;
    const PointLabeling refined = sar_refine(cloud, lifted, radii, &sar);

    LabelFile f;
    f.scene_id = s.scene_id;
    f.clusters = labeling_to_clusters(refined);
    write_label_file(scene_file(out_dir, s.scene_id), f);
    const json diff = {{"scene_id", s.scene_id},
                       {"lift", {{"in_view", lift.in_view}, {"on_mask", lift.on_mask}, {"labeled", lift.labeled}}},
                       {"sar",
                        {{"masks_in", sar.masks_in},
                         {"masks_split", sar.masks_split},
                         {"points_backgrounded", sar.points_backgrounded},
                         {"masks_merged", sar.masks_merged},
                         {"instances_out", sar.instances_out},
                         {"rounds", sar.rounds}}}};
    write_json(scene_file(out_dir, s.scene_id, ".sar.json"), diff);
    summaries[i] = diff;
  });

  json index = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) continue;
    const json& sar = summaries[i]["sar"];
    out << m.scenes[i].scene_id << ": masks=" << sar["masks_in"] << " split=" << sar["masks_split"]
        << " merged=" << sar["masks_merged"] << " backgrounded=" << sar["points_backgrounded"]
        << " instances=" << sar["instances_out"] << "\n";
    index.push_back(summaries[i]);
  }
  write_json(out_dir / "index.json", {{"calib_noise_cm", o.calib_noise_cm}, {"scenes", std::move(index)}});
  return report_failures(m, errors, err);
}

// ---------------------------------------------------------------------------

int eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out, std::ostream& err) {
  const Manifest m = Manifest::load(g.manifest);
  const std::size_t n = m.scenes.size();

  std::vector<fs::path> gt_paths(n);
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < n; ++i) {
    const SceneEntry& s = m.scenes[i];
    const fs::path pred = scene_file(o.pred_dir, s.scene_id);
    if (o.gt_dir) {
      gt_paths[i] = scene_file(*o.gt_dir, s.scene_id);
    } else if (s.labels) {
      gt_paths[i] = *s.labels;
    }
    if (!fs::exists(pred) || gt_paths[i].empty() || !fs::exists(gt_paths[i])) missing.push_back(s.scene_id);
  }
  if (!missing.empty()) {
    err << "prediction / ground-truth scene mismatch, missing scene_ids:";
    for (const auto& id : missing) err << " " << id;
    err << "\n";
    return 1;
  }

  std::vector<PanopticAccumulator> pan(n, PanopticAccumulator(o.iou_match));
  std::vector<SegmentationAccumulator> seg(n);
  auto errors = for_each_scene(n, g.jobs, [&](std::size_t i) {
    const SceneEntry& s = m.scenes[i];
    const PointCloud cloud = load_cloud(s);
    const auto gt = all_instances(to_label_set(read_label_file(gt_paths[i]), cloud));
    const auto pred = all_instances(to_label_set(read_label_file(scene_file(o.pred_dir, s.scene_id)), cloud));
    pan[i].add_scene(pred, gt);
    const auto pc = per_point_classes(pred, cloud.size());
    const auto gc = per_point_classes(gt, cloud.size());
    seg[i].add_scene(pc, gc);
  });
  const int rc = report_failures(m, errors, err);
  if (rc != 0) return rc;

  PanopticAccumulator pan_all(o.iou_match);
  SegmentationAccumulator seg_all;
  for (std::size_t i = 0; i < n; ++i) {
    pan_all.merge(pan[i]);
    seg_all.merge(seg[i]);
  }
  const PanopticReport pr = pan_all.report();
  const SegmentationReport sr = seg_all.report();
  std::string table = format_panoptic_table(pr, m.classes);
  char line[64];
  std::snprintf(line, sizeof line, "mIoU %.1f\n", 100.0 * sr.miou);
  table += line;

  write_json(g.out_dir / "eval.json",
             {{"panoptic", panoptic_to_json(pr, m.classes)}, {"segmentation", segmentation_to_json(sr)}, {"scenes", n}});
  write_text(g.out_dir / "eval.txt", table);
  out << table;
  return 0;
}

// ---------------------------------------------------------------------------

int selftrain(const GlobalOptions& g, const SelfTrainOptions& o, std::ostream& out, std::ostream& err) {
  const Manifest m = Manifest::load(g.manifest);
  const SelfTrainParams params{o.score_thresh, o.match_iou};
  params.validate();

  const fs::path labels_dir = o.labels_dir.value_or(g.out_dir / "labels");
  const fs::path out_dir = g.out_dir / "selftrain";
  const std::size_t n = m.scenes.size();
  std::vector<json> diffs(n);
  auto errors = for_each_scene(n, g.jobs, [&](std::size_t i) {
    const SceneEntry& s = m.scenes[i];
    fs::path pseudo_path;
    if (o.pseudo_dir) {
      pseudo_path = scene_file(*o.pseudo_dir, s.scene_id);
    } else if (s.pseudo) {
      pseudo_path = *s.pseudo;
    } else {
      throw std::runtime_error("no pseudo-box file");
    }
    const LabelFile pseudo = read_label_file(pseudo_path);
    for (const auto& p : pseudo.boxes) {
      if (!p.box.score) {
        throw std::runtime_error(pseudo_path.string() + ": pseudo box " + std::to_string(p.instance_id) + " has no score");
      }
    }
    const PointCloud cloud = load_cloud(s);
    const LabelSet labels = to_label_set(read_label_file(scene_file(labels_dir, s.scene_id)), cloud);
    const SelfTrainResult r = selftrain_merge(labels, pseudo.boxes, cloud, params);
    write_label_file(scene_file(out_dir, s.scene_id), to_label_file(r.labels));
    diffs[i] = {{"scene_id", s.scene_id},
                {"pseudo", pseudo.boxes.size()},
                {"above_threshold", r.diff.above_threshold},
                {"replaced", r.diff.replaced},
                {"discarded", r.diff.discarded},
                {"replaced_instances", r.diff.replaced_instances}};
    write_json(scene_file(out_dir, s.scene_id, ".diff.json"), diffs[i]);
  });

  json index = json::array();
  std::size_t replaced = 0, discarded = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) continue;
    replaced += diffs[i]["replaced"].get<std::size_t>();
    discarded += diffs[i]["discarded"].get<std::size_t>();
    out << m.scenes[i].scene_id << ": replaced=" << diffs[i]["replaced"] << " discarded=" << diffs[i]["discarded"] << "\n";
    index.push_back(diffs[i]);
  }
  out << "total: replaced=" << replaced << " discarded=" << discarded << "\n";
  write_json(out_dir / "index.json", {{"score_thresh", o.score_thresh}, {"match_iou", o.match_iou}, {"scenes", std::move(index)}});
  return report_failures(m, errors, err);
}

}  // namespace mixlabel::cli
