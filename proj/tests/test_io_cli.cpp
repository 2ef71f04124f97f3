#include <doctest.h>

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "mixlabel/assignment.hpp"
#include "mixlabel/commands.hpp"
#include "mixlabel/io.hpp"
#include "mixlabel/manifest.hpp"
#include "mixlabel/synthetic.hpp"

using namespace mixlabel;
using Eigen::Vector3d;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mixlabel_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// One scene with `n` unit boxes, each enclosing exactly one point.
fs::path hundred_box_dataset(const fs::path& dir, std::size_t n) {
  std::vector<Vector3d> pts;
  LabelFile gt{"grid", {}, {}};
  for (std::size_t k = 0; k < n; ++k) {
    const Vector3d c(2.0 * static_cast<double>(k % 10), 2.0 * static_cast<double>(k / 10), 0.0);
    pts.push_back(c);
    Box3D b;
    b.center = c;
    b.class_id = 1 + static_cast<ClassId>(k % 3);
    gt.boxes.push_back({b, static_cast<InstanceId>(k + 1)});
  }
  write_cloud_bin(dir / "grid.bin", PointCloud("grid", pts));
  write_label_file(dir / "grid.json", gt);
  const json m = {{"schema_version", 1},
                  {"seed", 5},
                  {"classes", {{"1", "car"}, {"2", "pedestrian"}, {"3", "cyclist"}}},
                  {"scenes", json::array({{{"scene_id", "grid"}, {"cloud", "grid.bin"}, {"labels", "grid.json"}}})}};
  write_text(dir / "manifest.json", m.dump());
  return dir / "manifest.json";
}

std::string slurp(const fs::path& p) { return read_text(p); }

}  // namespace

TEST_CASE("cloud binary round trip") {
  const auto dir = scratch("cloud");
  const PointCloud cloud("c", {{1.5, -2.25, 3}, {0, 0, 0}}, {0.5f, 1.0f});
  write_cloud_bin(dir / "c.bin", cloud);
  CHECK(fs::file_size(dir / "c.bin") == 32);
  const auto back = read_cloud_bin(dir / "c.bin", "c");
  REQUIRE(back.size() == 2);
  CHECK(back[0] == cloud[0]);
  CHECK(back.intensity()[0] == 0.5f);
  std::ofstream(dir / "bad.bin", std::ios::binary) << "0123456789";
  CHECK_THROWS(read_cloud_bin(dir / "bad.bin", "bad"));
  CHECK_THROWS(read_cloud_bin(dir / "missing.bin", "missing"));
}

TEST_CASE("label file round trip") {
  const auto dir = scratch("labels");
  LabelFile f{"s", {}, {}};
  f.clusters.push_back({PointIndexSet::from_sorted({1, 4}), 2, 7});
  Box3D b;
  b.center = {1, 2, 3};
  b.dims = {4, 2, 1.5};
  b.yaw = 0.25;
  b.class_id = 1;
  b.score = 0.9;
  f.boxes.push_back({b, 3});
  write_label_file(dir / "s.json", f);
  const auto back = read_label_file(dir / "s.json");
  CHECK(back.scene_id == "s");
  REQUIRE(back.clusters.size() == 1);
  CHECK(back.clusters[0].points == f.clusters[0].points);
  CHECK(back.clusters[0].instance_id == 7);
  REQUIRE(back.boxes.size() == 1);
  CHECK(back.boxes[0].box.center == b.center);
  CHECK(back.boxes[0].box.yaw == b.yaw);
  CHECK(back.boxes[0].box.score == 0.9);

  json j = box_to_json({b, 1});
  j["score"] = 1.5;
  CHECK_THROWS(box_from_json(j));
  j = box_to_json({b, 1});
  j["dims"] = {1, 0, 1};
  CHECK_THROWS(box_from_json(j));
}

TEST_CASE("to_label_set re-encloses boxes and rejects bad files") {
  const PointCloud cloud("s", {{0, 0, 0}, {5, 0, 0}});
  LabelFile f{"s", {}, {}};
  Box3D b;
  f.boxes.push_back({b, 1});
  f.clusters.push_back({PointIndexSet::from_sorted({1}), 1, 2});
  const auto set = to_label_set(f, cloud);
  REQUIRE(set.boxes.size() == 1);
  CHECK(set.boxes[0].cluster.points == PointIndexSet::from_sorted({0}));
  f.clusters[0].instance_id = 1;
  CHECK_THROWS(to_label_set(f, cloud));
  f.clusters[0] = {PointIndexSet::from_sorted({9}), 1, 2};
  CHECK_THROWS(to_label_set(f, cloud));
}

TEST_CASE("camera and mask round trip") {
  const auto dir = scratch("masks");
  const auto cam = synth::camera_rig()[1];
  const auto back = camera_from_json(camera_to_json(cam));
  CHECK(back.rotation == cam.rotation);
  CHECK(back.fx == cam.fx);
  CHECK(back.name == cam.name);

  InstanceMasks2D m;
  m.width = 3;
  m.height = 2;
  m.instance = {0, 1, 2, 3, 4, 70000};
  m.semantic = {0, 1, 1, 2, 3, 3};
  write_masks(dir / "i.bin", dir / "s.bin", dir / "m.json", m);
  const auto mb = read_masks(dir / "i.bin", dir / "s.bin", dir / "m.json");
  CHECK(mb.instance == m.instance);
  CHECK(mb.semantic == m.semantic);
  write_text(dir / "wrong.json", R"({"width": 4, "height": 2})");
  CHECK_THROWS(read_masks(dir / "i.bin", dir / "s.bin", dir / "wrong.json"));
}

TEST_CASE("partition json is ordered by sample id") {
  AssignmentPartition p;
  p.negative.push_back({0, std::nullopt, 0, std::nullopt, 0});
  p.accurate.push_back({2, 5, 1, Box3D{}, 0});
  p.coarse.push_back({1, 6, 2, std::nullopt, 0});
  const json j = partition_to_json(p);
  const auto& samples = j.at("samples");
  REQUIRE(samples.size() == 3);
  CHECK(samples[0]["set"] == "n");
  CHECK(samples[0]["matched_instance"].is_null());
  CHECK(samples[1]["set"] == "c");
  CHECK_FALSE(samples[1].contains("regression_target"));
  CHECK(samples[2]["set"] == "a");
  CHECK(samples[2].contains("regression_target"));
}

TEST_CASE("manifest validation") {
  const auto dir = scratch("manifest");
  const auto path = hundred_box_dataset(dir, 3);
  const auto m = Manifest::load(path);
  REQUIRE(m.scenes.size() == 1);
  CHECK(m.seed == 5);
  CHECK(m.classes.at(3) == "cyclist");
  CHECK(m.scenes[0].cloud == dir / "grid.bin");

  json j = read_json(path);
  j["schema_version"] = 2;
  write_text(dir / "v2.json", j.dump());
  CHECK_THROWS(Manifest::load(dir / "v2.json"));

  j = read_json(path);
  j["scenes"].push_back(j["scenes"][0]);
  write_text(dir / "dup.json", j.dump());
  CHECK_THROWS(Manifest::load(dir / "dup.json"));

  j = read_json(path);
  j["scenes"][0]["cloud"] = "nope.bin";
  write_text(dir / "missing.json", j.dump());
  CHECK_THROWS(Manifest::load(dir / "missing.json"));
}

TEST_CASE("gen-labels prints the mixed cost") {
  const auto dir = scratch("gen");
  cli::GlobalOptions g{hundred_box_dataset(dir, 100), std::nullopt, 2, dir / "out"};
  std::ostringstream out, err;
  cli::GenLabelsOptions o;
  o.ratio = 0.1;
  REQUIRE(cli::gen_labels(g, o, out, err) == 0);
  CHECK(out.str() == "N_b=10 N_c=90 N_t=100 cost=0.226\n");
  const auto labels = read_label_file(dir / "out/labels/grid.json");
  CHECK(labels.boxes.size() == 10);
  CHECK(labels.clusters.size() == 90);

  std::ostringstream out2;
  o.ratio = 1.0;
  REQUIRE(cli::gen_labels(g, o, out2, err) == 0);
  CHECK(out2.str() == "N_b=100 N_c=0 N_t=100 cost=1\n");

  std::ostringstream out3;
  REQUIRE(cli::cost(g, {}, out3, err) == 0);
  CHECK(out3.str() == "N_b=100 N_c=0 N_t=100 cost=1\n");
  CHECK(read_json(dir / "out/cost.json")["cost"] == 1.0);
}

TEST_CASE("gen-labels without ground truth fails with a message") {
  const auto dir = scratch("nogt");
  write_cloud_bin(dir / "a.bin", PointCloud("a", {{0, 0, 0}}));
  write_text(dir / "m.json", json({{"schema_version", 1}, {"scenes", {{{"scene_id", "a"}, {"cloud", "a.bin"}}}}}).dump());
  cli::GlobalOptions g{dir / "m.json", 1, 1, dir / "out"};
  std::ostringstream out, err;
  CHECK(cli::gen_labels(g, {}, out, err) != 0);
  CHECK(err.str().find("a") != std::string::npos);
  CHECK(err.str().find("ground-truth") != std::string::npos);
}

TEST_CASE("cli pipeline on the synthetic rig") {
  const auto dir = scratch("pipeline");
  synth::write_demo_dataset(dir / "data", {3, 9, false});
  cli::GlobalOptions g{dir / "data/manifest.json", std::nullopt, 4, dir / "out"};
  std::ostringstream out, err;

  REQUIRE(cli::gen_labels(g, {}, out, err) == 0);

  write_text(dir / "center.json", R"({"grid": {"x_range": [-30, 30], "y_range": [-30, 30], "cell_size": 1.0}})");
  write_text(dir / "box.json", R"({"pos_thresh": 0.55, "neg_thresh": 0.45})");
  write_text(dir / "box_missing.json", R"({"pos_thresh": 0.55})");
  cli::AssignOptions ao;
  ao.config = dir / "center.json";
  out.str("");
  REQUIRE(cli::assign(g, ao, out, err) == 0);
  const json part = read_json(dir / "out/assign/scene_0.json");
  CHECK(part["samples"].size() == 3600);
  CHECK(out.str().find("|S_a|=") != std::string::npos);

  ao.mode = "box";
  ao.config = dir / "box.json";
  REQUIRE(cli::assign(g, ao, out, err) == 0);
  const json idx = read_json(dir / "out/assign/index.json");
  for (const auto& s : idx["scenes"]) {
    const auto& sm = s["summary"];
    CHECK(sm["a"].get<std::size_t>() + sm["c"].get<std::size_t>() + sm["n"].get<std::size_t>() +
              sm["ignored"].get<std::size_t>() ==
          s["candidates"].get<std::size_t>());
  }
  ao.config = dir / "box_missing.json";
  CHECK_THROWS_WITH_AS(cli::assign(g, ao, out, err), doctest::Contains("neg_thresh"), std::runtime_error);

  REQUIRE(cli::pointsam(g, {}, out, err) == 0);
  cli::EvalOptions eo;
  eo.pred_dir = dir / "out/pointsam";
  out.str("");
  REQUIRE(cli::eval(g, eo, out, err) == 0);
  const json ev = read_json(dir / "out/eval.json");
  CHECK(ev["panoptic"]["mean"]["pq"] == 1.0);
  CHECK(out.str().find("mIoU 100.0") != std::string::npos);

  // pred = gt
  eo.pred_dir = dir / "data/gt";
  REQUIRE(cli::eval(g, eo, out, err) == 0);
  CHECK(read_json(dir / "out/eval.json")["panoptic"]["mean"]["pq"] == 1.0);

  // empty predictions
  fs::create_directories(dir / "empty");
  for (int k = 0; k < 3; ++k) write_label_file(dir / "empty" / ("scene_" + std::to_string(k) + ".json"), {"x", {}, {}});
  eo.pred_dir = dir / "empty";
  REQUIRE(cli::eval(g, eo, out, err) == 0);
  CHECK(read_json(dir / "out/eval.json")["panoptic"]["mean"]["pq"] == 0.0);

  // scene mismatch
  fs::remove(dir / "empty/scene_1.json");
  std::ostringstream err2;
  CHECK(cli::eval(g, eo, out, err2) == 1);
  CHECK(err2.str().find("scene_1") != std::string::npos);
  CHECK(err2.str().find("scene_0") == std::string::npos);
}

TEST_CASE("cli selftrain: threshold, conservation, idempotence") {
  const auto dir = scratch("selftrain");
  synth::write_demo_dataset(dir / "data", {3, 4, false});
  cli::GlobalOptions g{dir / "data/manifest.json", std::nullopt, 2, dir / "out"};
  std::ostringstream out, err;
  cli::GenLabelsOptions go;
  go.ratio = 0.2;
  go.noise = "noise1";
  REQUIRE(cli::gen_labels(g, go, out, err) == 0);

  cli::SelfTrainOptions high;
  high.score_thresh = 0.9999;
  REQUIRE(cli::selftrain(g, high, out, err) == 0);
  for (int k = 0; k < 3; ++k) {
    const std::string f = "scene_" + std::to_string(k) + ".json";
    CHECK(slurp(dir / "out/selftrain" / f) == slurp(dir / "out/labels" / f));
  }

  REQUIRE(cli::selftrain(g, {}, out, err) == 0);
  const json idx = read_json(dir / "out/selftrain/index.json");
  for (const auto& s : idx["scenes"]) {
    CHECK(s["replaced"].get<std::size_t>() + s["discarded"].get<std::size_t>() == s["above_threshold"].get<std::size_t>());
  }

  fs::rename(dir / "out/selftrain", dir / "round1");
  cli::SelfTrainOptions again;
  again.labels_dir = dir / "round1";
  REQUIRE(cli::selftrain(g, again, out, err) == 0);
  for (int k = 0; k < 3; ++k) {
    const std::string f = "scene_" + std::to_string(k) + ".json";
    CHECK(slurp(dir / "out/selftrain" / f) == slurp(dir / "round1" / f));
  }

  // malformed pseudo file
  write_text(dir / "data/pseudo/scene_2.json", R"({"scene_id": "scene_2", "boxes": [{"center": [0, 0]}]})");
  std::ostringstream err2;
  CHECK(cli::selftrain(g, {}, out, err2) == 1);
  CHECK(err2.str().find("scene_2") != std::string::npos);
}

TEST_CASE("cli pointsam: missing or mismatched masks") {
  const auto dir = scratch("masks_cli");
  synth::write_demo_dataset(dir / "data", {2, 1, false});
  cli::GlobalOptions g{dir / "data/manifest.json", std::nullopt, 1, dir / "out"};
  std::ostringstream out, err;

  write_text(dir / "data/masks/scene_1_left.json", R"({"width": 10, "height": 10})");
  CHECK(cli::pointsam(g, {}, out, err) == 1);
  CHECK(err.str().find("scene_1") != std::string::npos);

  json m = read_json(dir / "data/manifest.json");
  m["scenes"][0]["cameras"][0].erase("masks");
  write_text(dir / "data/nomask.json", m.dump());
  g.manifest = dir / "data/nomask.json";
  std::ostringstream err2;
  CHECK(cli::pointsam(g, {}, out, err2) == 1);
  CHECK(err2.str().find("missing masks") != std::string::npos);
}

TEST_CASE("class weight parsing") {
  CHECK(cli::parse_class_weights({"3=5", "1=0.5"}) == std::map<ClassId, double>{{1, 0.5}, {3, 5.0}});
  CHECK_THROWS(cli::parse_class_weights({"3:5"}));
}
