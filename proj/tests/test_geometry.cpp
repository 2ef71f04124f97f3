#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mixlabel/geometry.hpp"
#include "mixlabel/rng.hpp"
#include "mixlabel/synthetic.hpp"
#include "oracles.hpp"

using namespace mixlabel;
using Eigen::Vector2d;
using Eigen::Vector3d;

namespace {

PointCloud cloud_of(std::vector<Vector3d> pts) { return PointCloud("t", std::move(pts)); }

PointIndexSet set_of(std::vector<PointIndex> v) { return PointIndexSet::from_unsorted(std::move(v)); }

Box3D box(Vector3d c, Vector3d d, double yaw) {
  Box3D b;
  b.center = c;
  b.dims = d;
  b.yaw = yaw;
  return b;
}

}  // namespace

TEST_CASE("point cloud rejects non-finite coordinates") {
  CHECK_THROWS_AS(cloud_of({{0, 0, std::nan("")}}), std::invalid_argument);
  CHECK_THROWS_AS(cloud_of({{INFINITY, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(PointCloud("t", {{0, 0, 0}}, {1.0f, 2.0f}), std::invalid_argument);
}

TEST_CASE("yaw normalization lands in (-pi, pi]") {
  constexpr double pi = std::numbers::pi;
  CHECK(normalize_yaw(pi) == pi);
  CHECK(normalize_yaw(-pi) == pi);
  CHECK(normalize_yaw(0.5) == 0.5);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double y = rng.symmetric(50.0);
    const double n = normalize_yaw(y);
    CHECK(n > -pi);
    CHECK(n <= pi);
    CHECK(std::abs(std::remainder(y - n, 2 * pi)) < 1e-9);
  }
}

TEST_CASE("box validation") {
  CHECK_THROWS_AS(box({0, 0, 0}, {0, 1, 1}, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(box({0, 0, 0}, {1, -1, 1}, 0).validate(), std::invalid_argument);
  CHECK_NOTHROW(box({0, 0, 0}, {1, 1, 1}, 0).validate());
}

TEST_CASE("points_in_box examples") {
  const Box3D unit2 = box({0, 0, 0}, {2, 2, 2}, 0);
  const auto cloud = cloud_of({{0.5, 0.5, 0.5}, {1, 1, 1}, {1.0000001, 0, 0}});
  CHECK(points_in_box(cloud, unit2) == set_of({0, 1}));

  const Box3D rotated = box({0, 0, 0}, {2, 1, 2}, std::numbers::pi / 2);
  CHECK(rotated.to_local({0.9, 0, 0}).y() == doctest::Approx(-0.9));
  CHECK(points_in_box(cloud_of({{0.9, 0, 0}}), rotated).empty());
  CHECK(points_in_box(cloud_of({{0, 0.9, 0}}), rotated) == set_of({0}));
}

TEST_CASE("points_in_box matches the direct-transform oracle") {
  Rng rng(11);
  for (int s = 0; s < 100; ++s) {
    const auto scene = synth::random_scene(rng);
    for (const auto& rec : scene.boxes) {
      CHECK(oracle::to_set(points_in_box(scene.cloud, rec.box)) == oracle::points_in_box(scene.cloud, rec.box));
    }
  }
}

TEST_CASE("points_in_box is invariant under a rigid transform of cloud and box") {
  Rng rng(12);
  for (int s = 0; s < 50; ++s) {
    const auto scene = synth::random_scene(rng);
    const double phi = rng.symmetric(std::numbers::pi);
    const Vector3d t(rng.symmetric(30), rng.symmetric(30), rng.symmetric(3));
    const Eigen::Matrix3d r = Eigen::AngleAxisd(phi, Vector3d::UnitZ()).toRotationMatrix();
    std::vector<Vector3d> moved;
    for (const auto& p : scene.cloud.points()) moved.push_back(r * p + t);
    const PointCloud moved_cloud("m", moved);
    for (const auto& rec : scene.boxes) {
      Box3D b = rec.box;
      b.center = r * b.center + t;
      b.yaw = normalize_yaw(b.yaw + phi);
      // Rounding can only flip points within ~1e-12 m of a face; the random
      // generator keeps points far from faces with overwhelming probability.
      CHECK(points_in_box(moved_cloud, b) == points_in_box(scene.cloud, rec.box));
    }
  }
}

TEST_CASE("point_set_iou examples and properties") {
  const auto ten = set_of({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(point_set_iou(ten, ten) == 1.0);
  CHECK(point_set_iou(set_of({0, 1}), set_of({2, 3})) == 0.0);
  CHECK(point_set_iou(set_of({0, 1, 2, 3}), set_of({1, 2, 3, 4})) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(point_set_iou({}, {}) == 0.0);

  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    std::vector<PointIndex> a, b;
    for (PointIndex k = 0; k < 30; ++k) {
      if (rng.uniform01() < 0.4) a.push_back(k);
      if (rng.uniform01() < 0.4) b.push_back(k);
    }
    const auto sa = set_of(a), sb = set_of(b);
    const double iou = point_set_iou(sa, sb);
    CHECK(iou == point_set_iou(sb, sa));
    CHECK(iou == oracle::set_iou(oracle::to_set(sa), oracle::to_set(sb)));
    CHECK((iou == 1.0) == (sa == sb && !sa.empty()));
  }

  // Growing the intersection inside a fixed union never lowers the IoU.
  const auto uni = set_of({0, 1, 2, 3, 4, 5, 6, 7});
  double prev = 0.0;
  for (PointIndex k = 0; k <= 8; ++k) {
    std::vector<PointIndex> a{0, 1, 2, 3, 4, 5, 6, 7}, b;
    for (PointIndex j = 0; j < k; ++j) b.push_back(j);
    b.push_back(7);
    const double iou = point_set_iou(set_of(a), set_of(b));
    CHECK(iou >= prev);
    prev = iou;
  }
  CHECK(point_set_iou(uni, uni) == 1.0);
}

TEST_CASE("index set construction") {
  CHECK_THROWS_AS(PointIndexSet::from_sorted({1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(PointIndexSet::from_sorted({2, 1}), std::invalid_argument);
  CHECK(set_of({3, 1, 3, 2}).indices() == std::vector<PointIndex>{1, 2, 3});
  CHECK_THROWS_AS(set_of({0, 5}).check_bounds(5), std::out_of_range);
  CHECK_NOTHROW(set_of({0, 4}).check_bounds(5));
}

TEST_CASE("connected components examples") {
  const auto cloud = cloud_of({{0, 0, 0}, {0.3, 0, 0}, {0.6, 0, 0}, {2.0, 0, 0}});
  const auto three = connected_components(cloud, set_of({0, 1, 2}), 0.5);
  CHECK(three.num_components == 1);
  const auto four = connected_components(cloud, set_of({0, 1, 2, 3}), 0.5);
  CHECK(four.num_components == 2);
  CHECK(four.component_of == std::vector<std::uint32_t>{0, 0, 0, 1});
  const auto none = connected_components(cloud, {}, 0.5);
  CHECK(none.num_components == 0);
  CHECK(none.component_of.empty());
  CHECK_THROWS_AS(connected_components(cloud, set_of({0}), 0.0), std::invalid_argument);
}

TEST_CASE("connected components: distance exactly at the radius links") {
  const auto cloud = cloud_of({{0, 0, 0}, {0.5, 0, 0}, {1.25, 0, 0}});
  CHECK(connected_components(cloud, set_of({0, 1, 2}), 0.5).num_components == 2);
  CHECK(connected_components(cloud, set_of({0, 1, 2}), 0.75).num_components == 1);
}

TEST_CASE("connected components agree with a transitive-closure oracle") {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 5 + rng.next_u64() % 60;
    std::vector<Vector3d> pts;
    for (std::size_t i = 0; i < n; ++i) pts.emplace_back(rng.symmetric(3), rng.symmetric(3), rng.symmetric(0.5));
    const auto cloud = cloud_of(pts);
    std::vector<PointIndex> sub;
    for (PointIndex i = 0; i < n; ++i) {
      if (rng.uniform01() < 0.7) sub.push_back(i);
    }
    const double radius = rng.uniform(0.2, 1.5);
    const auto cc = connected_components(cloud, set_of(sub), radius);
    const auto roots = oracle::closure_roots(cloud, sub, radius);
    REQUIRE(cc.component_of.size() == sub.size());
    std::uint32_t next_new = 0;
    for (std::size_t i = 0; i < sub.size(); ++i) {
      for (std::size_t j = 0; j < sub.size(); ++j) {
        CHECK((cc.component_of[i] == cc.component_of[j]) == (roots[i] == roots[j]));
      }
      // ids appear in order of smallest member index
      if (cc.component_of[i] == next_new) ++next_new;
      CHECK(cc.component_of[i] < next_new);
    }
    CHECK(next_new == cc.num_components);
  }
}

TEST_CASE("bev polygon examples") {
  const std::array<Vector2d, 4> square{Vector2d(0, 0), Vector2d(1, 0), Vector2d(1, 1), Vector2d(0, 1)};
  CHECK(bev_polygon_contains(square, {0.5, 0.5}));
  CHECK_FALSE(bev_polygon_contains(square, {1.5, 0.5}));
  CHECK(bev_polygon_contains(square, {1.0, 0.5}));
  CHECK(bev_polygon_contains(square, {1.0, 1.0}));
  const std::array<Vector2d, 4> flat{Vector2d(0, 0), Vector2d(1, 0), Vector2d(2, 0), Vector2d(3, 0)};
  CHECK_THROWS_AS(bev_polygon_contains(flat, {0.5, 0.0}), std::invalid_argument);
}

TEST_CASE("bev polygon agrees with ray casting on 10^4 random pairs") {
  Rng rng(31);
  int checked = 0;
  while (checked < 10000) {
    // star-shaped simple quadrilateral: sorted angles, random radii
    std::array<double, 4> ang;
    for (auto& a : ang) a = rng.uniform(0, 2 * std::numbers::pi);
    std::sort(ang.begin(), ang.end());
    const Vector2d c(rng.symmetric(5), rng.symmetric(5));
    std::array<Vector2d, 4> poly;
    for (int k = 0; k < 4; ++k) {
      const double r = rng.uniform(0.5, 3.0);
      poly[k] = c + r * Vector2d(std::cos(ang[k]), std::sin(ang[k]));
    }
    if (std::abs(polygon_signed_area(poly)) < 1e-6) continue;
    const Vector2d p = c + Vector2d(rng.symmetric(3.5), rng.symmetric(3.5));
    CHECK(bev_polygon_contains(poly, p) == oracle::ray_cast_contains({poly.begin(), poly.end()}, p));
    ++checked;
  }
}
