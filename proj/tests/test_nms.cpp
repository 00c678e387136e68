#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "mono3d/nms.hpp"
#include "test_util.hpp"

using namespace mono3d;

namespace {

Detection random_ego_detection(Rng& rng, int num_classes = 4) {
  Detection d;
  d.box.center = {rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0), 1.0};
  d.box.size = {rng.uniform(1.0, 3.0), rng.uniform(2.0, 6.0), 1.7};
  d.box.yaw = rng.uniform(-kPi, kPi);
  d.box.class_id = rng.uniform_int(0, num_classes - 1);
  d.score = rng.uniform(0.0, 1.0);
  return d;
}

// Textbook greedy suppression, written independently of the library walk.
std::vector<Detection> oracle_nms(const std::vector<Detection>& dets,
                                  double threshold, Frame frame) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return a < b;
  });
  std::vector<Detection> kept;
  std::vector<int> kept_idx;
  for (int i : order) {
    bool keep = true;
    for (int j : kept_idx) {
      if (dets[j].box.class_id == dets[i].box.class_id &&
          bev_rotated_iou(dets[j].box, dets[i].box, frame) > threshold) {
        keep = false;
        break;
      }
    }
    if (keep) {
      kept.push_back(dets[i]);
      kept_idx.push_back(i);
    }
  }
  return kept;
}

bool same_detections(const std::vector<Detection>& a,
                     const std::vector<Detection>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].score != b[i].score ||
        (a[i].box.center - b[i].box.center).norm() > 1e-12 ||
        a[i].box.class_id != b[i].box.class_id) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("bev_nms keeps a lone detection") {
  Rng rng(501);
  const std::vector<Detection> dets{random_ego_detection(rng)};
  const auto kept = bev_nms(dets, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == dets[0].score);
}

TEST_CASE("bev_nms suppresses the lower-scored duplicate") {
  Detection a;
  a.box.center = {5.0, 5.0, 1.0};
  a.box.size = {2.0, 4.0, 1.5};
  a.score = 0.9;
  Detection b = a;
  b.score = 0.8;
  const auto kept = bev_nms({a, b}, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == 0.9);
}

TEST_CASE("bev_nms is class-wise") {
  Detection a;
  a.box.center = {5.0, 5.0, 1.0};
  a.box.size = {2.0, 4.0, 1.5};
  a.box.class_id = 0;
  a.score = 0.9;
  Detection b = a;
  b.box.class_id = 1;
  b.score = 0.8;
  const auto kept = bev_nms({a, b}, 0.5);
  CHECK(kept.size() == 2);
}

TEST_CASE("bev_nms matches the brute-force oracle") {
  Rng rng(502);
  for (int scene = 0; scene < 50; ++scene) {
    std::vector<Detection> dets;
    for (int i = 0; i < 200; ++i) dets.push_back(random_ego_detection(rng));
    const auto kept = bev_nms(dets, 0.5);
    const auto expected = oracle_nms(dets, 0.5, Frame::kEgo);
    CHECK(same_detections(kept, expected));

    // Kept list is score-sorted and the serial walk agrees.
    CHECK(std::is_sorted(kept.begin(), kept.end(),
                         [](const Detection& x, const Detection& y) {
                           return x.score > y.score;
                         }));
    CHECK(same_detections(bev_nms_serial(dets, 0.5), expected));
  }
}

TEST_CASE("bev_nms kept set ignores input order for distinct scores") {
  Rng rng(503);
  std::vector<Detection> dets;
  for (int i = 0; i < 100; ++i) {
    Detection d = random_ego_detection(rng);
    d.score = (i + 1) / 101.0;  // all distinct
    dets.push_back(d);
  }
  const auto kept = bev_nms(dets, 0.4);

  std::vector<Detection> shuffled = dets;
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[rng.uniform_int(0, static_cast<int>(i) - 1)]);
  }
  const auto kept_shuffled = bev_nms(shuffled, 0.4);
  REQUIRE(kept.size() == kept_shuffled.size());
  std::multiset<double> s1, s2;
  for (const auto& d : kept) s1.insert(d.score);
  for (const auto& d : kept_shuffled) s2.insert(d.score);
  CHECK(s1 == s2);
}

TEST_CASE("no two kept same-class detections overlap beyond the threshold") {
  Rng rng(504);
  std::vector<Detection> dets;
  for (int i = 0; i < 150; ++i) dets.push_back(random_ego_detection(rng));
  const double threshold = 0.3;
  const auto kept = bev_nms(dets, threshold);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      if (kept[i].box.class_id != kept[j].box.class_id) continue;
      CHECK(bev_rotated_iou(kept[i].box, kept[j].box) <= threshold);
    }
  }
}

TEST_CASE("raising the threshold never shrinks the kept set") {
  Rng rng(505);
  std::vector<Detection> dets;
  for (int i = 0; i < 150; ++i) dets.push_back(random_ego_detection(rng));
  std::size_t prev = 0;
  for (const double threshold : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const std::size_t n = bev_nms(dets, threshold).size();
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("multiview_merge with one identity camera equals bev_nms") {
  Rng rng(506);
  std::vector<Detection> dets;
  for (int i = 0; i < 60; ++i) dets.push_back(random_ego_detection(rng));
  const auto direct = bev_nms(dets, 0.5);
  const auto merged = multiview_merge({{dets, CameraExtrinsics{}}}, 0.5);
  REQUIRE(merged.size() == direct.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    CHECK(merged[i].score == direct[i].score);
    CHECK(merged[i].source_camera == 0);
  }
}

TEST_CASE("multiview_merge collapses a duplicated physical object") {
  // One object seen from two views with different local poses.
  Box3D world;
  world.center = {10.0, 4.0, 0.8};
  world.size = {2.0, 4.5, 1.6};
  world.yaw = 0.9;

  CameraExtrinsics cam0;  // identity: local == ego
  CameraExtrinsics cam1;
  cam1.rotation =
      Eigen::AngleAxisd(2.1, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  cam1.translation = {1.0, -0.5, 0.1};

  Detection seen0;
  seen0.box = world;
  seen0.score = 0.85;
  Detection seen1;
  seen1.box = transform_to_ego(world, cam1.inverse());
  seen1.score = 0.8;

  const auto merged =
      multiview_merge({{{seen0}, cam0}, {{seen1}, cam1}}, 0.5);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].score == 0.85);
  CHECK(merged[0].source_camera == 0);
}

TEST_CASE("multiview_merge equals manual transformation plus single-frame NMS") {
  Rng rng(507);
  std::vector<CameraDetections> per_camera(3);
  for (int c = 0; c < 3; ++c) {
    per_camera[c].extrinsics.rotation =
        Eigen::AngleAxisd(rng.uniform(-kPi, kPi), Eigen::Vector3d::UnitZ())
            .toRotationMatrix();
    per_camera[c].extrinsics.translation = {rng.uniform(-2.0, 2.0),
                                            rng.uniform(-2.0, 2.0), 0.0};
    for (int i = 0; i < 40; ++i) {
      per_camera[c].detections.push_back(random_ego_detection(rng));
    }
  }

  std::vector<Detection> manual;
  for (int c = 0; c < 3; ++c) {
    for (const auto& det : per_camera[c].detections) {
      Detection d = det;
      d.box = transform_to_ego(det.box, per_camera[c].extrinsics);
      manual.push_back(d);
    }
  }
  const auto expected = oracle_nms(manual, 0.5, Frame::kEgo);
  const auto merged = multiview_merge(per_camera, 0.5);
  CHECK(same_detections(merged, expected));
}
