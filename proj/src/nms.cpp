#include "mono3d/nms.hpp"

#include <algorithm>
#include <numeric>

namespace mono3d {

namespace {

std::vector<int> score_order(const std::vector<Detection>& dets) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

}  // namespace

std::vector<Detection> bev_nms(const std::vector<Detection>& dets,
                               double iou_threshold, Frame frame) {
  const std::vector<int> order = score_order(dets);
  std::vector<char> suppressed(dets.size(), 0);
  std::vector<Detection> kept;
  kept.reserve(dets.size());

  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const int i = order[oi];
    if (suppressed[i]) continue;
    kept.push_back(dets[i]);
    const Detection& top = dets[i];
    const std::size_t remaining = order.size() - oi - 1;
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < remaining; ++k) {
      const int j = order[oi + 1 + k];
      if (suppressed[j] || dets[j].box.class_id != top.box.class_id) continue;
      if (bev_rotated_iou(top.box, dets[j].box, frame) > iou_threshold) {
        suppressed[j] = 1;
      }
    }
  }
  return kept;
}

std::vector<Detection> bev_nms_serial(const std::vector<Detection>& dets,
                                      double iou_threshold, Frame frame) {
  const std::vector<int> order = score_order(dets);
  std::vector<char> suppressed(dets.size(), 0);
  std::vector<Detection> kept;
  kept.reserve(dets.size());

  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const int i = order[oi];
    if (suppressed[i]) continue;
    kept.push_back(dets[i]);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const int j = order[oj];
      if (suppressed[j] || dets[j].box.class_id != dets[i].box.class_id) {
        continue;
      }
      if (bev_rotated_iou(dets[i].box, dets[j].box, frame) > iou_threshold) {
        suppressed[j] = 1;
      }
    }
  }
  return kept;
}

std::vector<Detection> multiview_merge(
    const std::vector<CameraDetections>& per_camera, double iou_threshold) {
  std::vector<Detection> merged;
  for (std::size_t cam = 0; cam < per_camera.size(); ++cam) {
    for (const Detection& det : per_camera[cam].detections) {
      Detection d = det;
      d.box = transform_to_ego(det.box, per_camera[cam].extrinsics);
      d.source_camera = static_cast<int>(cam);
      merged.push_back(std::move(d));
    }
  }
  return bev_nms(merged, iou_threshold, Frame::kEgo);
}

}  // namespace mono3d
