#ifndef MONO3D_NMS_HPP_
#define MONO3D_NMS_HPP_

#include <vector>

#include "mono3d/geometry.hpp"

namespace mono3d {

// Greedy class-wise suppression on rotated ground-plane footprints: walk
// detections by descending score (ties keep the earlier input index) and
// drop any same-class detection whose footprint IoU with a kept one
// exceeds `iou_threshold`. The kept list comes back sorted by score
// descending. OpenMP-parallel over the suppression scans.
std::vector<Detection> bev_nms(const std::vector<Detection>& dets,
                               double iou_threshold,
                               Frame frame = Frame::kEgo);

// Single-threaded reference implementation; identical output.
std::vector<Detection> bev_nms_serial(const std::vector<Detection>& dets,
                                      double iou_threshold,
                                      Frame frame = Frame::kEgo);

struct CameraDetections {
  std::vector<Detection> detections;  // in the camera's local frame
  CameraExtrinsics extrinsics;        // local frame -> common ego frame
};

// Cross-view fusion: transform every view's detections into the common ego
// frame, tag them with their source camera, concatenate in camera order and
// suppress duplicates with bev_nms.
std::vector<Detection> multiview_merge(
    const std::vector<CameraDetections>& per_camera, double iou_threshold);

}  // namespace mono3d

#endif  // MONO3D_NMS_HPP_
