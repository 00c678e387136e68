#ifndef MONO3D_ASSIGNMENT_HPP_
#define MONO3D_ASSIGNMENT_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include "mono3d/geometry.hpp"

namespace mono3d {

// One pyramid level: stride in pixels and the (range_lo, range_hi] band of
// 2D extents it regresses. Bands of consecutive levels tile (0, inf).
struct FpnLevelSpec {
  int level_index = 3;
  int stride = 8;
  double range_lo = 0.0;
  double range_hi = 0.0;  // may be +inf
};

// P3..P7 with strides (8, 16, 32, 64, 128) and extent bands
// (0,48], (48,96], (96,192], (192,384], (384,inf).
std::vector<FpnLevelSpec> default_fpn_levels();

enum class AssignMode { kDistance, kArea };

struct AssignConfig {
  AssignMode mode = AssignMode::kDistance;
  double radius = 1.5;            // in stride units
  double centerness_alpha = 2.5;  // gaussian center-ness falloff
  std::vector<FpnLevelSpec> levels = default_fpn_levels();
};

// Location grid of one level, row-major (iy * grid_w + ix). The location of
// cell (ix, iy) is (stride*ix + floor(stride/2), stride*iy + floor(stride/2)).
struct FeatureLocations {
  int stride = 0;
  int grid_w = 0;
  int grid_h = 0;
  std::vector<Eigen::Vector2d> points;
};

FeatureLocations feature_locations(const FpnLevelSpec& level, int image_w,
                                   int image_h);

// True when max(l*, r*, t*, b*) of `location` against `rect` falls in the
// level's band. The location must lie inside the rect.
bool level_filter(const Rect2D& rect, const Eigen::Vector2d& location,
                  const FpnLevelSpec& level);

// True when the location is strictly within radius*stride of the projected
// center.
bool center_sample(const Eigen::Vector2d& location, const ProjectedCenter& pc,
                   int stride, double radius);

struct AmbiguityCandidate {
  int gt_index = 0;
  ProjectedCenter center;
  double rect_area = 0.0;
};

// Pick one ground truth among overlapping candidates: nearest projected
// center (kDistance) or smallest exterior rectangle (kArea). Ties go to the
// lowest ground-truth index.
int resolve_ambiguity(const std::vector<AmbiguityCandidate>& candidates,
                      const Eigen::Vector2d& location, AssignMode mode);

struct LevelAssignment {
  int level_index = 0;
  int stride = 0;
  int grid_w = 0;
  int grid_h = 0;
  std::vector<std::int32_t> gt_index;  // -1 for negatives
  std::vector<double> centerness;      // 0 for negatives
};

struct AssignmentResult {
  std::vector<LevelAssignment> levels;
  int num_behind_camera = 0;   // ground truths skipped: center or corner z <= 0
  int num_outside_image = 0;   // projected center off the image
};

// Distribute ground truths over levels and locations. A location is
// positive for a ground truth when it lies inside the exterior rectangle,
// the rectangle extent matches the level band, and the location passes
// center sampling; overlaps resolve per `cfg.mode`. Ground truths behind
// the camera or projecting off the image are skipped (and counted).
// OpenMP-parallel over grid rows.
AssignmentResult assign(const std::vector<Box3D>& gts,
                        const CameraIntrinsics& K, const AssignConfig& cfg);

// Plain single-pass implementation kept as the reference for tests and the
// benchmark. Produces results identical to assign().
AssignmentResult assign_serial(const std::vector<Box3D>& gts,
                               const CameraIntrinsics& K,
                               const AssignConfig& cfg);

struct BprReport {
  struct Count {
    int total = 0;
    int recalled = 0;
    double fraction() const {
      return total == 0 ? 1.0 : static_cast<double>(recalled) / total;
    }
  };
  Count overall;
  std::map<int, Count> per_class;
};

// Best possible recall: the fraction of ground truths with at least one
// positive location. Empty ground truth sets report 1.0.
BprReport compute_bpr(const std::vector<Box3D>& gts,
                      const AssignmentResult& result);

}  // namespace mono3d

#endif  // MONO3D_ASSIGNMENT_HPP_
