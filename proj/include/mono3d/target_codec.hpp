#ifndef MONO3D_TARGET_CODEC_HPP_
#define MONO3D_TARGET_CODEC_HPP_

#include <set>
#include <vector>

#include "mono3d/geometry.hpp"

namespace mono3d {

// Dense per-location regression target. Offsets are raw image pixels from
// the location to the projected box center; depth and sizes are regressed
// in log space and decoded with exp; yaw is reduced to [0, pi) plus a 2-way
// direction class. `centerness` is filled by the assignment step.
struct RegressionTarget {
  double delta_x = 0.0;
  double delta_y = 0.0;
  double depth_log = 0.0;
  Eigen::Vector3d size_log{0.0, 0.0, 0.0};  // ln(w), ln(l), ln(h)
  double theta_bin = 0.0;                   // [0, pi)
  int dir_class = 0;                        // {0, 1}
  Eigen::Vector2d velocity{0.0, 0.0};
  double centerness = 0.0;
};

struct EncodedRotation {
  double theta_bin = 0.0;
  int dir_class = 0;
};

// Per-level multipliers applied to the offset, depth and size channels
// before decoding. Levels without an entry decode with unit scales.
struct LevelScales {
  struct Triple {
    double offset = 1.0;
    double depth = 1.0;
    double size = 1.0;
  };
  // Indexed by pyramid level (e.g. 3..7). Missing levels fall back to unit.
  std::vector<std::pair<int, Triple>> per_level;

  Triple at(int level) const {
    for (const auto& [lvl, t] : per_level) {
      if (lvl == level) return t;
    }
    return Triple{};
  }
};

// Reduce a yaw to its period-pi bin plus a direction class; a box and the
// same box rotated by pi share the bin and differ only in the class.
EncodedRotation encode_rotation(double theta);

// Inverse of encode_rotation, into (-pi, pi]. Throws InvalidBinError for a
// bin outside [0, pi).
double decode_rotation(double theta_bin, int dir_class);

// Build the dense regression target for `box` seen from `location`
// (pixels). Throws NonPositiveDepthError when the box center is not in
// front of the camera.
RegressionTarget encode_targets(const Box3D& box, const CameraIntrinsics& K,
                                const Eigen::Vector2d& location);

// Decode raw regression outputs at `location` back to a camera-frame box.
// A raw theta channel is reduced into [0, pi) before direction decoding.
Box3D decode_prediction(const RegressionTarget& raw,
                        const Eigen::Vector2d& location,
                        const CameraIntrinsics& K,
                        const LevelScales& scales = {}, int level = 0);

// Horizontal image flip of a camera-frame box: the projected center u maps
// to image_width - 1 - u at the same depth, yaw and the lateral velocity
// are negated.
Box3D flip_box(const Box3D& box, const CameraIntrinsics& K, int image_width);

// Flip rule for the dense offset channel: only the horizontal offset
// changes sign.
inline double flip_offset(double delta_x) { return -delta_x; }

// Dense per-location score maps for one pyramid level, row-major
// (y * width + x), with per-location channel blocks where noted.
struct LevelScoreMap {
  int level = 3;
  int width = 0;
  int height = 0;
  int num_classes = 0;
  int num_attributes = 0;
  std::vector<double> class_scores;  // height*width*num_classes
  std::vector<double> attr_scores;   // height*width*num_attributes
  std::vector<double> delta_x;       // height*width
  std::vector<double> delta_y;
  std::vector<double> depth_log;
  std::vector<double> size_log;    // height*width*3
  std::vector<double> theta_bin;   // height*width
  std::vector<double> dir_scores;  // height*width*2
  std::vector<double> velocity;    // height*width*2
  std::vector<double> centerness;  // height*width
};

struct ScoreMaps {
  std::vector<LevelScoreMap> levels;
};

enum class MapChannel {
  kClass,
  kAttribute,
  kOffset,
  kDepth,
  kSize,
  kTheta,
  kDirection,
  kVelocity,
  kCenterness,
};

// Rotation and velocity channels are too pose-sensitive to average across
// augmented views, so they are excluded by default.
inline std::set<MapChannel> default_tta_exclude() {
  return {MapChannel::kTheta, MapChannel::kDirection, MapChannel::kVelocity};
}

// Element-wise mean of spatially aligned score maps. Channels in `exclude`
// are copied from the first map instead of averaged. Throws
// ShapeMismatchError when the maps disagree on levels, shapes or channel
// counts.
ScoreMaps tta_average(const std::vector<ScoreMaps>& maps,
                      const std::set<MapChannel>& exclude = default_tta_exclude());

}  // namespace mono3d

#endif  // MONO3D_TARGET_CODEC_HPP_
