#include "mono3d/target_codec.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "mono3d/errors.hpp"

namespace mono3d {

EncodedRotation encode_rotation(double theta) {
  const double t = wrap_pi(theta);
  EncodedRotation enc;
  enc.dir_class = (t >= 0.0 && t < kPi) ? 0 : 1;
  enc.theta_bin = t - kPi * std::floor(t / kPi);
  if (enc.theta_bin >= kPi) {
    // t just below 0 can round up to pi; fold it onto the other seam.
    enc.theta_bin = 0.0;
    enc.dir_class ^= 1;
  }
  return enc;
}

double decode_rotation(double theta_bin, int dir_class) {
  if (!(theta_bin >= 0.0 && theta_bin < kPi)) {
    throw InvalidBinError("theta_bin outside [0, pi): " +
                          std::to_string(theta_bin));
  }
  return wrap_pi(dir_class == 0 ? theta_bin : theta_bin + kPi);
}

RegressionTarget encode_targets(const Box3D& box, const CameraIntrinsics& K,
                                const Eigen::Vector2d& location) {
  const ProjectedCenter pc = project_center(box, K);
  RegressionTarget t;
  t.delta_x = pc.u - location.x();
  t.delta_y = pc.v - location.y();
  t.depth_log = std::log(pc.depth);
  t.size_log = box.size.array().log();
  const EncodedRotation rot = encode_rotation(box.yaw);
  t.theta_bin = rot.theta_bin;
  t.dir_class = rot.dir_class;
  t.velocity = box.velocity;
  return t;
}

Box3D decode_prediction(const RegressionTarget& raw,
                        const Eigen::Vector2d& location,
                        const CameraIntrinsics& K, const LevelScales& scales,
                        int level) {
  const LevelScales::Triple s = scales.at(level);

  const double depth = std::exp(s.depth * raw.depth_log);
  const double u = location.x() + s.offset * raw.delta_x;
  const double v = location.y() + s.offset * raw.delta_y;

  Box3D box;
  box.center = back_project(u, v, depth, K);
  box.size = (s.size * raw.size_log.array()).exp();

  double bin = raw.theta_bin - kPi * std::floor(raw.theta_bin / kPi);
  if (bin >= kPi || std::isnan(bin)) bin = 0.0;
  box.yaw = decode_rotation(bin, raw.dir_class != 0 ? 1 : 0);

  box.velocity = raw.velocity;
  return box;
}

Box3D flip_box(const Box3D& box, const CameraIntrinsics& K, int image_width) {
  const ProjectedCenter pc = project_center(box, K);
  const double u_flipped = static_cast<double>(image_width - 1) - pc.u;

  Box3D out = box;
  out.center = back_project(u_flipped, pc.v, pc.depth, K);
  out.yaw = wrap_pi(-box.yaw);
  out.velocity.x() = -box.velocity.x();
  return out;
}

namespace {

void require_same_shape(const LevelScoreMap& a, const LevelScoreMap& b) {
  if (a.level != b.level || a.width != b.width || a.height != b.height ||
      a.num_classes != b.num_classes || a.num_attributes != b.num_attributes) {
    throw ShapeMismatchError("score maps disagree on level shape at level " +
                             std::to_string(a.level));
  }
}

void mean_into(std::vector<double>& acc,
               const std::vector<LevelScoreMap const*>& maps,
               std::vector<double> LevelScoreMap::*field) {
  const std::size_t n = acc.size();
  for (std::size_t m = 1; m < maps.size(); ++m) {
    const std::vector<double>& src = maps[m]->*field;
    if (src.size() != n) {
      throw ShapeMismatchError("score map channel size mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) acc[i] += src[i];
  }
  const double inv = 1.0 / static_cast<double>(maps.size());
  for (std::size_t i = 0; i < n; ++i) acc[i] *= inv;
}

}  // namespace

ScoreMaps tta_average(const std::vector<ScoreMaps>& maps,
                      const std::set<MapChannel>& exclude) {
  if (maps.empty()) {
    throw ShapeMismatchError("tta_average needs at least one score map");
  }
  for (const auto& m : maps) {
    if (m.levels.size() != maps.front().levels.size()) {
      throw ShapeMismatchError("score maps disagree on level count");
    }
  }

  ScoreMaps out = maps.front();
  const bool avg_class = exclude.count(MapChannel::kClass) == 0;
  const bool avg_attr = exclude.count(MapChannel::kAttribute) == 0;
  const bool avg_offset = exclude.count(MapChannel::kOffset) == 0;
  const bool avg_depth = exclude.count(MapChannel::kDepth) == 0;
  const bool avg_size = exclude.count(MapChannel::kSize) == 0;
  const bool avg_theta = exclude.count(MapChannel::kTheta) == 0;
  const bool avg_dir = exclude.count(MapChannel::kDirection) == 0;
  const bool avg_vel = exclude.count(MapChannel::kVelocity) == 0;
  const bool avg_ct = exclude.count(MapChannel::kCenterness) == 0;

  for (std::size_t l = 0; l < out.levels.size(); ++l) {
    std::vector<LevelScoreMap const*> lvl;
    lvl.reserve(maps.size());
    for (const auto& m : maps) {
      require_same_shape(maps.front().levels[l], m.levels[l]);
      lvl.push_back(&m.levels[l]);
    }
    LevelScoreMap& o = out.levels[l];
    if (avg_class) mean_into(o.class_scores, lvl, &LevelScoreMap::class_scores);
    if (avg_attr) mean_into(o.attr_scores, lvl, &LevelScoreMap::attr_scores);
    if (avg_offset) {
      mean_into(o.delta_x, lvl, &LevelScoreMap::delta_x);
      mean_into(o.delta_y, lvl, &LevelScoreMap::delta_y);
    }
    if (avg_depth) mean_into(o.depth_log, lvl, &LevelScoreMap::depth_log);
    if (avg_size) mean_into(o.size_log, lvl, &LevelScoreMap::size_log);
    if (avg_theta) mean_into(o.theta_bin, lvl, &LevelScoreMap::theta_bin);
    if (avg_dir) mean_into(o.dir_scores, lvl, &LevelScoreMap::dir_scores);
    if (avg_vel) mean_into(o.velocity, lvl, &LevelScoreMap::velocity);
    if (avg_ct) mean_into(o.centerness, lvl, &LevelScoreMap::centerness);
  }
  return out;
}

}  // namespace mono3d
