#include "mono3d/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mono3d/errors.hpp"
#include "mono3d/scoring.hpp"

namespace mono3d {

std::vector<FpnLevelSpec> default_fpn_levels() {
  const double inf = std::numeric_limits<double>::infinity();
  return {
      {3, 8, 0.0, 48.0},   {4, 16, 48.0, 96.0},   {5, 32, 96.0, 192.0},
      {6, 64, 192.0, 384.0}, {7, 128, 384.0, inf},
  };
}

FeatureLocations feature_locations(const FpnLevelSpec& level, int image_w,
                                   int image_h) {
  FeatureLocations out;
  out.stride = level.stride;
  out.grid_w = (image_w + level.stride - 1) / level.stride;
  out.grid_h = (image_h + level.stride - 1) / level.stride;
  out.points.reserve(static_cast<std::size_t>(out.grid_w) * out.grid_h);
  const int half = level.stride / 2;
  for (int iy = 0; iy < out.grid_h; ++iy) {
    for (int ix = 0; ix < out.grid_w; ++ix) {
      out.points.emplace_back(level.stride * ix + half, level.stride * iy + half);
    }
  }
  return out;
}

bool level_filter(const Rect2D& rect, const Eigen::Vector2d& location,
                  const FpnLevelSpec& level) {
  const double l = location.x() - rect.x_min;
  const double r = rect.x_max - location.x();
  const double t = location.y() - rect.y_min;
  const double b = rect.y_max - location.y();
  const double m = std::max(std::max(l, r), std::max(t, b));
  return m > level.range_lo && m <= level.range_hi;
}

bool center_sample(const Eigen::Vector2d& location, const ProjectedCenter& pc,
                   int stride, double radius) {
  const double dx = location.x() - pc.u;
  const double dy = location.y() - pc.v;
  return std::sqrt(dx * dx + dy * dy) < radius * stride;
}

int resolve_ambiguity(const std::vector<AmbiguityCandidate>& candidates,
                      const Eigen::Vector2d& location, AssignMode mode) {
  int best = -1;
  double best_key = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    double key;
    if (mode == AssignMode::kDistance) {
      const double dx = location.x() - c.center.u;
      const double dy = location.y() - c.center.v;
      key = dx * dx + dy * dy;
    } else {
      key = c.rect_area;
    }
    if (key < best_key) {
      best_key = key;
      best = c.gt_index;
    }
  }
  return best;
}

namespace {

struct GtGeometry {
  bool valid = false;
  ProjectedCenter center;
  Rect2D rect;
};

struct Precomputed {
  std::vector<GtGeometry> gts;
  int num_behind_camera = 0;
  int num_outside_image = 0;
};

Precomputed precompute(const std::vector<Box3D>& gts,
                       const CameraIntrinsics& K) {
  Precomputed pre;
  pre.gts.resize(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    GtGeometry& g = pre.gts[i];
    try {
      g.center = project_center(gts[i], K);
      g.rect = exterior_rect(gts[i], K);
    } catch (const NonPositiveDepthError&) {
      ++pre.num_behind_camera;
      continue;
    }
    if (g.center.u < 0.0 || g.center.u >= K.image_width || g.center.v < 0.0 ||
        g.center.v >= K.image_height) {
      ++pre.num_outside_image;
      continue;
    }
    g.valid = true;
  }
  return pre;
}

// Candidate scan for one location; streaming argmin over ground truths,
// first (lowest) index winning ties.
void assign_location(const Precomputed& pre, const FpnLevelSpec& level,
                     const Eigen::Vector2d& loc, const AssignConfig& cfg,
                     std::int32_t& out_gt, double& out_centerness) {
  int best = -1;
  double best_key = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < pre.gts.size(); ++g) {
    const GtGeometry& gt = pre.gts[g];
    if (!gt.valid) continue;
    if (!gt.rect.contains(loc.x(), loc.y())) continue;
    if (!level_filter(gt.rect, loc, level)) continue;
    if (!center_sample(loc, gt.center, level.stride, cfg.radius)) continue;

    double key;
    if (cfg.mode == AssignMode::kDistance) {
      const double dx = loc.x() - gt.center.u;
      const double dy = loc.y() - gt.center.v;
      key = dx * dx + dy * dy;
    } else {
      key = gt.rect.area();
    }
    if (key < best_key) {
      best_key = key;
      best = static_cast<int>(g);
    }
  }
  out_gt = best;
  if (best >= 0) {
    const GtGeometry& gt = pre.gts[best];
    const double s = static_cast<double>(level.stride);
    out_centerness = gaussian_centerness((gt.center.u - loc.x()) / s,
                                         (gt.center.v - loc.y()) / s,
                                         cfg.centerness_alpha);
  } else {
    out_centerness = 0.0;
  }
}

AssignmentResult make_empty_result(const CameraIntrinsics& K,
                                   const AssignConfig& cfg) {
  AssignmentResult result;
  result.levels.reserve(cfg.levels.size());
  for (const auto& level : cfg.levels) {
    const FeatureLocations grid =
        feature_locations(level, K.image_width, K.image_height);
    LevelAssignment la;
    la.level_index = level.level_index;
    la.stride = level.stride;
    la.grid_w = grid.grid_w;
    la.grid_h = grid.grid_h;
    la.gt_index.assign(grid.points.size(), -1);
    la.centerness.assign(grid.points.size(), 0.0);
    result.levels.push_back(std::move(la));
  }
  return result;
}

}  // namespace

AssignmentResult assign(const std::vector<Box3D>& gts,
                        const CameraIntrinsics& K, const AssignConfig& cfg) {
  const Precomputed pre = precompute(gts, K);
  AssignmentResult result = make_empty_result(K, cfg);
  result.num_behind_camera = pre.num_behind_camera;
  result.num_outside_image = pre.num_outside_image;

  for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
    const FpnLevelSpec& level = cfg.levels[li];
    LevelAssignment& la = result.levels[li];
    const int half = level.stride / 2;
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < la.grid_h; ++iy) {
      for (int ix = 0; ix < la.grid_w; ++ix) {
        const Eigen::Vector2d loc(level.stride * ix + half,
                                  level.stride * iy + half);
        const std::size_t idx = static_cast<std::size_t>(iy) * la.grid_w + ix;
        assign_location(pre, level, loc, cfg, la.gt_index[idx],
                        la.centerness[idx]);
      }
    }
  }
  return result;
}

AssignmentResult assign_serial(const std::vector<Box3D>& gts,
                               const CameraIntrinsics& K,
                               const AssignConfig& cfg) {
  const Precomputed pre = precompute(gts, K);
  AssignmentResult result = make_empty_result(K, cfg);
  result.num_behind_camera = pre.num_behind_camera;
  result.num_outside_image = pre.num_outside_image;

  for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
    const FpnLevelSpec& level = cfg.levels[li];
    LevelAssignment& la = result.levels[li];
    const FeatureLocations grid =
        feature_locations(level, K.image_width, K.image_height);
    for (std::size_t idx = 0; idx < grid.points.size(); ++idx) {
      assign_location(pre, level, grid.points[idx], cfg, la.gt_index[idx],
                      la.centerness[idx]);
    }
  }
  return result;
}

BprReport compute_bpr(const std::vector<Box3D>& gts,
                      const AssignmentResult& result) {
  std::vector<char> recalled(gts.size(), 0);
  for (const auto& level : result.levels) {
    for (std::int32_t g : level.gt_index) {
      if (g >= 0 && static_cast<std::size_t>(g) < recalled.size()) {
        recalled[g] = 1;
      }
    }
  }
  BprReport report;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    auto& cls = report.per_class[gts[i].class_id];
    ++cls.total;
    ++report.overall.total;
    if (recalled[i]) {
      ++cls.recalled;
      ++report.overall.recalled;
    }
  }
  return report;
}

}  // namespace mono3d
