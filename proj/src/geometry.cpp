#include "mono3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mono3d/errors.hpp"

namespace mono3d {

namespace {

// Vertices closer than this are merged when clipping footprints.
constexpr double kVertexMergeTol = 1e-12;

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    twice += cross2(p, q);
  }
  return std::abs(twice) * 0.5;
}

void merge_close_vertices(std::vector<Eigen::Vector2d>& poly) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(poly.size());
  for (const auto& p : poly) {
    if (out.empty() || (p - out.back()).norm() > kVertexMergeTol) {
      out.push_back(p);
    }
  }
  while (out.size() > 1 && (out.front() - out.back()).norm() <= kVertexMergeTol) {
    out.pop_back();
  }
  poly = std::move(out);
}

// Sutherland-Hodgman clip of a convex subject polygon against one directed
// edge (a, b); points on the left side (counterclockwise interior) are kept.
std::vector<Eigen::Vector2d> clip_edge(const std::vector<Eigen::Vector2d>& poly,
                                       const Eigen::Vector2d& a,
                                       const Eigen::Vector2d& b) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(poly.size() + 2);
  const Eigen::Vector2d dir = b - a;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& s = poly[i];
    const Eigen::Vector2d& e = poly[(i + 1) % poly.size()];
    const double ds = cross2(dir, s - a);
    const double de = cross2(dir, e - a);
    if (ds >= 0.0) out.push_back(s);
    if ((ds > 0.0 && de < 0.0) || (ds < 0.0 && de > 0.0)) {
      const double t = ds / (ds - de);
      out.push_back(s + t * (e - s));
    }
  }
  return out;
}

}  // namespace

double wrap_pi(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a <= -kPi) {
    a += 2.0 * kPi;
  } else if (a > kPi) {
    a -= 2.0 * kPi;
  }
  return a;
}

bool CameraExtrinsics::is_valid_rotation(double tol) const {
  const Eigen::Matrix3d err =
      rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  return err.cwiseAbs().maxCoeff() <= tol &&
         std::abs(rotation.determinant() - 1.0) <= tol;
}

CameraExtrinsics CameraExtrinsics::inverse() const {
  CameraExtrinsics inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(rotation.transpose() * translation);
  return inv;
}

Eigen::Vector2d ground_coords(const Eigen::Vector3d& p, Frame frame) {
  return frame == Frame::kCamera ? Eigen::Vector2d(p.x(), p.z())
                                 : Eigen::Vector2d(p.x(), p.y());
}

Eigen::Vector2d heading_dir(double yaw, Frame frame) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return frame == Frame::kCamera ? Eigen::Vector2d(-s, c)
                                 : Eigen::Vector2d(c, s);
}

Eigen::Vector2d lateral_dir(double yaw, Frame frame) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return frame == Frame::kCamera ? Eigen::Vector2d(c, s)
                                 : Eigen::Vector2d(s, -c);
}

ProjectedCenter project_center(const Box3D& box, const CameraIntrinsics& K) {
  const double z = box.center.z();
  if (z <= 0.0) {
    throw NonPositiveDepthError("box center at or behind the camera plane");
  }
  ProjectedCenter pc;
  pc.u = K.fx * box.center.x() / z + K.cx;
  pc.v = K.fy * box.center.y() / z + K.cy;
  pc.depth = z;
  return pc;
}

Eigen::Vector3d back_project(double u, double v, double depth,
                             const CameraIntrinsics& K) {
  return {(u - K.cx) * depth / K.fx, (v - K.cy) * depth / K.fy, depth};
}

std::array<Eigen::Vector2d, 4> footprint_corners(const Box3D& box, Frame frame) {
  const Eigen::Vector2d c = ground_coords(box.center, frame);
  const Eigen::Vector2d h = heading_dir(box.yaw, frame) * (0.5 * box.size.y());
  const Eigen::Vector2d l = lateral_dir(box.yaw, frame) * (0.5 * box.size.x());
  return {c + h + l, c + h - l, c - h - l, c - h + l};
}

std::array<Eigen::Vector3d, 8> corners_3d(const Box3D& box, Frame frame) {
  const auto fp = footprint_corners(box, frame);
  const double half_h = 0.5 * box.size.z();
  std::array<Eigen::Vector3d, 8> out;
  for (int i = 0; i < 4; ++i) {
    if (frame == Frame::kCamera) {
      // Vertical axis is y (down); the bottom face has the larger y.
      out[i] = {fp[i].x(), box.center.y() + half_h, fp[i].y()};
      out[i + 4] = {fp[i].x(), box.center.y() - half_h, fp[i].y()};
    } else {
      out[i] = {fp[i].x(), fp[i].y(), box.center.z() - half_h};
      out[i + 4] = {fp[i].x(), fp[i].y(), box.center.z() + half_h};
    }
  }
  return out;
}

Rect2D exterior_rect(const Box3D& box, const CameraIntrinsics& K) {
  const auto corners = corners_3d(box, Frame::kCamera);
  Rect2D rect;
  rect.x_min = rect.y_min = std::numeric_limits<double>::infinity();
  rect.x_max = rect.y_max = -std::numeric_limits<double>::infinity();
  for (const auto& c : corners) {
    if (c.z() <= 0.0) {
      throw NonPositiveDepthError("box corner at or behind the camera plane");
    }
    const double u = K.fx * c.x() / c.z() + K.cx;
    const double v = K.fy * c.y() / c.z() + K.cy;
    rect.x_min = std::min(rect.x_min, u);
    rect.x_max = std::max(rect.x_max, u);
    rect.y_min = std::min(rect.y_min, v);
    rect.y_max = std::max(rect.y_max, v);
  }
  return rect;
}

double aligned_iou_3d(const Box3D& a, const Box3D& b) {
  const double inter = std::min(a.size.x(), b.size.x()) *
                       std::min(a.size.y(), b.size.y()) *
                       std::min(a.size.z(), b.size.z());
  const double vol_a = a.size.prod();
  const double vol_b = b.size.prod();
  const double uni = vol_a + vol_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double bev_rotated_iou(const Box3D& a, const Box3D& b, Frame frame) {
  const auto ca = footprint_corners(a, frame);
  const auto cb = footprint_corners(b, frame);

  std::vector<Eigen::Vector2d> poly(ca.begin(), ca.end());
  for (int i = 0; i < 4; ++i) {
    poly = clip_edge(poly, cb[i], cb[(i + 1) % 4]);
    if (poly.empty()) return 0.0;
  }
  merge_close_vertices(poly);

  const double inter = polygon_area(poly);
  const double area_a = a.size.x() * a.size.y();
  const double area_b = b.size.x() * b.size.y();
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Box3D transform_to_ego(const Box3D& box, const CameraExtrinsics& ext) {
  Box3D out = box;
  out.center = ext.rotation * box.center + ext.translation;

  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const Eigen::Vector3d heading = ext.rotation * Eigen::Vector3d(c, s, 0.0);
  out.yaw = std::atan2(heading.y(), heading.x());

  const Eigen::Vector3d vel =
      ext.rotation * Eigen::Vector3d(box.velocity.x(), box.velocity.y(), 0.0);
  out.velocity = {vel.x(), vel.y()};
  return out;
}

Box3D camera_axes_to_ego(const Box3D& box) {
  Box3D out = box;
  out.center = {box.center.z(), -box.center.x(), -box.center.y()};
  out.velocity = {box.velocity.y(), -box.velocity.x()};
  return out;
}

Box3D ego_axes_to_camera(const Box3D& box) {
  Box3D out = box;
  out.center = {-box.center.y(), -box.center.z(), box.center.x()};
  out.velocity = {-box.velocity.y(), box.velocity.x()};
  return out;
}

double ground_distance(const Box3D& a, const Box3D& b, Frame frame) {
  return (ground_coords(a.center, frame) - ground_coords(b.center, frame))
      .norm();
}

}  // namespace mono3d
