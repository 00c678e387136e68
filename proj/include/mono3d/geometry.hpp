#ifndef MONO3D_GEOMETRY_HPP_
#define MONO3D_GEOMETRY_HPP_

#include <Eigen/Dense>
#include <array>
#include <optional>

namespace mono3d {

inline constexpr double kPi = 3.14159265358979323846;

// Two axis conventions are used throughout:
//
//   kCamera: x right, y down, z forward. Depth is z, the ground plane is
//            (x, z) and "up" is -y. Heading at yaw 0 points along +z.
//   kEgo:    x forward, y left, z up. The ground plane is (x, y) and
//            heading at yaw 0 points along +x.
//
// In both conventions yaw rotates the footprint counterclockwise when the
// ground plane is viewed from above, and is kept normalized to (-pi, pi].
enum class Frame { kCamera, kEgo };

// 7-DoF box: center, size (w, l, h), yaw about the vertical axis, plus a
// ground-plane velocity and category/attribute labels. `size` components
// must be strictly positive. Width spans the lateral axis, length the
// heading axis, height the vertical axis.
struct Box3D {
  Eigen::Vector3d center{0.0, 0.0, 0.0};
  Eigen::Vector3d size{1.0, 1.0, 1.0};  // (w, l, h)
  double yaw = 0.0;
  Eigen::Vector2d velocity{0.0, 0.0};  // ground-plane components
  int class_id = 0;
  std::optional<int> attribute_id;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int image_width = 0;
  int image_height = 0;
};

// Rigid transform p_out = rotation * p_in + translation between two frames
// of the same axis convention.
struct CameraExtrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation{0.0, 0.0, 0.0};

  bool is_valid_rotation(double tol = 1e-9) const;
  CameraExtrinsics inverse() const;
};

// 2.5D center: image location of the projected box center plus its depth.
struct ProjectedCenter {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

struct Rect2D {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool contains(double px, double py) const {
    return px >= x_min && px <= x_max && py >= y_min && py <= y_max;
  }
};

// A scored box. For NMS and evaluation the box lives in the frame declared
// by the surrounding dataset; `source_camera` tags the view a detection
// came from in multi-view scenes (-1 when not applicable).
struct Detection {
  Box3D box;
  double score = 0.0;
  int source_camera = -1;
};

// Normalize an angle to (-pi, pi].
double wrap_pi(double angle);

// Ground-plane components of a 3D point: (x, z) in kCamera, (x, y) in kEgo.
Eigen::Vector2d ground_coords(const Eigen::Vector3d& p, Frame frame);

// Unit heading of a box footprint in ground coordinates.
Eigen::Vector2d heading_dir(double yaw, Frame frame);

// Unit lateral (width) direction, 90 degrees clockwise from the heading.
Eigen::Vector2d lateral_dir(double yaw, Frame frame);

// Pinhole projection of the box center. Throws NonPositiveDepthError when
// the center is at or behind the camera plane.
ProjectedCenter project_center(const Box3D& box, const CameraIntrinsics& K);

// Inverse of project_center for a known depth.
Eigen::Vector3d back_project(double u, double v, double depth,
                             const CameraIntrinsics& K);

// Footprint corners in ground coordinates, counterclockwise.
std::array<Eigen::Vector2d, 4> footprint_corners(const Box3D& box, Frame frame);

// The 8 box corners: bottom footprint then top footprint, both
// counterclockwise when viewed from above.
std::array<Eigen::Vector3d, 8> corners_3d(const Box3D& box,
                                          Frame frame = Frame::kCamera);

// Axis-aligned image rectangle enclosing the 8 projected corners. Throws
// NonPositiveDepthError when any corner is at or behind the camera plane.
Rect2D exterior_rect(const Box3D& box, const CameraIntrinsics& K);

// IoU of the two boxes after aligning translation and orientation; depends
// only on the sizes.
double aligned_iou_3d(const Box3D& a, const Box3D& b);

// IoU of the yaw-rotated footprints in the ground plane, via convex
// polygon clipping. Degenerate overlap returns 0.
double bev_rotated_iou(const Box3D& a, const Box3D& b,
                       Frame frame = Frame::kEgo);

// Apply a rigid transform to a box between two frames that share the kEgo
// convention. The yaw is re-extracted from the rotated heading projected
// onto the ground plane, so small pitch/roll components of the rotation are
// tolerated; the velocity is rotated the same way.
Box3D transform_to_ego(const Box3D& box, const CameraExtrinsics& ext);

// Relabel a kCamera-convention box into the kEgo convention (same physical
// pose: ego x = camera z, ego y = -camera x, ego z = -camera y). Yaw is
// unchanged by this relabeling; velocity components are permuted.
Box3D camera_axes_to_ego(const Box3D& box);
Box3D ego_axes_to_camera(const Box3D& box);

// Ground-plane distance between two box centers.
double ground_distance(const Box3D& a, const Box3D& b, Frame frame);

}  // namespace mono3d

#endif  // MONO3D_GEOMETRY_HPP_
