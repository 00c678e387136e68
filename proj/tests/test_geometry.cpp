#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mono3d/errors.hpp"
#include "mono3d/geometry.hpp"
#include "test_util.hpp"

using namespace mono3d;
using testutil::default_intrinsics;
using testutil::random_frustum_box;

namespace {

// Independent corner construction: rotate the local half-extents with a
// full rotation matrix about the vertical axis.
std::array<Eigen::Vector3d, 8> oracle_corners_camera(const Box3D& box) {
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  // Rotation about the "up" axis (-y) by yaw.
  Eigen::Matrix3d rot;
  rot << c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c;
  std::array<Eigen::Vector3d, 8> out;
  int k = 0;
  for (double sy : {+0.5, -0.5}) {
    for (double sx : {+0.5, -0.5}) {
      for (double sz : {+0.5, -0.5}) {
        const Eigen::Vector3d local(sx * box.size.x(), sy * box.size.z(),
                                    sz * box.size.y());
        out[k++] = box.center + rot * local;
      }
    }
  }
  return out;
}

bool same_corner_set(std::array<Eigen::Vector3d, 8> a,
                     std::array<Eigen::Vector3d, 8> b, double tol) {
  for (const auto& pa : a) {
    bool found = false;
    for (const auto& pb : b) {
      if ((pa - pb).norm() <= tol) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

double footprint_area_shoelace(const std::array<Eigen::Vector2d, 4>& poly) {
  double twice = 0.0;
  for (int i = 0; i < 4; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % 4];
    twice += p.x() * q.y() - p.y() * q.x();
  }
  return std::abs(twice) / 2.0;
}

}  // namespace

TEST_CASE("wrap_pi normalizes into (-pi, pi]") {
  CHECK(wrap_pi(0.0) == 0.0);
  CHECK(wrap_pi(kPi) == doctest::Approx(kPi));
  CHECK(wrap_pi(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_pi(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
  CHECK(wrap_pi(-3.0 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_pi(7.0) == doctest::Approx(7.0 - 2.0 * kPi));
}

TEST_CASE("project_center basics") {
  const CameraIntrinsics K = default_intrinsics();

  Box3D box;
  box.center = {0.0, 0.0, 10.0};
  ProjectedCenter pc = project_center(box, K);
  CHECK(pc.u == doctest::Approx(800.0));
  CHECK(pc.v == doctest::Approx(450.0));
  CHECK(pc.depth == doctest::Approx(10.0));

  box.center = {1.0, 0.0, 10.0};
  pc = project_center(box, K);
  CHECK(pc.u == doctest::Approx(900.0));
  CHECK(pc.v == doctest::Approx(450.0));
}

TEST_CASE("project_center matches a hand-rolled pinhole formula") {
  const CameraIntrinsics K = default_intrinsics();
  Box3D box;
  box.center = {0.37, -0.52, 7.3};
  const ProjectedCenter pc = project_center(box, K);
  // Same equation written out: u = fx*x/z + cx, v = fy*y/z + cy.
  const double expect_u = 1000.0 * 0.37 / 7.3 + 800.0;
  const double expect_v = 1000.0 * (-0.52) / 7.3 + 450.0;
  CHECK(pc.u == doctest::Approx(expect_u).epsilon(1e-12));
  CHECK(pc.v == doctest::Approx(expect_v).epsilon(1e-12));
  CHECK(pc.depth == 7.3);
}

TEST_CASE("project_center rejects non-positive depth") {
  const CameraIntrinsics K = default_intrinsics();
  Box3D box;
  box.center = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(project_center(box, K), NonPositiveDepthError);
  box.center = {0.0, 0.0, -3.0};
  CHECK_THROWS_AS(project_center(box, K), NonPositiveDepthError);
}

TEST_CASE("back_project inverts project_center") {
  const CameraIntrinsics K = default_intrinsics();
  Rng rng(101);
  for (int i = 0; i < 1000; ++i) {
    const Box3D box = random_frustum_box(rng);
    const ProjectedCenter pc = project_center(box, K);
    const Eigen::Vector3d recovered = back_project(pc.u, pc.v, pc.depth, K);
    CHECK((recovered - box.center).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("corners_3d: axis-aligned unit cube") {
  Box3D box;
  box.center = {0.0, 0.0, 0.0};
  box.size = {1.0, 1.0, 1.0};
  const auto corners = corners_3d(box, Frame::kCamera);
  for (const auto& c : corners) {
    CHECK(std::abs(std::abs(c.x()) - 0.5) < 1e-12);
    CHECK(std::abs(std::abs(c.y()) - 0.5) < 1e-12);
    CHECK(std::abs(std::abs(c.z()) - 0.5) < 1e-12);
  }

  // A quarter turn maps the cube onto itself.
  Box3D turned = box;
  turned.yaw = kPi / 2.0;
  CHECK(same_corner_set(corners_3d(turned, Frame::kCamera), corners, 1e-12));
}

TEST_CASE("corners_3d matches independent rotation for a yawed box") {
  Box3D box;
  box.center = {1.0, -0.5, 8.0};
  box.size = {2.0, 4.0, 1.0};
  box.yaw = kPi / 4.0;
  CHECK(same_corner_set(corners_3d(box, Frame::kCamera),
                        oracle_corners_camera(box), 1e-12));

  Rng rng(102);
  for (int i = 0; i < 50; ++i) {
    const Box3D b = random_frustum_box(rng);
    CHECK(same_corner_set(corners_3d(b, Frame::kCamera),
                          oracle_corners_camera(b), 1e-9));
  }
}

TEST_CASE("corners_3d: footprint area and vertical extent") {
  Rng rng(103);
  for (int i = 0; i < 200; ++i) {
    const Box3D box = random_frustum_box(rng);
    for (const Frame frame : {Frame::kCamera, Frame::kEgo}) {
      const auto fp = footprint_corners(box, frame);
      CHECK(footprint_area_shoelace(fp) ==
            doctest::Approx(box.size.x() * box.size.y()).epsilon(1e-9));

      const auto corners = corners_3d(box, frame);
      double lo = 1e30, hi = -1e30;
      for (const auto& c : corners) {
        const double vert = frame == Frame::kCamera ? c.y() : c.z();
        lo = std::min(lo, vert);
        hi = std::max(hi, vert);
      }
      CHECK(hi - lo == doctest::Approx(box.size.z()).epsilon(1e-9));
    }
  }
}

TEST_CASE("exterior_rect encloses projected corners and the center") {
  const CameraIntrinsics K = default_intrinsics();

  Box3D cube;
  cube.center = {0.0, 0.0, 10.0};
  cube.size = {1.0, 1.0, 1.0};
  const Rect2D rect = exterior_rect(cube, K);

  // Independent check: project the oracle corners and take their bounds.
  double u_min = 1e30, u_max = -1e30, v_min = 1e30, v_max = -1e30;
  for (const auto& c : oracle_corners_camera(cube)) {
    const double u = K.fx * c.x() / c.z() + K.cx;
    const double v = K.fy * c.y() / c.z() + K.cy;
    u_min = std::min(u_min, u);
    u_max = std::max(u_max, u);
    v_min = std::min(v_min, v);
    v_max = std::max(v_max, v);
  }
  CHECK(rect.x_min == doctest::Approx(u_min).epsilon(1e-12));
  CHECK(rect.x_max == doctest::Approx(u_max).epsilon(1e-12));
  CHECK(rect.y_min == doctest::Approx(v_min).epsilon(1e-12));
  CHECK(rect.y_max == doctest::Approx(v_max).epsilon(1e-12));

  const ProjectedCenter pc = project_center(cube, K);
  CHECK(rect.contains(pc.u, pc.v));
}

TEST_CASE("exterior_rect scales linearly with the intrinsics") {
  CameraIntrinsics K = default_intrinsics();
  Rng rng(104);
  for (int i = 0; i < 50; ++i) {
    const Box3D box = random_frustum_box(rng);
    const Rect2D r1 = exterior_rect(box, K);
    CameraIntrinsics K2 = K;
    K2.fx *= 2.0;
    K2.fy *= 2.0;
    K2.cx *= 2.0;
    K2.cy *= 2.0;
    const Rect2D r2 = exterior_rect(box, K2);
    CHECK(r2.x_min == doctest::Approx(2.0 * r1.x_min).epsilon(1e-9));
    CHECK(r2.x_max == doctest::Approx(2.0 * r1.x_max).epsilon(1e-9));
    CHECK(r2.y_min == doctest::Approx(2.0 * r1.y_min).epsilon(1e-9));
    CHECK(r2.y_max == doctest::Approx(2.0 * r1.y_max).epsilon(1e-9));
  }
}

TEST_CASE("exterior_rect contains every sampled surface point") {
  const CameraIntrinsics K = default_intrinsics();
  Rng rng(105);
  const Box3D box = random_frustum_box(rng);
  const Rect2D rect = exterior_rect(box, K);
  const auto corners = corners_3d(box, Frame::kCamera);

  // Faces as corner-index quads (bottom, top, four sides).
  const int faces[6][4] = {{0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4},
                           {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}};
  for (int i = 0; i < 10000; ++i) {
    const int f = rng.uniform_int(0, 5);
    const double a = rng.uniform();
    const double b = rng.uniform();
    const Eigen::Vector3d p = (1 - a) * (1 - b) * corners[faces[f][0]] +
                              a * (1 - b) * corners[faces[f][1]] +
                              a * b * corners[faces[f][2]] +
                              (1 - a) * b * corners[faces[f][3]];
    const double u = K.fx * p.x() / p.z() + K.cx;
    const double v = K.fy * p.y() / p.z() + K.cy;
    CHECK(rect.contains(u, v));
  }
}

TEST_CASE("exterior_rect rejects corners behind the camera") {
  const CameraIntrinsics K = default_intrinsics();
  Box3D box;
  box.center = {0.0, 0.0, 0.4};  // half the box pokes through the image plane
  box.size = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(exterior_rect(box, K), NonPositiveDepthError);
}

TEST_CASE("aligned_iou_3d closed forms") {
  Box3D a, b;
  a.size = {1.0, 2.0, 3.0};
  b.size = {1.0, 2.0, 3.0};
  CHECK(aligned_iou_3d(a, b) == doctest::Approx(1.0));

  a.size = {1.0, 1.0, 1.0};
  b.size = {2.0, 2.0, 2.0};
  CHECK(aligned_iou_3d(a, b) == doctest::Approx(1.0 / 8.0));

  a.size = {1.0, 2.0, 3.0};
  b.size = {2.0, 1.0, 3.0};
  CHECK(aligned_iou_3d(a, b) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("aligned_iou_3d properties") {
  Rng rng(106);
  for (int i = 0; i < 200; ++i) {
    Box3D a = random_frustum_box(rng);
    Box3D b = random_frustum_box(rng);
    const double iou = aligned_iou_3d(a, b);
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
    CHECK(iou == doctest::Approx(aligned_iou_3d(b, a)));
    const bool same_size = (a.size - b.size).cwiseAbs().maxCoeff() == 0.0;
    CHECK((iou == 1.0) == same_size);
  }
}

TEST_CASE("bev_rotated_iou basics") {
  Box3D a;
  a.center = {3.0, 2.0, 1.0};
  a.size = {1.5, 3.5, 1.5};
  a.yaw = 0.7;
  CHECK(bev_rotated_iou(a, a) == doctest::Approx(1.0));

  Box3D far = a;
  far.center.x() += 100.0;
  CHECK(bev_rotated_iou(a, far) == 0.0);
}

TEST_CASE("bev_rotated_iou degenerate and containment cases") {
  // Edge-adjacent squares intersect in a line segment: zero area.
  Box3D a, b;
  a.size = {1.0, 1.0, 1.0};
  b.size = {1.0, 1.0, 1.0};
  b.center = {1.0, 0.0, 0.0};
  CHECK(bev_rotated_iou(a, b, Frame::kEgo) == 0.0);

  // Full containment: intersection equals the smaller footprint.
  Box3D inner;
  inner.size = {0.5, 0.5, 1.0};
  inner.yaw = 0.3;
  CHECK(bev_rotated_iou(a, inner, Frame::kEgo) ==
        doctest::Approx(0.25 / 1.0).epsilon(1e-12));
}

TEST_CASE("bev_rotated_iou: square vs 45-degree square vs Monte Carlo") {
  Box3D a, b;
  a.size = {1.0, 1.0, 1.0};
  b.size = {1.0, 1.0, 1.0};
  b.yaw = kPi / 4.0;
  const double iou = bev_rotated_iou(a, b, Frame::kEgo);
  const double mc =
      testutil::monte_carlo_bev_iou(a, b, Frame::kEgo, 1000000, 107);
  CHECK(std::abs(iou - mc) < 1e-2);
}

TEST_CASE("bev_rotated_iou: symmetry and rigid invariance") {
  Rng rng(108);
  for (int i = 0; i < 100; ++i) {
    Box3D a = random_frustum_box(rng);
    Box3D b = random_frustum_box(rng);
    // Pull the footprints near each other so overlap is common.
    b.center.x() = a.center.x() + rng.uniform(-2.0, 2.0);
    b.center.z() = a.center.z() + rng.uniform(-2.0, 2.0);

    const double iou = bev_rotated_iou(a, b, Frame::kCamera);
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
    CHECK(bev_rotated_iou(b, a, Frame::kCamera) == doctest::Approx(iou).epsilon(1e-12));

    // Common rigid motion of the ground plane: rotate both yaws and spin the
    // centers about the origin, in ego axes.
    const double phi = rng.uniform(-kPi, kPi);
    const Eigen::Vector2d shift(rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0));
    auto moved = [&](Box3D box) {
      const Eigen::Vector2d g(box.center.x(), box.center.y());
      const Eigen::Vector2d r(std::cos(phi) * g.x() - std::sin(phi) * g.y(),
                              std::sin(phi) * g.x() + std::cos(phi) * g.y());
      box.center.x() = r.x() + shift.x();
      box.center.y() = r.y() + shift.y();
      box.yaw = wrap_pi(box.yaw + phi);
      return box;
    };
    const double iou_ego = bev_rotated_iou(a, b, Frame::kEgo);
    CHECK(bev_rotated_iou(moved(a), moved(b), Frame::kEgo) ==
          doctest::Approx(iou_ego).epsilon(1e-9));
  }
}

TEST_CASE("transform_to_ego basics") {
  Box3D box;
  box.center = {4.0, -2.0, 0.8};
  box.size = {2.0, 4.5, 1.6};
  box.yaw = 0.6;
  box.velocity = {3.0, -1.0};

  SUBCASE("identity") {
    const Box3D out = transform_to_ego(box, CameraExtrinsics{});
    CHECK((out.center - box.center).norm() < 1e-12);
    CHECK(out.yaw == doctest::Approx(box.yaw).epsilon(1e-12));
    CHECK((out.velocity - box.velocity).norm() < 1e-12);
    CHECK((out.size - box.size).norm() == 0.0);
  }

  SUBCASE("pure translation") {
    CameraExtrinsics ext;
    ext.translation = {10.0, -3.0, 1.5};
    const Box3D out = transform_to_ego(box, ext);
    CHECK((out.center - (box.center + ext.translation)).norm() < 1e-12);
    CHECK(out.yaw == doctest::Approx(box.yaw).epsilon(1e-12));
    CHECK((out.velocity - box.velocity).norm() < 1e-12);
  }

  SUBCASE("quarter turn in the ground plane") {
    CameraExtrinsics ext;
    ext.rotation =
        Eigen::AngleAxisd(kPi / 2.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    const Box3D out = transform_to_ego(box, ext);
    // Independent matrix application.
    const Eigen::Vector3d expect = ext.rotation * box.center;
    CHECK((out.center - expect).norm() < 1e-12);
    CHECK(out.yaw == doctest::Approx(wrap_pi(box.yaw + kPi / 2.0)).epsilon(1e-12));
    const Eigen::Vector3d v =
        ext.rotation * Eigen::Vector3d(box.velocity.x(), box.velocity.y(), 0.0);
    CHECK(out.velocity.x() == doctest::Approx(v.x()).epsilon(1e-12));
    CHECK(out.velocity.y() == doctest::Approx(v.y()).epsilon(1e-12));
  }
}

TEST_CASE("transform_to_ego composed with its inverse is the identity") {
  Rng rng(109);
  for (int i = 0; i < 200; ++i) {
    Box3D box = random_frustum_box(rng);
    CameraExtrinsics ext;
    ext.rotation = Eigen::AngleAxisd(rng.uniform(-kPi, kPi),
                                     Eigen::Vector3d::UnitZ())
                       .toRotationMatrix();
    ext.translation = {rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0),
                       rng.uniform(-2.0, 2.0)};
    const Box3D there = transform_to_ego(box, ext);
    const Box3D back = transform_to_ego(there, ext.inverse());
    CHECK((back.center - box.center).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(wrap_pi(back.yaw - box.yaw)) < 1e-9);
    CHECK((back.velocity - box.velocity).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("transform_to_ego tolerates small pitch and roll") {
  Box3D box;
  box.center = {10.0, 5.0, 1.0};
  box.yaw = 1.1;
  box.velocity = {2.0, 0.5};
  CameraExtrinsics ext;
  ext.rotation = (Eigen::AngleAxisd(0.9, Eigen::Vector3d::UnitZ()) *
                  Eigen::AngleAxisd(0.02, Eigen::Vector3d::UnitY()) *
                  Eigen::AngleAxisd(-0.015, Eigen::Vector3d::UnitX()))
                     .toRotationMatrix();
  ext.translation = {1.0, -2.0, 0.3};
  REQUIRE(ext.is_valid_rotation(1e-12));

  const Box3D out = transform_to_ego(box, ext);
  CHECK(std::abs(wrap_pi(out.yaw - (box.yaw + 0.9))) < 0.03);
  const Box3D back = transform_to_ego(out, ext.inverse());
  CHECK((back.center - box.center).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(wrap_pi(back.yaw - box.yaw)) < 1e-3);
}

TEST_CASE("camera/ego axis relabeling preserves the physical pose") {
  Rng rng(110);
  for (int i = 0; i < 200; ++i) {
    const Box3D cam = random_frustum_box(rng);
    const Box3D ego = camera_axes_to_ego(cam);

    // Same point set: relabeled corners must coincide.
    const auto cam_corners = corners_3d(cam, Frame::kCamera);
    const auto ego_corners = corners_3d(ego, Frame::kEgo);
    for (int k = 0; k < 8; ++k) {
      bool found = false;
      const Eigen::Vector3d mapped(cam_corners[k].z(), -cam_corners[k].x(),
                                   -cam_corners[k].y());
      for (int j = 0; j < 8; ++j) {
        if ((mapped - ego_corners[j]).norm() < 1e-9) {
          found = true;
          break;
        }
      }
      CHECK(found);
    }

    const Box3D round = ego_axes_to_camera(ego);
    CHECK((round.center - cam.center).norm() < 1e-12);
    CHECK(round.yaw == cam.yaw);
    CHECK((round.velocity - cam.velocity).norm() < 1e-12);
  }
}

TEST_CASE("extrinsics validation") {
  CameraExtrinsics ext;
  CHECK(ext.is_valid_rotation());
  ext.rotation(0, 0) = 1.1;
  CHECK_FALSE(ext.is_valid_rotation());

  // Reflection: orthonormal but determinant -1.
  CameraExtrinsics mirror;
  mirror.rotation = Eigen::Vector3d(1.0, 1.0, -1.0).asDiagonal();
  CHECK_FALSE(mirror.is_valid_rotation());
}
