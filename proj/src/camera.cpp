// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/camera.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <set>
#include <sstream>

#include "posecap/errors.hpp"

namespace posecap {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace

Mat3 CameraParams::intrinsic_matrix() const {
  Mat3 K;
  K << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return K;
}

std::optional<std::size_t> CameraRig::index_of(
    const std::string& camera_id) const {
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    if (cameras[i].camera_id == camera_id) return i;
  }
  return std::nullopt;
}

void validate(const CameraParams& cam) {
  const std::string who = "camera '" + cam.camera_id + "'";
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) {
    throw SpecError(who + ": focal lengths must be positive");
  }
  if (cam.width <= 0 || cam.height <= 0) {
    throw SpecError(who + ": image_size must be positive");
  }
  if (!cam.R.allFinite() || !cam.t.allFinite() || !std::isfinite(cam.k1) ||
      !std::isfinite(cam.k2) || !std::isfinite(cam.cx) ||
      !std::isfinite(cam.cy)) {
    throw SpecError(who + ": non-finite parameter");
  }
  if ((cam.R * cam.R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() >
          1e-9 ||
      std::abs(cam.R.determinant() - 1.0) > 1e-9) {
    throw SpecError(who + ": R is not a proper rotation");
  }
}

void validate(const CameraRig& rig) {
  if (rig.cameras.size() < 2) {
    throw ConfigError("rig: at least two cameras required, got " +
                      std::to_string(rig.cameras.size()));
  }
  std::set<std::string> ids;
  for (const auto& cam : rig.cameras) {
    if (!ids.insert(cam.camera_id).second) {
      throw ConfigError("rig: duplicate camera_id '" + cam.camera_id + "'");
    }
    validate(cam);
  }
}

Vec2 distort(const CameraParams& cam, const Vec2& normalized) {
  const double r2 = normalized.squaredNorm();
  return normalized * (1.0 + cam.k1 * r2 + cam.k2 * r2 * r2);
}

Vec2 undistort_normalized(const CameraParams& cam, const Vec2& normalized) {
  Vec2 p = normalized;
  for (int i = 0; i < 10; ++i) {
    const double r2 = p.squaredNorm();
    p = normalized / (1.0 + cam.k1 * r2 + cam.k2 * r2 * r2);
  }
  return p;
}

Vec2 pixel_to_normalized(const CameraParams& cam, const Vec2& pixel) {
  const Vec2 distorted((pixel.x() - cam.cx) / cam.fx,
                       (pixel.y() - cam.cy) / cam.fy);
  if (cam.k1 == 0.0 && cam.k2 == 0.0) return distorted;
  return undistort_normalized(cam, distorted);
}

Vec2 project(const CameraParams& cam, const Vec3& world,
             bool apply_distortion) {
  const Vec3 xc = cam.R * world + cam.t;
  if (!(xc.z() > 0.0)) {
    std::ostringstream msg;
    msg << "point (" << world.transpose() << ") is behind camera '"
        << cam.camera_id << "'";
    throw BehindCameraError(msg.str());
  }
  Vec2 n(xc.x() / xc.z(), xc.y() / xc.z());
  if (apply_distortion) n = distort(cam, n);
  return {cam.fx * n.x() + cam.cx, cam.fy * n.y() + cam.cy};
}

ProjectionJacobian project_with_jacobian(const CameraParams& cam,
                                         const Vec3& world) {
  const Vec3 rotated = cam.R * world;
  const Vec3 xc = rotated + cam.t;
  if (!(xc.z() > 0.0)) {
    throw BehindCameraError("point is behind camera '" + cam.camera_id + "'");
  }
  const double iz = 1.0 / xc.z();
  const double x = xc.x() * iz;
  const double y = xc.y() * iz;
  const double r2 = x * x + y * y;
  const double d = 1.0 + cam.k1 * r2 + cam.k2 * r2 * r2;
  const double xd = d * x;
  const double yd = d * y;

  ProjectionJacobian J;
  J.pixel = Vec2(cam.fx * xd + cam.cx, cam.fy * yd + cam.cy);

  J.d_intrinsics << xd, 0.0, 1.0, 0.0, 0.0, yd, 0.0, 1.0;
  J.d_distortion << cam.fx * x * r2, cam.fx * x * r2 * r2, cam.fy * y * r2,
      cam.fy * y * r2 * r2;

  // d(pixel)/d(x, y)
  const double dd = 2.0 * (cam.k1 + 2.0 * cam.k2 * r2);
  Eigen::Matrix2d d_dist;
  d_dist << d + x * x * dd, x * y * dd, x * y * dd, d + y * y * dd;
  Eigen::Matrix2d focal = Eigen::Vector2d(cam.fx, cam.fy).asDiagonal();
  Eigen::Matrix<double, 2, 3> d_norm;
  d_norm << iz, 0.0, -x * iz, 0.0, iz, -y * iz;
  const Eigen::Matrix<double, 2, 3> d_cam = focal * d_dist * d_norm;

  J.d_translation = d_cam;
  J.d_point = d_cam * cam.R;
  J.d_rotation = -d_cam * skew(rotated);
  return J;
}

Mat3 rotation_from_axis_angle(const Vec3& omega) {
  const double angle = omega.norm();
  if (angle < 1e-300) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    D(2, 2) = -1.0;
  }
  return svd.matrixU() * D * svd.matrixV().transpose();
}

}  // namespace posecap
