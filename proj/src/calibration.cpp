// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/calibration.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "posecap/errors.hpp"
#include "posecap/triangulation.hpp"

namespace posecap {

namespace {

// Similarity that moves the centroid to the origin and the mean distance to
// sqrt(2).
Mat3 normalizing_transform(const std::vector<Vec2>& pts) {
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double spread = 0.0;
  for (const auto& p : pts) spread += (p - mean).norm();
  spread /= static_cast<double>(pts.size());
  const double s = spread > 0.0 ? std::sqrt(2.0) / spread : 1.0;
  Mat3 T;
  T << s, 0.0, -s * mean.x(), 0.0, s, -s * mean.y(), 0.0, 0.0, 1.0;
  return T;
}

Eigen::Matrix<double, 1, 6> conic_row(const Mat3& H, int i, int j) {
  const Vec3 hi = H.col(i);
  const Vec3 hj = H.col(j);
  Eigen::Matrix<double, 1, 6> v;
  v << hi(0) * hj(0), hi(0) * hj(1) + hi(1) * hj(0), hi(1) * hj(1),
      hi(2) * hj(0) + hi(0) * hj(2), hi(2) * hj(1) + hi(1) * hj(2),
      hi(2) * hj(2);
  return v;
}

std::string view_list(const std::vector<int>& views) {
  std::ostringstream s;
  for (std::size_t i = 0; i < views.size(); ++i) {
    s << (i ? "," : "") << views[i];
  }
  return s.str();
}

}  // namespace

Mat3 estimate_homography(const PlanarView& view) {
  if (view.size() < 4) {
    throw DegeneracyError("homography needs at least 4 correspondences, got " +
                          std::to_string(view.size()));
  }
  std::vector<Vec2> board, pixel;
  for (const auto& c : view) {
    board.push_back(c.board);
    pixel.push_back(c.pixel);
  }
  const Mat3 Tb = normalizing_transform(board);
  const Mat3 Tp = normalizing_transform(pixel);

  Eigen::MatrixXd A(2 * view.size(), 9);
  for (std::size_t i = 0; i < view.size(); ++i) {
    const Vec3 b = Tb * board[i].homogeneous();
    const Vec3 p = Tp * pixel[i].homogeneous();
    const double X = b.x() / b.z(), Y = b.y() / b.z();
    const double u = p.x() / p.z(), v = p.y() / p.z();
    A.row(2 * i) << -X, -Y, -1.0, 0.0, 0.0, 0.0, u * X, u * Y, u;
    A.row(2 * i + 1) << 0.0, 0.0, 0.0, -X, -Y, -1.0, v * X, v * Y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(7) <= 1e-12 * sv(0)) {
    throw DegeneracyError("homography: correspondences are degenerate");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Mat3 Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Mat3 H = Tp.inverse() * Hn * Tb;
  return H / H(2, 2);
}

ZhangEstimate zhang_init(const PlanarObservationSet& obs) {
  std::vector<int> used;
  std::vector<Vec2> all_pixels;
  for (std::size_t v = 0; v < obs.views.size(); ++v) {
    if (obs.views[v].empty()) continue;
    used.push_back(static_cast<int>(v));
    for (const auto& c : obs.views[v]) all_pixels.push_back(c.pixel);
  }
  if (used.size() < 3) {
    throw DegeneracyError("zhang_init: at least 3 non-empty views required, got " +
                          std::to_string(used.size()) + " (views " +
                          view_list(used) + ")");
  }

  // Work in normalized pixel units so the conic system is well scaled.
  const Mat3 N = normalizing_transform(all_pixels);
  std::vector<Mat3> homographies;
  Eigen::MatrixXd V(2 * used.size(), 6);
  for (std::size_t i = 0; i < used.size(); ++i) {
    Mat3 H = N * estimate_homography(obs.views[used[i]]);
    H /= H.norm();
    homographies.push_back(H);
    Eigen::Matrix<double, 1, 6> r1 = conic_row(H, 0, 1);
    Eigen::Matrix<double, 1, 6> r2 = conic_row(H, 0, 0) - conic_row(H, 1, 1);
    V.row(2 * i) = r1 / r1.norm();
    V.row(2 * i + 1) = r2 / r2.norm();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(4) <= 1e-9 * sv(0)) {
    throw DegeneracyError(
        "zhang_init: rank-deficient absolute-conic system (views " +
        view_list(used) + ")");
  }
  Eigen::Matrix<double, 6, 1> b = svd.matrixV().col(5);
  if (b(0) < 0.0) b = -b;
  const double B11 = b(0), B12 = b(1), B22 = b(2), B13 = b(3), B23 = b(4),
               B33 = b(5);
  const double den = B11 * B22 - B12 * B12;
  const double v0 = (B12 * B13 - B11 * B23) / den;
  const double lambda = B33 - (B13 * B13 + v0 * (B12 * B13 - B11 * B23)) / B11;
  if (!(den > 0.0) || !(lambda / B11 > 0.0)) {
    throw DegeneracyError("zhang_init: conic is not positive definite (views " +
                          view_list(used) + ")");
  }
  const double alpha = std::sqrt(lambda / B11);
  const double beta = std::sqrt(lambda * B11 / den);
  const double gamma = -B12 * alpha * alpha * beta / lambda;
  const double u0 = gamma * v0 / beta - B13 * alpha * alpha / lambda;

  Mat3 Kn;
  Kn << alpha, gamma, u0, 0.0, beta, v0, 0.0, 0.0, 1.0;
  const Mat3 K = N.inverse() * Kn;

  ZhangEstimate est;
  est.fx = K(0, 0) / K(2, 2);
  est.fy = K(1, 1) / K(2, 2);
  est.cx = K(0, 2) / K(2, 2);
  est.cy = K(1, 2) / K(2, 2);
  est.extrinsics.assign(obs.views.size(), std::nullopt);

  const Mat3 Kinv = Kn.inverse();
  for (std::size_t i = 0; i < used.size(); ++i) {
    const Mat3& H = homographies[i];
    double scale = 1.0 / (Kinv * H.col(0)).norm();
    Vec3 t = scale * (Kinv * H.col(2));
    if (t.z() < 0.0) {
      scale = -scale;
      t = -t;
    }
    const Vec3 r1 = scale * (Kinv * H.col(0));
    const Vec3 r2 = scale * (Kinv * H.col(1));
    Mat3 R;
    R << r1, r2, r1.cross(r2);
    est.extrinsics[used[i]] = BoardPose{orthonormalize(R), t};
  }
  return est;
}

CameraRig initialize_rig(const std::vector<CameraCalibrationInput>& cameras) {
  if (cameras.size() < 2) {
    throw ConfigError("calibration: at least two cameras required");
  }
  std::vector<ZhangEstimate> est;
  for (const auto& cam : cameras) {
    try {
      est.push_back(zhang_init(cam.planar));
    } catch (const DegeneracyError& e) {
      throw DegeneracyError("camera '" + cam.camera_id + "': " + e.what());
    }
  }

  CameraRig rig;
  rig.cameras.resize(cameras.size());
  std::vector<bool> placed(cameras.size(), false);
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    CameraParams& p = rig.cameras[c];
    p.camera_id = cameras[c].camera_id;
    p.fx = est[c].fx;
    p.fy = est[c].fy;
    p.cx = est[c].cx;
    p.cy = est[c].cy;
    p.width = cameras[c].width;
    p.height = cameras[c].height;
  }

  // World = board frame of the first camera's first visible view.
  const auto& first = est[0].extrinsics;
  for (const auto& pose : first) {
    if (pose) {
      rig.cameras[0].R = pose->R;
      rig.cameras[0].t = pose->t;
      placed[0] = true;
      break;
    }
  }

  std::queue<std::size_t> frontier;
  frontier.push(0);
  while (!frontier.empty()) {
    const std::size_t p = frontier.front();
    frontier.pop();
    for (std::size_t c = 0; c < cameras.size(); ++c) {
      if (placed[c]) continue;
      const std::size_t n_views =
          std::min(est[p].extrinsics.size(), est[c].extrinsics.size());
      for (std::size_t v = 0; v < n_views; ++v) {
        const auto& pv = est[p].extrinsics[v];
        const auto& cv = est[c].extrinsics[v];
        if (!pv || !cv) continue;
        const Mat3 rel = cv->R * pv->R.transpose();
        rig.cameras[c].R =
            orthonormalize(rel * rig.cameras[p].R);
        rig.cameras[c].t = rel * (rig.cameras[p].t - pv->t) + cv->t;
        placed[c] = true;
        frontier.push(c);
        break;
      }
    }
  }
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    if (!placed[c]) {
      throw DegeneracyError("calibration: camera '" + cameras[c].camera_id +
                            "' shares no board view with the other cameras");
    }
  }
  return rig;
}

std::map<int, Vec3> triangulate_observations(
    const CameraRig& rig, const std::vector<Observation3D>& observations) {
  std::map<int, std::vector<RayObservation>> rays;
  for (const auto& o : observations) {
    const auto idx = rig.index_of(o.camera_id);
    if (!idx) {
      throw ConfigError("observation references unknown camera '" +
                        o.camera_id + "'");
    }
    rays[o.point_id].push_back({&rig.cameras[*idx], o.pixel});
  }
  std::map<int, Vec3> points;
  for (const auto& [id, obs] : rays) {
    if (obs.size() < 2) continue;
    points[id] = triangulate_linear(obs).point;
  }
  return points;
}

double mean_reprojection_error(const CameraRig& rig,
                               const std::vector<Observation3D>& observations,
                               const std::map<int, Vec3>& points) {
  if (observations.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& o : observations) {
    const auto idx = rig.index_of(o.camera_id);
    const auto pt = points.find(o.point_id);
    if (!idx || pt == points.end()) {
      throw ConfigError("observation of point " + std::to_string(o.point_id) +
                        " in camera '" + o.camera_id + "' has no estimate");
    }
    sum += (project(rig.cameras[*idx], pt->second) - o.pixel).norm();
  }
  return sum / static_cast<double>(observations.size());
}

namespace {

constexpr int kCamParams = 12;  // fx fy cx cy k1 k2 | omega(3) | t(3)

struct IndexedObservation {
  std::size_t camera;
  std::size_t point;
  Vec2 pixel;
};

double total_cost(const CameraRig& rig, const std::vector<Vec3>& points,
                  const std::vector<IndexedObservation>& obs) {
  double cost = 0.0;
  try {
    for (const auto& o : obs) {
      cost += (project(rig.cameras[o.camera], points[o.point]) - o.pixel)
                  .squaredNorm();
    }
  } catch (const BehindCameraError&) {
    return std::numeric_limits<double>::infinity();
  }
  return cost;
}

void apply_camera_step(CameraParams& cam, const Eigen::VectorXd& d,
                       Eigen::Index offset) {
  cam.fx += d(offset + 0);
  cam.fy += d(offset + 1);
  cam.cx += d(offset + 2);
  cam.cy += d(offset + 3);
  cam.k1 += d(offset + 4);
  cam.k2 += d(offset + 5);
  const Vec3 omega = d.segment<3>(offset + 6);
  if (!omega.isZero(0.0)) {
    cam.R = orthonormalize(rotation_from_axis_angle(omega) * cam.R);
  }
  cam.t += d.segment<3>(offset + 9);
}

}  // namespace

BundleAdjustResult bundle_adjust(const CameraRig& rig,
                                 const std::vector<Observation3D>& observations,
                                 const std::map<int, Vec3>& points,
                                 const FixMask& fix,
                                 const BundleAdjustOptions& options) {
  const std::size_t n_cams = rig.cameras.size();
  std::vector<int> point_ids;
  std::map<int, std::size_t> point_index;
  std::vector<Vec3> pts;
  for (const auto& [id, p] : points) {
    point_index[id] = pts.size();
    point_ids.push_back(id);
    pts.push_back(p);
  }

  std::vector<IndexedObservation> obs;
  std::vector<int> per_camera(n_cams, 0);
  for (const auto& o : observations) {
    const auto c = rig.index_of(o.camera_id);
    if (!c) {
      throw ConfigError("bundle_adjust: unknown camera '" + o.camera_id + "'");
    }
    const auto p = point_index.find(o.point_id);
    if (p == point_index.end()) {
      throw ConfigError("bundle_adjust: no initial estimate for point " +
                        std::to_string(o.point_id));
    }
    obs.push_back({*c, p->second, o.pixel});
    ++per_camera[*c];
  }
  for (std::size_t c = 0; c < n_cams; ++c) {
    if (per_camera[c] < 6) {
      throw ConfigError("bundle_adjust: camera '" + rig.cameras[c].camera_id +
                        "' observes " + std::to_string(per_camera[c]) +
                        " points, at least 6 required");
    }
  }

  // Free-parameter mask over camera blocks.
  std::vector<bool> free_cam(n_cams * kCamParams, true);
  for (std::size_t c = 0; c < n_cams; ++c) {
    for (int k = 0; k < kCamParams; ++k) {
      bool is_free = true;
      if (k < 4 && fix.intrinsics) is_free = false;
      if ((k == 4 || k == 5) && fix.distortion) is_free = false;
      if (k >= 6 && c == 0 && fix.first_camera_pose) is_free = false;
      free_cam[c * kCamParams + k] = is_free;
    }
  }

  BundleAdjustResult result;
  result.rig = rig;
  double cost = total_cost(rig, pts, obs);
  if (!std::isfinite(cost)) {
    throw BehindCameraError("bundle_adjust: initial points behind a camera");
  }
  result.cost_history.push_back(cost);

  const Eigen::Index nc = static_cast<Eigen::Index>(n_cams * kCamParams);
  const std::size_t np = pts.size();
  double lambda = options.initial_lambda;
  bool converged = cost == 0.0;
  int iteration = 0;

  while (!converged && iteration < options.max_iterations) {
    ++iteration;
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(nc, nc);
    Eigen::VectorXd gc = Eigen::VectorXd::Zero(nc);
    std::vector<Mat3> V(np, Mat3::Zero());
    std::vector<Vec3> gp(np, Vec3::Zero());
    std::vector<Eigen::MatrixXd> W(np, Eigen::MatrixXd::Zero(nc, 3));

    for (const auto& o : obs) {
      const ProjectionJacobian J =
          project_with_jacobian(result.rig.cameras[o.camera], pts[o.point]);
      const Vec2 r = J.pixel - o.pixel;
      Eigen::Matrix<double, 2, kCamParams> Jc;
      Jc << J.d_intrinsics, J.d_distortion, J.d_rotation, J.d_translation;
      for (int k = 0; k < kCamParams; ++k) {
        if (!free_cam[o.camera * kCamParams + k]) Jc.col(k).setZero();
      }
      Eigen::Matrix<double, 2, 3> Jp = J.d_point;
      if (fix.points) Jp.setZero();
      const Eigen::Index off = static_cast<Eigen::Index>(o.camera * kCamParams);
      U.block<kCamParams, kCamParams>(off, off).noalias() += Jc.transpose() * Jc;
      gc.segment<kCamParams>(off).noalias() += Jc.transpose() * r;
      V[o.point].noalias() += Jp.transpose() * Jp;
      gp[o.point].noalias() += Jp.transpose() * r;
      W[o.point].block<kCamParams, 3>(off, 0).noalias() += Jc.transpose() * Jp;
    }

    bool accepted = false;
    while (!accepted) {
      if (lambda > 1e16) {
        // No descent direction left at any damping: local minimum.
        converged = true;
        break;
      }
      Eigen::MatrixXd S = U;
      for (Eigen::Index i = 0; i < nc; ++i) {
        if (!free_cam[i]) {
          S(i, i) = 1.0;
        } else {
          S(i, i) += lambda * std::max(U(i, i), 1e-12);
        }
      }
      Eigen::VectorXd rhs = -gc;
      std::vector<Mat3> Vinv(np);
      for (std::size_t p = 0; p < np; ++p) {
        Mat3 Vd = V[p];
        for (int k = 0; k < 3; ++k) {
          Vd(k, k) = fix.points ? 1.0 : Vd(k, k) + lambda * std::max(Vd(k, k), 1e-12);
        }
        Vinv[p] = Vd.inverse();
        const Eigen::MatrixXd WV = W[p] * Vinv[p];
        S.noalias() -= WV * W[p].transpose();
        rhs.noalias() += WV * gp[p];
      }
      const Eigen::VectorXd dc = S.ldlt().solve(rhs);
      CameraRig trial = result.rig;
      std::vector<Vec3> trial_pts = pts;
      if (dc.allFinite()) {
        for (std::size_t c = 0; c < n_cams; ++c) {
          apply_camera_step(trial.cameras[c], dc,
                            static_cast<Eigen::Index>(c * kCamParams));
        }
        if (!fix.points) {
          for (std::size_t p = 0; p < np; ++p) {
            trial_pts[p] += Vinv[p] * (-gp[p] - W[p].transpose() * dc);
          }
        }
      }
      const double trial_cost =
          dc.allFinite() ? total_cost(trial, trial_pts, obs)
                         : std::numeric_limits<double>::infinity();
      if (trial_cost < cost) {
        const double rel = (cost - trial_cost) / cost;
        result.rig = std::move(trial);
        pts = std::move(trial_pts);
        cost = trial_cost;
        result.cost_history.push_back(cost);
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (rel < options.relative_tolerance || cost == 0.0) converged = true;
      } else {
        lambda *= 10.0;
      }
    }
  }

  result.iterations = iteration;
  result.converged = converged;
  for (std::size_t p = 0; p < np; ++p) result.points[point_ids[p]] = pts[p];
  result.initial_mean_error_px =
      mean_reprojection_error(rig, observations, points);
  result.mean_error_px =
      mean_reprojection_error(result.rig, observations, result.points);
  return result;
}

}  // namespace posecap
