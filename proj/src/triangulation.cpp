// Copyright 2026 The posecap Authors
// SPDX-License-Identifier: Apache-2.0

#include "posecap/triangulation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

#include "posecap/errors.hpp"

namespace posecap {

LinearTriangulation triangulate_linear(std::span<const RayObservation> obs) {
  if (obs.size() < 2) {
    throw ArityError("triangulation needs at least two observations, got " +
                     std::to_string(obs.size()));
  }
  Eigen::MatrixXd A(2 * obs.size(), 4);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const CameraParams& cam = *obs[i].camera;
    const Vec2 n = pixel_to_normalized(cam, obs[i].pixel);
    Eigen::Matrix<double, 3, 4> P;
    P << cam.R, cam.t;
    Eigen::RowVector4d rx = n.x() * P.row(2) - P.row(0);
    Eigen::RowVector4d ry = n.y() * P.row(2) - P.row(1);
    A.row(2 * i) = rx / rx.norm();
    A.row(2 * i + 1) = ry / ry.norm();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  const Eigen::Vector4d h = svd.matrixV().col(3);
  const auto& sv = svd.singularValues();

  LinearTriangulation out;
  out.condition_number =
      sv(2) > 0.0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
  out.point = h.head<3>() / h(3);
  out.low_confidence = !(out.condition_number <= kNearParallelConditionLimit) ||
                       !out.point.allFinite();
  return out;
}

double reprojection_cost(std::span<const RayObservation> obs,
                         const Vec3& point) {
  double cost = 0.0;
  for (const auto& o : obs) {
    cost += (project(*o.camera, point) - o.pixel).squaredNorm();
  }
  return cost;
}

namespace {

double safe_cost(std::span<const RayObservation> obs, const Vec3& point) {
  try {
    return reprojection_cost(obs, point);
  } catch (const BehindCameraError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

RefinedTriangulation triangulate_refined(std::span<const RayObservation> obs,
                                         const Vec3& initial,
                                         int max_iterations) {
  if (obs.size() < 2) {
    throw ArityError("triangulation needs at least two observations, got " +
                     std::to_string(obs.size()));
  }
  RefinedTriangulation out;
  out.point = initial;
  out.initial_cost = safe_cost(obs, initial);
  out.final_cost = out.initial_cost;
  if (!std::isfinite(out.initial_cost)) {
    out.valid = false;
    return out;
  }

  double lambda = 1e-3;
  Vec3 x = initial;
  double cost = out.initial_cost;
  bool done = false;
  for (int it = 0; it < max_iterations && cost > 0.0 && !done; ++it) {
    Mat3 H = Mat3::Zero();
    Vec3 g = Vec3::Zero();
    for (const auto& o : obs) {
      const ProjectionJacobian J = project_with_jacobian(*o.camera, x);
      const Vec2 r = J.pixel - o.pixel;
      H.noalias() += J.d_point.transpose() * J.d_point;
      g.noalias() += J.d_point.transpose() * r;
    }
    done = true;
    while (lambda < 1e12) {
      Mat3 damped = H;
      damped.diagonal() += lambda * H.diagonal().cwiseMax(1e-12);
      const Vec3 candidate = x + damped.ldlt().solve(-g);
      const double candidate_cost = safe_cost(obs, candidate);
      if (candidate_cost < cost) {
        done = (cost - candidate_cost) < 1e-12 * cost;
        x = candidate;
        cost = candidate_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        out.improved = true;
        out.iterations = it + 1;
        break;
      }
      lambda *= 10.0;
    }
  }
  out.point = x;
  out.final_cost = cost;
  return out;
}

}  // namespace posecap
