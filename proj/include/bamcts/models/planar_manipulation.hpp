// Copyright 2026 The bamcts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <limits>

#include "bamcts/models/linear_parametric.hpp"

namespace bamcts {

/// Rigid box pushed in the plane by a force (F_x, F_y) applied at offset r
/// from its center of mass, plus a pure torque T.
///
/// State:      (p_x, p_y, theta, v_x, v_y, omega)
/// Parameters: (m, J, mu_v, r_x, r_y)
/// Control:    (F_x, F_y, T)
/// Observation of a sensor at body-frame offset r_b:
///             (p_x, p_y, theta, v_x, v_y, omega, a_x, a_y, alpha)
///
/// Explicit Euler step of m a = F - mu_v v and J alpha = T + r x F. The
/// force-to-torque lever arm depends on theta, so B = B(theta, p).
class PlanarManipulation
    : public LinearParametricModel<PlanarManipulation, ModelDimensions<6, 5, 3, 9>> {
 public:
  using Dims = ModelDimensions<6, 5, 3, 9>;
  using Base = LinearParametricModel<PlanarManipulation, Dims>;
  using ObsJacobian = Dims::ObsJacobian;

  static constexpr int kAngleIndex = 2;

  enum Param { kMass = 0, kInertia = 1, kFriction = 2, kLeverX = 3, kLeverY = 4 };

  PlanarManipulation(double dt, double u_max) : Base(dt, u_max) {}

  const Eigen::Vector2d& sensor_offset() const { return sensor_offset_; }
  void set_sensor_offset(const Eigen::Vector2d& r_b) { sensor_offset_ = r_b; }

  StateMatrix state_matrix(const Params& p) const {
    StateMatrix a = StateMatrix::Identity();
    a.topRightCorner<3, 3>() = dt() * Eigen::Matrix3d::Identity();
    const double damping = 1.0 - p(kFriction) * dt() / p(kMass);
    a(3, 3) = damping;
    a(4, 4) = damping;
    return a;
  }

  InputMatrix input_matrix(const Params& p, const State& x) const {
    const Lever lever = lever_terms(p, x(2));
    InputMatrix b = InputMatrix::Zero();
    b(3, 0) = dt() / p(kMass);
    b(4, 1) = dt() / p(kMass);
    b(5, 0) = dt() * lever.fx / p(kInertia);
    b(5, 1) = dt() * lever.fy / p(kInertia);
    b(5, 2) = dt() / p(kInertia);
    return b;
  }

  Observation measure_state(const State& x, const Control& u, const Params& p) const {
    const double theta = x(2);
    const double omega = x(5);
    const Eigen::Vector2d rb = sensor_in_world(theta);
    const double alpha = angular_acceleration(p, theta, u);
    const double m = p(kMass);
    const double mu = p(kFriction);

    Observation y;
    y(0) = x(0) + rb.x();
    y(1) = x(1) + rb.y();
    y(2) = theta;
    y(3) = x(3) - omega * rb.y();
    y(4) = x(4) + omega * rb.x();
    y(5) = omega;
    y(6) = (u(0) - mu * x(3)) / m - alpha * rb.y() - omega * omega * rb.x();
    y(7) = (u(1) - mu * x(4)) / m + alpha * rb.x() - omega * omega * rb.y();
    y(8) = alpha;
    return y;
  }

  AugMatrix dynamics_jacobian(const Augmented& s, const Control& u) const {
    const State x = state_of(s);
    const Params p = params_of(s);
    const double m = p(kMass);
    const double mu = p(kFriction);
    const double h = dt();
    const AlphaPartials da = alpha_partials(p, x(2), u);

    AugMatrix jac = AugMatrix::Identity();
    jac.topLeftCorner<6, 6>() = state_matrix(p);
    jac(5, 2) = h * da.theta;
    jac(3, 6 + kMass) = (mu * x(3) - u(0)) * h / (m * m);
    jac(4, 6 + kMass) = (mu * x(4) - u(1)) * h / (m * m);
    jac(5, 6 + kInertia) = h * da.inertia;
    jac(3, 6 + kFriction) = -h * x(3) / m;
    jac(4, 6 + kFriction) = -h * x(4) / m;
    jac(5, 6 + kLeverX) = h * da.lever_x;
    jac(5, 6 + kLeverY) = h * da.lever_y;
    return jac;
  }

  ObsJacobian observation_jacobian(const Augmented& s, const Control& u) const {
    const State x = state_of(s);
    const Params p = params_of(s);
    const double theta = x(2);
    const double omega = x(5);
    const double m = p(kMass);
    const double mu = p(kFriction);
    const Eigen::Vector2d rb = sensor_in_world(theta);
    const double alpha = angular_acceleration(p, theta, u);
    const AlphaPartials da = alpha_partials(p, theta, u);

    ObsJacobian jac = ObsJacobian::Zero();
    jac(0, 0) = 1.0;
    jac(0, 2) = -rb.y();
    jac(1, 1) = 1.0;
    jac(1, 2) = rb.x();
    jac(2, 2) = 1.0;
    jac(3, 3) = 1.0;
    jac(3, 5) = -rb.y();
    jac(3, 2) = -omega * rb.x();
    jac(4, 4) = 1.0;
    jac(4, 5) = rb.x();
    jac(4, 2) = -omega * rb.y();
    jac(5, 5) = 1.0;

    jac(6, 3) = -mu / m;
    jac(6, 5) = -2.0 * omega * rb.x();
    jac(6, 2) = -da.theta * rb.y() - alpha * rb.x() + omega * omega * rb.y();
    jac(6, 6 + kMass) = -(u(0) - mu * x(3)) / (m * m);
    jac(6, 6 + kFriction) = -x(3) / m;
    jac(6, 6 + kInertia) = -da.inertia * rb.y();
    jac(6, 6 + kLeverX) = -da.lever_x * rb.y();
    jac(6, 6 + kLeverY) = -da.lever_y * rb.y();

    jac(7, 4) = -mu / m;
    jac(7, 5) = -2.0 * omega * rb.y();
    jac(7, 2) = da.theta * rb.x() - alpha * rb.y() - omega * omega * rb.x();
    jac(7, 6 + kMass) = -(u(1) - mu * x(4)) / (m * m);
    jac(7, 6 + kFriction) = -x(4) / m;
    jac(7, 6 + kInertia) = da.inertia * rb.x();
    jac(7, 6 + kLeverX) = da.lever_x * rb.x();
    jac(7, 6 + kLeverY) = da.lever_y * rb.x();

    jac(8, 2) = da.theta;
    jac(8, 6 + kInertia) = da.inertia;
    jac(8, 6 + kLeverX) = da.lever_x;
    jac(8, 6 + kLeverY) = da.lever_y;
    return jac;
  }

  /// (T + r x F) / J with the lever arm as it enters B.
  double angular_acceleration(const Params& p, double theta, const Control& u) const {
    const Lever lever = lever_terms(p, theta);
    return (u(2) + lever.fx * u(0) + lever.fy * u(1)) / p(kInertia);
  }

 private:
  // Torque per unit F_x and per unit F_y.
  struct Lever {
    double fx;
    double fy;
  };

  struct AlphaPartials {
    double theta;
    double inertia;
    double lever_x;
    double lever_y;
  };

  static Lever lever_terms(const Params& p, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c * p(kLeverY) + s * p(kLeverX), c * p(kLeverX) - s * p(kLeverY)};
  }

  AlphaPartials alpha_partials(const Params& p, double theta, const Control& u) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double j = p(kInertia);
    const double rx = p(kLeverX);
    const double ry = p(kLeverY);
    return {((c * rx - s * ry) * u(0) - (s * rx + c * ry) * u(1)) / j,
            -angular_acceleration(p, theta, u) / j, (s * u(0) + c * u(1)) / j,
            (c * u(0) - s * u(1)) / j};
  }

  Eigen::Vector2d sensor_in_world(double theta) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c * sensor_offset_.x() - s * sensor_offset_.y(),
            s * sensor_offset_.x() + c * sensor_offset_.y()};
  }

  Eigen::Vector2d sensor_offset_ = Eigen::Vector2d::Zero();
};

/// Planar manipulation model with floors on m, J and mu_v; the lever arm is
/// unbounded.
inline PlanarManipulation build_planar_manipulation(double dt, double u_max,
                                                    double physical_floor = 1.0) {
  PlanarManipulation model(dt, u_max);
  PlanarManipulation::Params lb;
  constexpr double kFree = -std::numeric_limits<double>::infinity();
  lb << physical_floor, physical_floor, physical_floor, kFree, kFree;
  model.set_lower_bounds(lb);
  return model;
}

}  // namespace bamcts
