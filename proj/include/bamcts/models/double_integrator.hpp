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

#include "bamcts/models/linear_parametric.hpp"

namespace bamcts {

/// Point mass pushed along a line by a bounded force.
///
/// State (position [m], velocity [m/s]), parameter (mass [kg]), control
/// (force [N]). Zero-order-hold discretization:
///   A = [1 dt; 0 1],  B = [dt^2 / (2m); dt / m]
/// with full-state observation o = x.
class DoubleIntegrator
    : public LinearParametricModel<DoubleIntegrator, ModelDimensions<2, 1, 1, 2>> {
 public:
  using Base = LinearParametricModel<DoubleIntegrator, ModelDimensions<2, 1, 1, 2>>;
  using ObsJacobian = ModelDimensions<2, 1, 1, 2>::ObsJacobian;

  /// No angular coordinate to wrap.
  static constexpr int kAngleIndex = -1;

  DoubleIntegrator(double dt, double u_max) : Base(dt, u_max) {}

  StateMatrix state_matrix(const Params& /*p*/) const {
    StateMatrix a;
    a << 1.0, dt(), 0.0, 1.0;
    return a;
  }

  InputMatrix input_matrix(const Params& p, const State& /*x*/) const {
    const double m = p(0);
    InputMatrix b;
    b << dt() * dt() / (2.0 * m), dt() / m;
    return b;
  }

  Observation measure_state(const State& x, const Control& /*u*/,
                            const Params& /*p*/) const {
    return x;
  }

  AugMatrix dynamics_jacobian(const Augmented& s, const Control& u) const {
    const double m = s(2);
    const double f = u(0);
    AugMatrix jac = AugMatrix::Identity();
    jac(0, 1) = dt();
    jac(0, 2) = -dt() * dt() * f / (2.0 * m * m);
    jac(1, 2) = -dt() * f / (m * m);
    return jac;
  }

  ObsJacobian observation_jacobian(const Augmented& /*s*/, const Control& /*u*/) const {
    ObsJacobian jac = ObsJacobian::Zero();
    jac(0, 0) = 1.0;
    jac(1, 1) = 1.0;
    return jac;
  }
};

inline DoubleIntegrator build_double_integrator(double dt, double u_max,
                                                double mass_floor = 1.0) {
  DoubleIntegrator model(dt, u_max);
  model.set_lower_bounds(DoubleIntegrator::Params::Constant(mass_floor));
  return model;
}

}  // namespace bamcts
