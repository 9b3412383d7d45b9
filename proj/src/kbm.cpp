// Copyright 2026 The nsplan Authors
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

#include "nsplan/kbm.hpp"

#include <cmath>

namespace nsplan::kbm
{
namespace
{

void check_rollout_args(
  const VehicleState & start, const std::vector<ControlStep> & controls, const KbmParams & p)
{
  if (p.dt <= 0.0 || p.horizon_steps <= 0 || p.wheelbase <= 0.0) {
    throw Error("rollout: params must have dt > 0, horizon_steps > 0, wheelbase > 0");
  }
  if (static_cast<int>(controls.size()) != p.horizon_steps) {
    throw HorizonMismatch(
      "rollout: " + std::to_string(controls.size()) + " controls for horizon " +
      std::to_string(p.horizon_steps));
  }
  if (start.v < 0.0) {
    throw Error("rollout: start speed must be >= 0");
  }
}

// d f / d state at (s, c); rows and columns ordered (x, y, v, psi).
Eigen::Matrix4d state_jacobian(const VehicleState & s, const ControlStep & c, const KbmParams & p)
{
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 2) = std::cos(s.psi);
  m(0, 3) = -s.v * std::sin(s.psi);
  m(1, 2) = std::sin(s.psi);
  m(1, 3) = s.v * std::cos(s.psi);
  m(3, 2) = std::tan(c.delta) / p.wheelbase;
  return m;
}

// d f / d (a, delta) at (s, c).
Eigen::Matrix<double, 4, 2> control_jacobian(
  const VehicleState & s, const ControlStep & c, const KbmParams & p)
{
  Eigen::Matrix<double, 4, 2> m = Eigen::Matrix<double, 4, 2>::Zero();
  m(2, 0) = 1.0;
  const double sec = 1.0 / std::cos(c.delta);
  m(3, 1) = s.v * sec * sec / p.wheelbase;
  return m;
}

}  // namespace

Eigen::Vector4d derivative(const VehicleState & s, const ControlStep & c, const KbmParams & p)
{
  Eigen::Vector4d f;
  f << s.v * std::cos(s.psi), s.v * std::sin(s.psi), c.a,
    s.v * std::tan(c.delta) / p.wheelbase;
  return f;
}

VehicleState rk2_step(const VehicleState & s, const ControlStep & c, const KbmParams & p)
{
  const double h = p.dt;
  const Eigen::Vector4d k1 = derivative(s, c, p);
  VehicleState mid{
    s.x + 0.5 * h * k1(0), s.y + 0.5 * h * k1(1), s.v + 0.5 * h * k1(2), s.psi + 0.5 * h * k1(3)};
  if (mid.v < 0.0) mid.v = 0.0;
  const Eigen::Vector4d k2 = derivative(mid, c, p);
  VehicleState next{s.x + h * k2(0), s.y + h * k2(1), s.v + h * k2(2), s.psi + h * k2(3)};
  if (next.v < 0.0) next.v = 0.0;
  next.psi = wrap_angle(next.psi);
  return next;
}

Trajectory rollout(
  const VehicleState & start, const std::vector<ControlStep> & controls, const KbmParams & p)
{
  check_rollout_args(start, controls, p);
  Trajectory traj;
  traj.start = start;
  traj.points.reserve(controls.size());
  VehicleState s = start;
  for (std::size_t k = 0; k < controls.size(); ++k) {
    s = rk2_step(s, controls[k], p);
    traj.points.push_back({(static_cast<double>(k) + 1.0) * p.dt, s.x, s.y, s.v, s.psi});
  }
  return traj;
}

RolloutWithGradients rollout_with_gradients(
  const VehicleState & start, const std::vector<ControlStep> & controls, const KbmParams & p)
{
  check_rollout_args(start, controls, p);
  const int hsteps = p.horizon_steps;
  const int n_params = 2 * hsteps + 1;
  const double h = p.dt;

  RolloutWithGradients out;
  out.trajectory.start = start;
  out.trajectory.points.reserve(hsteps);
  out.gradients.horizon = hsteps;
  out.gradients.jac.reserve(hsteps);

  VehicleState s = start;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(4, n_params);
  jac(2, out.gradients.v0_col()) = 1.0;  // d v / d v0 at k = 0

  for (int k = 0; k < hsteps; ++k) {
    const ControlStep & c = controls[static_cast<std::size_t>(k)];
    const int ca = out.gradients.accel_col(k);
    const int cd = out.gradients.steer_col(k);

    const Eigen::Vector4d k1 = derivative(s, c, p);
    Eigen::MatrixXd dk1 = state_jacobian(s, c, p) * jac;
    const Eigen::Matrix<double, 4, 2> b1 = control_jacobian(s, c, p);
    dk1.col(ca) += b1.col(0);
    dk1.col(cd) += b1.col(1);

    VehicleState mid{
      s.x + 0.5 * h * k1(0), s.y + 0.5 * h * k1(1), s.v + 0.5 * h * k1(2),
      s.psi + 0.5 * h * k1(3)};
    Eigen::MatrixXd jac_mid = jac + 0.5 * h * dk1;
    if (mid.v < 0.0) {
      mid.v = 0.0;
      jac_mid.row(2).setZero();  // clamp subgradient
    }

    const Eigen::Vector4d k2 = derivative(mid, c, p);
    Eigen::MatrixXd dk2 = state_jacobian(mid, c, p) * jac_mid;
    const Eigen::Matrix<double, 4, 2> b2 = control_jacobian(mid, c, p);
    dk2.col(ca) += b2.col(0);
    dk2.col(cd) += b2.col(1);

    VehicleState next{s.x + h * k2(0), s.y + h * k2(1), s.v + h * k2(2), s.psi + h * k2(3)};
    jac += h * dk2;
    if (next.v < 0.0) {
      next.v = 0.0;
      jac.row(2).setZero();
    }
    next.psi = wrap_angle(next.psi);  // shift by 2*pi*n; derivative unchanged

    s = next;
    out.trajectory.points.push_back({(static_cast<double>(k) + 1.0) * h, s.x, s.y, s.v, s.psi});
    out.gradients.jac.push_back(jac);
  }
  return out;
}

}  // namespace nsplan::kbm
