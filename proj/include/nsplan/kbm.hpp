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

#ifndef NSPLAN_KBM_HPP_
#define NSPLAN_KBM_HPP_

#include <Eigen/Dense>
#include <vector>

#include "nsplan/errors.hpp"
#include "nsplan/facts.hpp"

// Kinematic bicycle model
//
//   x' = v cos(psi),  y' = v sin(psi),  v' = a,  psi' = v tan(delta) / L
//
// integrated with the explicit midpoint (RK2) rule under zero-order-hold
// controls. Speed is clamped at zero (no reverse motion; the clamp
// contributes a zero subgradient when active) and headings stay in
// (-pi, pi]. rollout_with_gradients propagates exact Jacobians of the
// discrete map by forward accumulation.

namespace nsplan::kbm
{

struct VehicleState
{
  double x{0.0};
  double y{0.0};
  double v{0.0};    // m/s, >= 0
  double psi{0.0};  // rad, (-pi, pi]

  bool operator==(const VehicleState &) const = default;
};

struct ControlStep
{
  double a{0.0};      // m/s^2
  double delta{0.0};  // rad

  bool operator==(const ControlStep &) const = default;
};

struct KbmParams
{
  double wheelbase{2.7};     // m
  double dt{0.5};            // s
  int horizon_steps{6};      // planning horizon = horizon_steps * dt
  double accel_max{4.0};     // m/s^2, |a| bound after the bounding transform
  double steer_max{0.6};     // rad, |delta| bound after the bounding transform
  double residual_scale{0.5};  // m, residual correction bound (lambda)

  double horizon_seconds() const { return horizon_steps * dt; }
};

struct Waypoint
{
  double t{0.0};  // s, relative to the plan start
  double x{0.0};
  double y{0.0};
  double v{0.0};
  double psi{0.0};

  bool operator==(const Waypoint &) const = default;
};

// Start state plus the H integrated states at dt, 2*dt, ..., H*dt.
struct Trajectory
{
  VehicleState start;
  std::vector<Waypoint> points;

  bool operator==(const Trajectory &) const = default;
};

// Time derivative of (x, y, v, psi) under one control.
Eigen::Vector4d derivative(const VehicleState & s, const ControlStep & c, const KbmParams & p);

// One midpoint step of length p.dt.
VehicleState rk2_step(const VehicleState & s, const ControlStep & c, const KbmParams & p);

// Integrate H = p.horizon_steps controls. controls.size() must equal H.
Trajectory rollout(
  const VehicleState & start, const std::vector<ControlStep> & controls, const KbmParams & p);

// Jacobians of every waypoint state with respect to the flattened parameter
// vector theta = (a_0..a_{H-1}, delta_0..delta_{H-1}, v0). Column layout is
// fixed; rows are (x, y, v, psi). Controls the step has not consumed yet have
// exactly zero columns (causality).
struct RolloutGradients
{
  int horizon{0};
  // One 4 x (2H+1) matrix per waypoint.
  std::vector<Eigen::MatrixXd> jac;

  int param_count() const { return 2 * horizon + 1; }
  int accel_col(int j) const { return j; }
  int steer_col(int j) const { return horizon + j; }
  int v0_col() const { return 2 * horizon; }
};

struct RolloutWithGradients
{
  Trajectory trajectory;
  RolloutGradients gradients;
};

RolloutWithGradients rollout_with_gradients(
  const VehicleState & start, const std::vector<ControlStep> & controls, const KbmParams & p);

}  // namespace nsplan::kbm

#endif  // NSPLAN_KBM_HPP_
