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

#ifndef NSPLAN_METRICS_HPP_
#define NSPLAN_METRICS_HPP_

#include <vector>

#include "nsplan/kbm.hpp"
#include "nsplan/scenario.hpp"

// The three evaluation metrics: L2 waypoint error at 1/2/3 s, collision rate
// against scripted agent boxes, and trajectory prediction consistency (TPC,
// RMS deviation between time-aligned plans from adjacent frames).

namespace nsplan::metrics
{

struct HorizonValues
{
  double at_1s{0.0};
  double at_2s{0.0};
  double at_3s{0.0};
  double avg{0.0};  // mean of the three
};

// Euclidean waypoint error at the waypoints nearest 1, 2, and 3 s. Both
// trajectories must share timestamps (HorizonMismatch otherwise).
HorizonValues l2_metric(const kbm::Trajectory & pred, const kbm::Trajectory & expert);

// Strict-interior separating-axis overlap for oriented rectangles; exact
// edge contact does not count as a collision.
bool obb_overlap(const scen::Obb & a, const scen::Obb & b);

// True iff the ego box placed along `pred` (world frame) strictly overlaps
// any agent box at any of the horizon steps after `frame`.
bool collision_metric(const kbm::Trajectory & pred, const scen::Scenario & scn, int frame);

// Plans from consecutive frames (dt apart, world frame): RMS deviation of
// time-aligned waypoint pairs, bucketed by the later plan's horizon into
// (0,1], (1,2], (2,3] s. Throws InsufficientFrames for fewer than two plans.
HorizonValues tpc_metric(const std::vector<kbm::Trajectory> & plans, double dt);

struct MetricsReport
{
  HorizonValues l2;
  double collision_rate{0.0};
  HorizonValues tpc;
  int frames{0};
};

}  // namespace nsplan::metrics

#endif  // NSPLAN_METRICS_HPP_
