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

#include "nsplan/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdlib>

#include "nsplan/errors.hpp"

namespace nsplan::metrics
{

namespace
{

int nearest_waypoint(const kbm::Trajectory & traj, double target_t)
{
  int best = 0;
  double best_err = std::abs(traj.points[0].t - target_t);
  for (int i = 1; i < static_cast<int>(traj.points.size()); ++i) {
    const double err = std::abs(traj.points[i].t - target_t);
    if (err < best_err) {
      best = i;
      best_err = err;
    }
  }
  return best;
}

// Half-projection of box `b` onto a unit axis, plus the center distance
// along that axis.
bool separated_on_axis(const scen::Obb & a, const scen::Obb & b, double ux, double uy)
{
  const double ca = std::cos(a.heading);
  const double sa = std::sin(a.heading);
  const double cb = std::cos(b.heading);
  const double sb = std::sin(b.heading);
  const double ra = std::abs(ux * ca + uy * sa) * a.half_len +
                    std::abs(-ux * sa + uy * ca) * a.half_wid;
  const double rb = std::abs(ux * cb + uy * sb) * b.half_len +
                    std::abs(-ux * sb + uy * cb) * b.half_wid;
  const double d = std::abs((b.cx - a.cx) * ux + (b.cy - a.cy) * uy);
  return d >= ra + rb;  // contact counts as separated
}

}  // namespace

HorizonValues l2_metric(const kbm::Trajectory & pred, const kbm::Trajectory & expert)
{
  if (pred.points.empty() || pred.points.size() != expert.points.size()) {
    throw HorizonMismatch("trajectories must share the same horizon");
  }
  for (std::size_t i = 0; i < pred.points.size(); ++i) {
    if (std::abs(pred.points[i].t - expert.points[i].t) > 1e-9) {
      throw HorizonMismatch("trajectories must share timestamps");
    }
  }
  HorizonValues out;
  const std::array<double, 3> targets{1.0, 2.0, 3.0};
  std::array<double, 3> vals{};
  for (int i = 0; i < 3; ++i) {
    const int k = nearest_waypoint(pred, targets[i]);
    vals[i] = std::hypot(
      pred.points[k].x - expert.points[k].x, pred.points[k].y - expert.points[k].y);
  }
  out.at_1s = vals[0];
  out.at_2s = vals[1];
  out.at_3s = vals[2];
  out.avg = (vals[0] + vals[1] + vals[2]) / 3.0;
  return out;
}

bool obb_overlap(const scen::Obb & a, const scen::Obb & b)
{
  const std::array<std::array<double, 2>, 4> axes{{
    {std::cos(a.heading), std::sin(a.heading)},
    {-std::sin(a.heading), std::cos(a.heading)},
    {std::cos(b.heading), std::sin(b.heading)},
    {-std::sin(b.heading), std::cos(b.heading)},
  }};
  for (const auto & axis : axes) {
    if (separated_on_axis(a, b, axis[0], axis[1])) {
      return false;
    }
  }
  return true;
}

bool collision_metric(const kbm::Trajectory & pred, const scen::Scenario & scn, int frame)
{
  for (int k = 0; k < static_cast<int>(pred.points.size()); ++k) {
    const kbm::Waypoint & wp = pred.points[k];
    const scen::Obb ego{wp.x, wp.y, scn.ego_length / 2.0, scn.ego_width / 2.0, wp.psi};
    const int step = frame + k + 1;
    for (const scen::AgentTrack & agent : scn.agents) {
      if (obb_overlap(ego, agent.obb_at(step))) {
        return true;
      }
    }
  }
  return false;
}

HorizonValues tpc_metric(const std::vector<kbm::Trajectory> & plans, double dt)
{
  if (plans.size() < 2) {
    throw InsufficientFrames("TPC needs at least two consecutive plans");
  }
  std::array<double, 3> sum_sq{};
  std::array<int, 3> count{};
  for (std::size_t i = 0; i + 1 < plans.size(); ++i) {
    const kbm::Trajectory & prev = plans[i];
    const kbm::Trajectory & next = plans[i + 1];
    const int overlap =
      std::min(static_cast<int>(next.points.size()), static_cast<int>(prev.points.size()) - 1);
    for (int j = 0; j < overlap; ++j) {
      // next's waypoint j and prev's waypoint j+1 share an absolute time
      // (frames are dt apart).
      const double dx = next.points[j].x - prev.points[j + 1].x;
      const double dy = next.points[j].y - prev.points[j + 1].y;
      const double h = next.points[j].t;
      int bucket;
      if (h <= 1.0) {
        bucket = 0;
      } else if (h <= 2.0) {
        bucket = 1;
      } else if (h <= 3.0) {
        bucket = 2;
      } else {
        continue;
      }
      sum_sq[bucket] += dx * dx + dy * dy;
      count[bucket] += 1;
    }
  }
  (void)dt;
  HorizonValues out;
  std::array<double, 3> rms{};
  for (int b = 0; b < 3; ++b) {
    rms[b] = count[b] > 0 ? std::sqrt(sum_sq[b] / count[b]) : 0.0;
  }
  out.at_1s = rms[0];
  out.at_2s = rms[1];
  out.at_3s = rms[2];
  out.avg = (rms[0] + rms[1] + rms[2]) / 3.0;
  return out;
}

}  // namespace nsplan::metrics
