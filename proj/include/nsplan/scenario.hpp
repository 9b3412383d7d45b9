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

#ifndef NSPLAN_SCENARIO_HPP_
#define NSPLAN_SCENARIO_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nsplan/facts.hpp"
#include "nsplan/kbm.hpp"

// Parametric desk-scale scenarios: a scripted ego reference (the "log"),
// scripted agents, and per-frame fact extraction. Evaluation is open loop:
// the ego always follows the script, planning frames are sampled every dt
// along it, and planned trajectories are never fed back into the world.

namespace nsplan::scen
{

// Oriented rectangle in the world frame.
struct Obb
{
  double cx{0.0};
  double cy{0.0};
  double half_len{0.0};  // along heading
  double half_wid{0.0};
  double heading{0.0};
};

struct AgentTrack
{
  std::int64_t id{0};
  Category category{Category::vehicle};
  double length{4.0};
  double width{1.8};
  // Pose/speed on the dt grid, index 0 = scenario start. Size total_steps+1.
  std::vector<kbm::VehicleState> states;
  // Optional pinned TTC fact (treated as a perception input) for one frame.
  double ttc_fact{-1.0};
  int ttc_fact_frame{-1};

  Obb obb_at(int step) const;
};

struct Scenario
{
  std::string id;
  NavCommand nav{NavCommand::straight};
  double lane_width{3.5};
  double ego_length{4.0};
  double ego_width{1.8};
  double dt{0.5};
  int horizon_steps{6};
  int frame_count{12};  // planning frames at t = 0, dt, ..., (frame_count-1)*dt
  // Scripted ego states on the dt grid, size total_steps()+1, and the bounded
  // controls that generate them through the same integrator the planner uses.
  std::vector<kbm::VehicleState> ego_states;
  std::vector<kbm::ControlStep> ego_controls;
  std::vector<AgentTrack> agents;

  int total_steps() const { return frame_count - 1 + horizon_steps; }
  const kbm::VehicleState & ego_at(int step) const { return ego_states.at(step); }
  Obb ego_obb(const kbm::VehicleState & s) const
  {
    return {s.x, s.y, ego_length / 2.0, ego_width / 2.0, s.psi};
  }
  // Scripted reference for a frame: the next horizon_steps ego states,
  // re-expressed as a trajectory starting at the frame state (world frame).
  kbm::Trajectory expert_for_frame(int frame) const;
};

struct ScenarioSpec
{
  std::string template_name;
  std::string id;
  std::uint64_t seed{0};
  std::map<std::string, double> params;
};

// Templates: empty_road, lead_vehicle, pedestrian_crossing, lane_change,
// intersection_turn. Unset parameters are drawn deterministically from the
// seed; the result is fully determined by (template, params, seed).
// Throws UnknownTemplate / InfeasibleExpert.
Scenario build_scenario(const ScenarioSpec & spec, const kbm::KbmParams & kp);

// Structured facts for one planning frame, observed from the script.
SceneFacts extract_facts(const Scenario & scn, int frame);

// Suite file: JSON {"scenarios": [{"template", "id", "seed", "params"}]}.
std::vector<ScenarioSpec> load_suite(const std::string & path);

}  // namespace nsplan::scen

#endif  // NSPLAN_SCENARIO_HPP_
