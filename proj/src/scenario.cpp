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

#include "nsplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nsplan/errors.hpp"
#include "nsplan/rng.hpp"

namespace nsplan::scen
{

namespace
{

using json = nlohmann::json;

// Explicit parameters win; everything else is drawn from a per-name stream so
// adding a parameter never reshuffles the others.
class ParamSampler
{
public:
  ParamSampler(const std::map<std::string, double> & params, std::uint64_t seed)
  : params_(params), root_(seed)
  {
  }

  double fixed(const std::string & name, double fallback) const
  {
    auto it = params_.find(name);
    return it == params_.end() ? fallback : it->second;
  }

  bool has(const std::string & name) const { return params_.count(name) > 0; }

  double jitter(const std::string & name, double lo, double hi)
  {
    auto it = params_.find(name);
    if (it != params_.end()) {
      return it->second;
    }
    Rng stream = root_.fork(name);
    return stream.uniform(lo, hi);
  }

private:
  const std::map<std::string, double> & params_;
  Rng root_;
};

void validate_id(const std::string & id)
{
  if (id.empty() || !(std::islower(static_cast<unsigned char>(id[0])) || id[0] == '_')) {
    throw ConfigError("scenario id must start with a lowercase letter: '" + id + "'");
  }
  for (char c : id) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::islower(u) || std::isdigit(u) || c == '_')) {
      throw ConfigError("scenario id may only use [a-z0-9_]: '" + id + "'");
    }
  }
}

AgentTrack linear_track(
  std::int64_t id, Category cat, double length, double width, double x0, double y0, double speed,
  double psi, int steps, double dt)
{
  AgentTrack t;
  t.id = id;
  t.category = cat;
  t.length = length;
  t.width = width;
  t.states.resize(steps + 1);
  const double vx = speed * std::cos(psi);
  const double vy = speed * std::sin(psi);
  for (int i = 0; i <= steps; ++i) {
    const double tt = i * dt;
    t.states[i] = {x0 + vx * tt, y0 + vy * tt, speed, psi};
  }
  return t;
}

// Constant hard-braking profile that reaches exactly zero on the dt grid
// with per-step decel <= 3.6 m/s^2.
std::vector<kbm::ControlStep> full_stop_controls(double v0, int steps, double dt)
{
  std::vector<kbm::ControlStep> c(steps);
  if (v0 <= 0.0) {
    return c;
  }
  const int n_b = std::min(steps, static_cast<int>(std::ceil(v0 / (3.6 * dt))));
  const double decel = v0 / (n_b * dt);
  for (int i = 0; i < n_b; ++i) {
    c[i].a = -decel;
  }
  return c;
}

void integrate_ego(Scenario & scn, const kbm::VehicleState & start, const kbm::KbmParams & kp)
{
  const int steps = scn.total_steps();
  if (static_cast<int>(scn.ego_controls.size()) != steps) {
    throw InfeasibleExpert("expert control script has the wrong length");
  }
  for (const auto & c : scn.ego_controls) {
    if (std::abs(c.a) > kp.accel_max || std::abs(c.delta) > kp.steer_max) {
      throw InfeasibleExpert("expert control script exceeds the actuation bounds");
    }
  }
  kbm::KbmParams step_params = kp;
  step_params.horizon_steps = 1;
  scn.ego_states.resize(steps + 1);
  scn.ego_states[0] = start;
  for (int i = 0; i < steps; ++i) {
    scn.ego_states[i + 1] = kbm::rk2_step(scn.ego_states[i], scn.ego_controls[i], step_params);
  }
}

Scenario base_scenario(const ScenarioSpec & spec, const kbm::KbmParams & kp, ParamSampler & ps)
{
  Scenario scn;
  scn.id = spec.id;
  validate_id(scn.id);
  scn.dt = kp.dt;
  scn.horizon_steps = kp.horizon_steps;
  scn.frame_count = static_cast<int>(ps.fixed("frames", 12.0));
  if (scn.frame_count < 1) {
    throw ConfigError("scenario frame count must be >= 1");
  }
  return scn;
}

Scenario build_empty_road(const ScenarioSpec & spec, const kbm::KbmParams & kp)
{
  ParamSampler ps(spec.params, spec.seed);
  Scenario scn = base_scenario(spec, kp, ps);
  const double v0 = ps.jitter("v0", 5.0, 8.5);
  scn.nav = NavCommand::straight;
  scn.ego_controls.assign(scn.total_steps(), {});
  integrate_ego(scn, {0.0, 0.0, v0, 0.0}, kp);
  return scn;
}

Scenario build_pedestrian_crossing(const ScenarioSpec & spec, const kbm::KbmParams & kp)
{
  ParamSampler ps(spec.params, spec.seed);
  Scenario scn = base_scenario(spec, kp, ps);
  const double v0 = ps.jitter("v0", 5.0, 8.0);
  const double ttc_ratio = ps.jitter("ttc_ratio", 0.8, 1.25);
  const double gap = ps.fixed("gap", v0 * ttc_ratio);
  const double ped_speed = ps.jitter("ped_speed", 2.25, 2.45);
  const double ped_y = ps.fixed("ped_y", -1.35);
  scn.nav = NavCommand::straight;

  const double ped_len = 0.6;
  const double center_dist = gap + scn.ego_length / 2.0 + ped_len / 2.0;
  if (center_dist <= std::abs(ped_y)) {
    throw ConfigError("pedestrian gap too small for the lateral offset");
  }
  const double ped_x = std::sqrt(center_dist * center_dist - ped_y * ped_y);
  AgentTrack ped = linear_track(
    1, Category::pedestrian, ped_len, 0.6, ped_x, ped_y, ped_speed, kPi / 2.0,
    scn.total_steps(), scn.dt);
  if (ps.has("ttc")) {
    ped.ttc_fact = ps.fixed("ttc", -1.0);
    ped.ttc_fact_frame = 0;
  }
  scn.agents.push_back(std::move(ped));

  scn.ego_controls = full_stop_controls(v0, scn.total_steps(), scn.dt);
  integrate_ego(scn, {0.0, 0.0, v0, 0.0}, kp);
  return scn;
}

Scenario build_lead_vehicle(const ScenarioSpec & spec, const kbm::KbmParams & kp)
{
  ParamSampler ps(spec.params, spec.seed);
  Scenario scn = base_scenario(spec, kp, ps);
  const double dv = ps.jitter("dv", 3.5, 5.0);
  const double ttc_ratio = ps.jitter("ttc_ratio", 1.1, 1.35);
  const double lead_speed = ps.jitter("lead_speed", 1.5, 3.0);
  const double v0 = ps.fixed("v0", lead_speed + dv);
  const double gap = ps.fixed("gap", dv * ttc_ratio);
  scn.nav = NavCommand::straight;

  const double lead_x = gap + scn.ego_length / 2.0 + 2.0;  // surface gap, 4 m lead box
  scn.agents.push_back(linear_track(
    1, Category::vehicle, 4.0, 1.8, lead_x, 0.0, lead_speed, 0.0, scn.total_steps(), scn.dt));

  scn.ego_controls = full_stop_controls(v0, scn.total_steps(), scn.dt);
  integrate_ego(scn, {0.0, 0.0, v0, 0.0}, kp);
  return scn;
}

Scenario build_lane_change(const ScenarioSpec & spec, const kbm::KbmParams & kp)
{
  ParamSampler ps(spec.params, spec.seed);
  Scenario scn = base_scenario(spec, kp, ps);
  const double v0 = ps.jitter("v0", 5.0, 8.5);
  Rng dir_stream = Rng(spec.seed).fork("dir");
  const double dir = ps.fixed("dir", dir_stream.below(2) == 0 ? 1.0 : -1.0);
  const double steer = ps.jitter("steer", 0.05, 0.08) * (dir >= 0.0 ? 1.0 : -1.0);
  scn.nav = dir >= 0.0 ? NavCommand::left : NavCommand::right;

  scn.ego_controls.assign(scn.total_steps(), {});
  for (int i = 0; i < 3 && i < scn.total_steps(); ++i) {
    scn.ego_controls[i].delta = steer;
  }
  for (int i = 3; i < 6 && i < scn.total_steps(); ++i) {
    scn.ego_controls[i].delta = -steer;
  }
  integrate_ego(scn, {0.0, 0.0, v0, 0.0}, kp);
  return scn;
}

Scenario build_intersection_turn(const ScenarioSpec & spec, const kbm::KbmParams & kp)
{
  ParamSampler ps(spec.params, spec.seed);
  Scenario scn = base_scenario(spec, kp, ps);
  const double v0 = ps.jitter("v0", 2.5, 3.5);
  Rng dir_stream = Rng(spec.seed).fork("dir");
  const double dir = ps.fixed("dir", dir_stream.below(2) == 0 ? 1.0 : -1.0);
  const double steer = ps.jitter("steer", 0.25, 0.35) * (dir >= 0.0 ? 1.0 : -1.0);
  scn.nav = dir >= 0.0 ? NavCommand::left : NavCommand::right;

  scn.ego_controls.assign(scn.total_steps(), {});
  for (int i = 2; i < scn.total_steps(); ++i) {
    scn.ego_controls[i].delta = steer;
  }
  integrate_ego(scn, {0.0, 0.0, v0, 0.0}, kp);
  return scn;
}

}  // namespace

Obb AgentTrack::obb_at(int step) const
{
  const kbm::VehicleState & s = states.at(step);
  return {s.x, s.y, length / 2.0, width / 2.0, s.psi};
}

kbm::Trajectory Scenario::expert_for_frame(int frame) const
{
  if (frame < 0 || frame >= frame_count) {
    throw Error("frame index out of range: " + std::to_string(frame));
  }
  kbm::Trajectory traj;
  traj.start = ego_states.at(frame);
  traj.points.resize(horizon_steps);
  for (int k = 0; k < horizon_steps; ++k) {
    const kbm::VehicleState & s = ego_states.at(frame + k + 1);
    traj.points[k] = {(k + 1) * dt, s.x, s.y, s.v, s.psi};
  }
  return traj;
}

Scenario build_scenario(const ScenarioSpec & spec, const kbm::KbmParams & kp)
{
  if (spec.template_name == "empty_road") {
    return build_empty_road(spec, kp);
  }
  if (spec.template_name == "pedestrian_crossing") {
    return build_pedestrian_crossing(spec, kp);
  }
  if (spec.template_name == "lead_vehicle") {
    return build_lead_vehicle(spec, kp);
  }
  if (spec.template_name == "lane_change") {
    return build_lane_change(spec, kp);
  }
  if (spec.template_name == "intersection_turn") {
    return build_intersection_turn(spec, kp);
  }
  throw UnknownTemplate("unknown scenario template: '" + spec.template_name + "'");
}

SceneFacts extract_facts(const Scenario & scn, int frame)
{
  if (frame < 0 || frame >= scn.frame_count) {
    throw Error("frame index out of range: " + std::to_string(frame));
  }
  const kbm::VehicleState & ego = scn.ego_at(frame);
  SceneFacts facts;
  facts.frame_id = scn.id + "_f" + std::to_string(frame);
  facts.ego.speed = ego.v;
  facts.ego.heading = ego.psi;
  facts.ego.nav = scn.nav;
  facts.ego.lane_id = 0;
  for (int i = std::max(0, frame - 4); i < frame; ++i) {
    facts.ego.history_speeds.push_back(scn.ego_at(i).v);
  }

  const double cp = std::cos(ego.psi);
  const double sp = std::sin(ego.psi);
  const double ego_vx = ego.v * cp;
  const double ego_vy = ego.v * sp;
  for (const AgentTrack & agent : scn.agents) {
    const kbm::VehicleState & a = agent.states.at(frame);
    ObjectFact obj;
    obj.id = agent.id;
    obj.category = agent.category;

    const double dx = a.x - ego.x;
    const double dy = a.y - ego.y;
    const double rx = cp * dx + sp * dy;   // along ego heading
    const double ry = -sp * dx + cp * dy;  // left of ego
    const double center_dist = std::hypot(rx, ry);
    // Bumper-gap distance, floored at 1 cm so a derived TTC stays positive.
    obj.distance = std::max(center_dist - scn.ego_length / 2.0 - agent.length / 2.0, 0.01);
    obj.speed = a.v;
    obj.heading = wrap_angle(a.psi - ego.psi);

    const double bearing = std::atan2(ry, rx) * 180.0 / kPi;
    const double ab = std::abs(bearing);
    if (ab < 30.0) {
      obj.relative_pos = RelativePos::front;
    } else if (ab < 75.0) {
      obj.relative_pos = bearing > 0.0 ? RelativePos::front_left : RelativePos::front_right;
    } else if (ab <= 105.0) {
      obj.relative_pos = bearing > 0.0 ? RelativePos::left : RelativePos::right;
    } else {
      obj.relative_pos = RelativePos::rear;
    }

    const double avx = a.v * std::cos(a.psi);
    const double avy = a.v * std::sin(a.psi);
    if (a.v < 0.1) {
      obj.attribute = Attribute::stationary;
    } else {
      const double along = cp * avx + sp * avy;
      const double cross = -sp * avx + cp * avy;
      obj.attribute = std::abs(cross) > std::abs(along) ? Attribute::crossing : Attribute::moving;
    }

    if (agent.ttc_fact > 0.0 && agent.ttc_fact_frame == frame) {
      obj.ttc = agent.ttc_fact;
    } else if (center_dist > 1e-9) {
      const double rvx = avx - ego_vx;
      const double rvy = avy - ego_vy;
      const double closing = -(dx * rvx + dy * rvy) / center_dist;
      obj.ttc = compute_ttc(obj.distance, closing);
    }
    facts.objects.push_back(obj);
  }
  std::sort(facts.objects.begin(), facts.objects.end(), [](const auto & l, const auto & r) {
    return l.id < r.id;
  });
  return facts;
}

std::vector<ScenarioSpec> load_suite(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open suite file: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error & e) {
    throw ConfigError("suite file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("scenarios") || !j["scenarios"].is_array()) {
    throw ConfigError("suite file must contain a 'scenarios' array");
  }
  std::vector<ScenarioSpec> specs;
  for (const json & entry : j["scenarios"]) {
    ScenarioSpec spec;
    if (!entry.contains("template") || !entry.contains("id")) {
      throw ConfigError("each suite entry needs 'template' and 'id'");
    }
    spec.template_name = entry["template"].get<std::string>();
    spec.id = entry["id"].get<std::string>();
    spec.seed = entry.value("seed", std::uint64_t{0});
    if (entry.contains("params")) {
      for (const auto & [key, value] : entry["params"].items()) {
        if (!value.is_number()) {
          throw ConfigError("scenario parameter '" + key + "' must be numeric");
        }
        spec.params[key] = value.get<double>();
      }
    }
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) {
    throw ConfigError("suite file lists no scenarios");
  }
  return specs;
}

}  // namespace nsplan::scen
