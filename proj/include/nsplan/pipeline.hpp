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

#ifndef NSPLAN_PIPELINE_HPP_
#define NSPLAN_PIPELINE_HPP_

#include <array>
#include <string>
#include <vector>

#include "nsplan/conditioning.hpp"
#include "nsplan/metrics.hpp"
#include "nsplan/rules.hpp"
#include "nsplan/scenario.hpp"

// Per-frame pipeline: extract facts, canonicalize them through the text
// round trip, decide, condition, roll out, combine, and record a trace that
// is sufficient to replay the frame bit for bit. Planning happens in the ego
// frame (start pose at the origin); the harness transforms to world
// coordinates for metrics.

namespace nsplan::pipe
{

enum class Ablation
{
  none,
  no_asp,           // bypass the deductive layer: decision fixed to (keep_lane, current)
  no_kbm_residual,  // zero the residual correction field
  no_smoothing,     // train without the control smoothing loss
};

Ablation ablation_from_string(const std::string & s);
std::string to_string(Ablation a);

struct PipelineConfig
{
  kbm::KbmParams kbm;
  rules::ArbitrationConfig arbitration;
  cond::ConditioningConfig conditioning;
};

// Deterministic stand-in for a perception feature extractor: mode features
// derived only from ego speed and the nav command, never from objects, so
// scene hazards can reach the planner solely through the deductive path.
cond::PlanningQuery synthesize_query(
  double v0, NavCommand nav, const cond::ConditioningConfig & cfg);

// Everything needed to audit and replay one frame.
struct FrameTrace
{
  std::string scenario_id;
  int frame{0};
  double t{0.0};
  kbm::VehicleState ego_pose;  // world pose the plan is anchored to
  std::string ablation{"none"};
  std::string facts_text;  // canonical serialization
  std::vector<Suggestion> suggestions;  // all considered (axioms, generator, default)
  std::string generator_error;
  std::vector<std::string> notes;
  FinalDecision decision;
  double d_norm{0.0};
  double b_v{0.0};
  double v0_prime{0.0};
  int mode{0};
  std::vector<kbm::ControlStep> controls;
  kbm::Trajectory physics;              // ego frame
  std::vector<std::array<double, 2>> residual;  // bounded offsets per waypoint
  kbm::Trajectory final_traj;           // ego frame

  std::string to_json_line() const;
  static FrameTrace from_json_line(const std::string & line);
};

struct FrameResult
{
  FrameTrace trace;
  kbm::Trajectory final_world;
};

FrameResult run_frame(
  const scen::Scenario & scn, int frame, const cond::ModelWeights & weights,
  const PipelineConfig & cfg, rules::RuleGenerator & generator, Ablation ablation);

// Re-runs arbitration and planning from the recorded facts/suggestions and
// compares every value exactly. Returns human-readable mismatch notes;
// empty means the frame replays bit-identically.
std::vector<std::string> replay_frame(
  const FrameTrace & trace, const cond::ModelWeights & weights, const PipelineConfig & cfg);

struct ScenarioResult
{
  std::string scenario_id;
  metrics::MetricsReport report;
  std::vector<FrameTrace> traces;
};

struct SuiteResult
{
  std::vector<ScenarioResult> scenarios;
  metrics::MetricsReport aggregate;  // unweighted mean over scenarios

  std::string metrics_csv() const;
};

SuiteResult evaluate(
  const std::vector<scen::ScenarioSpec> & specs, const cond::ModelWeights & weights,
  const PipelineConfig & cfg, const std::string & generator_spec, Ablation ablation);

}  // namespace nsplan::pipe

#endif  // NSPLAN_PIPELINE_HPP_
