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

#include "nsplan/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nsplan/errors.hpp"
#include "nsplan/text.hpp"

namespace nsplan::pipe
{

namespace
{

using json = nlohmann::json;

json state_to_json(const kbm::VehicleState & s) { return json::array({s.x, s.y, s.v, s.psi}); }

kbm::VehicleState state_from_json(const json & j)
{
  if (!j.is_array() || j.size() != 4) {
    throw Error("trace state must be a 4-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json trajectory_to_json(const kbm::Trajectory & t)
{
  json pts = json::array();
  for (const kbm::Waypoint & p : t.points) {
    pts.push_back(json::array({p.t, p.x, p.y, p.v, p.psi}));
  }
  return pts;
}

std::vector<kbm::Waypoint> trajectory_points_from_json(const json & j)
{
  if (!j.is_array()) {
    throw Error("trace trajectory must be an array");
  }
  std::vector<kbm::Waypoint> pts;
  for (const json & p : j) {
    if (!p.is_array() || p.size() != 5) {
      throw Error("trace waypoint must be a 5-element array");
    }
    pts.push_back(
      {p[0].get<double>(), p[1].get<double>(), p[2].get<double>(), p[3].get<double>(),
       p[4].get<double>()});
  }
  return pts;
}

std::string vocab_str(std::string_view v) { return std::string(v); }

ActionSymbol need_action(const std::string & s)
{
  auto v = action_from_string(s);
  if (!v) throw Error("trace has unknown action: '" + s + "'");
  return *v;
}

SpeedSymbol need_speed(const std::string & s)
{
  auto v = speed_from_string(s);
  if (!v) throw Error("trace has unknown speed: '" + s + "'");
  return *v;
}

RuleType need_rule_type(const std::string & s)
{
  auto v = rule_type_from_string(s);
  if (!v) throw Error("trace has unknown rule type: '" + s + "'");
  return *v;
}

json suggestion_to_json(const Suggestion & s)
{
  return json::array(
    {vocab_str(to_string(s.action)), vocab_str(to_string(s.speed)), vocab_str(to_string(s.type)),
     s.provenance});
}

Suggestion suggestion_from_json(const json & j)
{
  if (!j.is_array() || j.size() != 4) {
    throw Error("trace suggestion must be a 4-element array");
  }
  Suggestion s;
  s.action = need_action(j[0].get<std::string>());
  s.speed = need_speed(j[1].get<std::string>());
  s.type = need_rule_type(j[2].get<std::string>());
  s.provenance = j[3].get<std::string>();
  return s;
}

FinalDecision no_asp_decision()
{
  return {ActionSymbol::keep_lane, SpeedSymbol::current, RuleType::efficiency, "ablation:no_asp"};
}

kbm::Trajectory to_world(const kbm::Trajectory & local, const kbm::VehicleState & pose)
{
  const double c = std::cos(pose.psi);
  const double s = std::sin(pose.psi);
  kbm::Trajectory out = local;
  out.start = {pose.x, pose.y, local.start.v, wrap_angle(pose.psi + local.start.psi)};
  for (kbm::Waypoint & p : out.points) {
    const double wx = pose.x + c * p.x - s * p.y;
    const double wy = pose.y + s * p.x + c * p.y;
    p.x = wx;
    p.y = wy;
    p.psi = wrap_angle(pose.psi + p.psi);
  }
  return out;
}

void compare_exact(
  std::vector<std::string> & out, const char * what, double got, double want)
{
  if (!(got == want)) {
    std::ostringstream os;
    os.precision(17);
    os << what << " differs: replay " << got << " vs trace " << want;
    out.push_back(os.str());
  }
}

std::string format_metric(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

Ablation ablation_from_string(const std::string & s)
{
  if (s.empty() || s == "none") return Ablation::none;
  if (s == "no-asp" || s == "no_asp") return Ablation::no_asp;
  if (s == "no-kbm-residual" || s == "no_kbm_residual") return Ablation::no_kbm_residual;
  if (s == "no-smoothing" || s == "no_smoothing") return Ablation::no_smoothing;
  throw ConfigError("unknown ablation: '" + s + "'");
}

std::string to_string(Ablation a)
{
  switch (a) {
    case Ablation::none: return "none";
    case Ablation::no_asp: return "no_asp";
    case Ablation::no_kbm_residual: return "no_kbm_residual";
    case Ablation::no_smoothing: return "no_smoothing";
  }
  return "none";
}

cond::PlanningQuery synthesize_query(
  double v0, NavCommand nav, const cond::ConditioningConfig & cfg)
{
  double nav_code = 0.0;
  if (nav == NavCommand::left) nav_code = 1.0;
  if (nav == NavCommand::right) nav_code = -1.0;
  cond::PlanningQuery q = cond::PlanningQuery::zeros(1, cfg.modes, cfg.feature_dim);
  for (int m = 0; m < cfg.modes; ++m) {
    for (int j = 0; j < cfg.feature_dim; ++j) {
      q.data(m, j) = 0.08 * std::sin(0.37 * j + 0.91 * m + 0.2) +
                     0.06 * (v0 / 12.0) * std::cos(0.23 * j + 0.57 * m) +
                     0.07 * nav_code * std::sin(0.11 * j + 0.3 * m + 0.5);
    }
  }
  return q;
}

std::string FrameTrace::to_json_line() const
{
  json j;
  j["scenario"] = scenario_id;
  j["frame"] = frame;
  j["t"] = t;
  j["ego_pose"] = state_to_json(ego_pose);
  j["ablation"] = ablation;
  j["facts"] = facts_text;
  json sugg = json::array();
  for (const Suggestion & s : suggestions) {
    sugg.push_back(suggestion_to_json(s));
  }
  j["suggestions"] = sugg;
  j["generator_error"] = generator_error;
  j["notes"] = notes;
  j["decision"] = json::array(
    {vocab_str(to_string(decision.action)), vocab_str(to_string(decision.speed)),
     vocab_str(to_string(decision.tier)), decision.winning_provenance});
  j["d_norm"] = d_norm;
  j["b_v"] = b_v;
  j["v0_prime"] = v0_prime;
  j["mode"] = mode;
  json ctrl = json::array();
  for (const kbm::ControlStep & c : controls) {
    ctrl.push_back(json::array({c.a, c.delta}));
  }
  j["controls"] = ctrl;
  j["start"] = state_to_json(physics.start);
  j["physics"] = trajectory_to_json(physics);
  json res = json::array();
  for (const auto & r : residual) {
    res.push_back(json::array({r[0], r[1]}));
  }
  j["residual"] = res;
  j["final"] = trajectory_to_json(final_traj);
  return j.dump();
}

FrameTrace FrameTrace::from_json_line(const std::string & line)
{
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error & e) {
    throw Error("trace line is not valid JSON: " + std::string(e.what()));
  }
  FrameTrace t;
  t.scenario_id = j.at("scenario").get<std::string>();
  t.frame = j.at("frame").get<int>();
  t.t = j.at("t").get<double>();
  t.ego_pose = state_from_json(j.at("ego_pose"));
  t.ablation = j.at("ablation").get<std::string>();
  t.facts_text = j.at("facts").get<std::string>();
  for (const json & s : j.at("suggestions")) {
    t.suggestions.push_back(suggestion_from_json(s));
  }
  t.generator_error = j.at("generator_error").get<std::string>();
  for (const json & n : j.at("notes")) {
    t.notes.push_back(n.get<std::string>());
  }
  const json & d = j.at("decision");
  if (!d.is_array() || d.size() != 4) {
    throw Error("trace decision must be a 4-element array");
  }
  t.decision.action = need_action(d[0].get<std::string>());
  t.decision.speed = need_speed(d[1].get<std::string>());
  t.decision.tier = need_rule_type(d[2].get<std::string>());
  t.decision.winning_provenance = d[3].get<std::string>();
  t.d_norm = j.at("d_norm").get<double>();
  t.b_v = j.at("b_v").get<double>();
  t.v0_prime = j.at("v0_prime").get<double>();
  t.mode = j.at("mode").get<int>();
  for (const json & c : j.at("controls")) {
    if (!c.is_array() || c.size() != 2) {
      throw Error("trace control must be a 2-element array");
    }
    t.controls.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  t.physics.start = state_from_json(j.at("start"));
  t.physics.points = trajectory_points_from_json(j.at("physics"));
  for (const json & r : j.at("residual")) {
    if (!r.is_array() || r.size() != 2) {
      throw Error("trace residual entry must be a 2-element array");
    }
    t.residual.push_back({r[0].get<double>(), r[1].get<double>()});
  }
  t.final_traj.start = t.physics.start;
  t.final_traj.points = trajectory_points_from_json(j.at("final"));
  return t;
}

FrameResult run_frame(
  const scen::Scenario & scn, int frame, const cond::ModelWeights & weights,
  const PipelineConfig & cfg, rules::RuleGenerator & generator, Ablation ablation)
{
  FrameResult out;
  FrameTrace & tr = out.trace;
  tr.scenario_id = scn.id;
  tr.frame = frame;
  tr.t = frame * scn.dt;
  tr.ego_pose = scn.ego_at(frame);
  tr.ablation = to_string(ablation);

  // Canonical text round trip: planning consumes exactly what the trace
  // records, so a replay starts from identical numbers.
  SceneFacts facts = scen::extract_facts(scn, frame);
  tr.facts_text = text::serialize_facts(facts);
  facts = text::parse_facts(tr.facts_text).facts;

  FinalDecision decision;
  if (ablation == Ablation::no_asp) {
    decision = no_asp_decision();
  } else {
    rules::DecideResult dec = rules::decide(facts, generator, cfg.arbitration);
    decision = dec.decision;
    tr.suggestions = std::move(dec.considered);
    tr.generator_error = std::move(dec.generator_error);
    tr.notes = std::move(dec.notes);
  }
  tr.decision = decision;

  const cond::PlanningQuery query =
    synthesize_query(facts.ego.speed, facts.ego.nav, cfg.conditioning);
  cond::PlanOptions opts;
  opts.disable_residual = ablation == Ablation::no_kbm_residual;
  cond::PlanResult plan = cond::plan_forward(
    query, decision, facts.ego.speed, weights, cfg.conditioning, cfg.kbm, opts);

  tr.d_norm = plan.d.norm();
  tr.b_v = plan.bias.b_v;
  tr.v0_prime = plan.bias.v0_prime;
  tr.mode = plan.selected_mode;
  tr.controls = plan.controls;
  tr.physics = plan.physics;
  tr.residual.resize(plan.residual_bounded.rows());
  for (int k = 0; k < plan.residual_bounded.rows(); ++k) {
    tr.residual[k] = {plan.residual_bounded(k, 0), plan.residual_bounded(k, 1)};
  }
  tr.final_traj = plan.final_traj;

  out.final_world = to_world(plan.final_traj, tr.ego_pose);
  return out;
}

std::vector<std::string> replay_frame(
  const FrameTrace & trace, const cond::ModelWeights & weights, const PipelineConfig & cfg)
{
  std::vector<std::string> mismatches;
  SceneFacts facts;
  try {
    facts = text::parse_facts(trace.facts_text).facts;
  } catch (const text::ParseError & e) {
    mismatches.push_back(std::string("recorded facts do not parse: ") + e.what());
    return mismatches;
  }
  if (text::serialize_facts(facts) != trace.facts_text) {
    mismatches.push_back("recorded facts are not canonical");
  }

  FinalDecision decision;
  if (trace.ablation == "no_asp") {
    decision = no_asp_decision();
  } else {
    decision = rules::arbitrate(trace.suggestions, cfg.arbitration, facts.ego.speed);
  }
  if (!(decision == trace.decision)) {
    mismatches.push_back(
      "decision differs: replay (" + vocab_str(to_string(decision.action)) + ", " +
      vocab_str(to_string(decision.speed)) + ", " + vocab_str(to_string(decision.tier)) + ", " +
      decision.winning_provenance + ")");
  }

  const cond::PlanningQuery query =
    synthesize_query(facts.ego.speed, facts.ego.nav, cfg.conditioning);
  cond::PlanOptions opts;
  opts.disable_residual = trace.ablation == "no_kbm_residual";
  cond::PlanResult plan = cond::plan_forward(
    query, trace.decision, facts.ego.speed, weights, cfg.conditioning, cfg.kbm, opts);

  compare_exact(mismatches, "d_norm", plan.d.norm(), trace.d_norm);
  compare_exact(mismatches, "b_v", plan.bias.b_v, trace.b_v);
  compare_exact(mismatches, "v0_prime", plan.bias.v0_prime, trace.v0_prime);
  if (plan.selected_mode != trace.mode) {
    mismatches.push_back("selected mode differs");
  }
  if (plan.controls.size() != trace.controls.size()) {
    mismatches.push_back("control count differs");
  } else {
    for (std::size_t k = 0; k < plan.controls.size(); ++k) {
      compare_exact(mismatches, "control accel", plan.controls[k].a, trace.controls[k].a);
      compare_exact(mismatches, "control steer", plan.controls[k].delta, trace.controls[k].delta);
    }
  }
  auto compare_traj = [&](const char * what, const kbm::Trajectory & got,
                          const kbm::Trajectory & want) {
    if (got.points.size() != want.points.size()) {
      mismatches.push_back(std::string(what) + " waypoint count differs");
      return;
    }
    for (std::size_t k = 0; k < got.points.size(); ++k) {
      compare_exact(mismatches, what, got.points[k].x, want.points[k].x);
      compare_exact(mismatches, what, got.points[k].y, want.points[k].y);
      compare_exact(mismatches, what, got.points[k].v, want.points[k].v);
      compare_exact(mismatches, what, got.points[k].psi, want.points[k].psi);
    }
  };
  compare_traj("physics", plan.physics, trace.physics);
  compare_traj("final", plan.final_traj, trace.final_traj);
  if (plan.residual_bounded.rows() != static_cast<int>(trace.residual.size())) {
    mismatches.push_back("residual count differs");
  } else {
    for (int k = 0; k < plan.residual_bounded.rows(); ++k) {
      compare_exact(mismatches, "residual x", plan.residual_bounded(k, 0), trace.residual[k][0]);
      compare_exact(mismatches, "residual y", plan.residual_bounded(k, 1), trace.residual[k][1]);
    }
  }
  return mismatches;
}

SuiteResult evaluate(
  const std::vector<scen::ScenarioSpec> & specs, const cond::ModelWeights & weights,
  const PipelineConfig & cfg, const std::string & generator_spec, Ablation ablation)
{
  if (specs.empty()) {
    throw EmptyInput("evaluation suite is empty");
  }
  SuiteResult out;
  metrics::MetricsReport & agg = out.aggregate;
  for (const scen::ScenarioSpec & spec : specs) {
    scen::Scenario scn;
    try {
      scn = scen::build_scenario(spec, cfg.kbm);
    } catch (const Error & e) {
      throw Error("scenario '" + spec.id + "': " + e.what());
    }
    std::unique_ptr<rules::RuleGenerator> generator = rules::make_generator(generator_spec);

    ScenarioResult sr;
    sr.scenario_id = scn.id;
    std::vector<kbm::Trajectory> world_plans;
    int collisions = 0;
    metrics::HorizonValues l2_sum;
    for (int f = 0; f < scn.frame_count; ++f) {
      FrameResult fr;
      try {
        fr = run_frame(scn, f, weights, cfg, *generator, ablation);
      } catch (const Error & e) {
        throw Error("scenario '" + spec.id + "' frame " + std::to_string(f) + ": " + e.what());
      }
      const kbm::Trajectory expert = scn.expert_for_frame(f);
      const metrics::HorizonValues l2 = metrics::l2_metric(fr.final_world, expert);
      l2_sum.at_1s += l2.at_1s;
      l2_sum.at_2s += l2.at_2s;
      l2_sum.at_3s += l2.at_3s;
      l2_sum.avg += l2.avg;
      if (metrics::collision_metric(fr.final_world, scn, f)) {
        ++collisions;
      }
      world_plans.push_back(fr.final_world);
      sr.traces.push_back(std::move(fr.trace));
    }
    const double n = scn.frame_count;
    sr.report.l2 = {l2_sum.at_1s / n, l2_sum.at_2s / n, l2_sum.at_3s / n, l2_sum.avg / n};
    sr.report.collision_rate = collisions / n;
    sr.report.tpc =
      scn.frame_count >= 2 ? metrics::tpc_metric(world_plans, scn.dt) : metrics::HorizonValues{};
    sr.report.frames = scn.frame_count;
    out.scenarios.push_back(std::move(sr));
  }

  const double m = out.scenarios.size();
  for (const ScenarioResult & sr : out.scenarios) {
    agg.l2.at_1s += sr.report.l2.at_1s / m;
    agg.l2.at_2s += sr.report.l2.at_2s / m;
    agg.l2.at_3s += sr.report.l2.at_3s / m;
    agg.l2.avg += sr.report.l2.avg / m;
    agg.collision_rate += sr.report.collision_rate / m;
    agg.tpc.at_1s += sr.report.tpc.at_1s / m;
    agg.tpc.at_2s += sr.report.tpc.at_2s / m;
    agg.tpc.at_3s += sr.report.tpc.at_3s / m;
    agg.tpc.avg += sr.report.tpc.avg / m;
    agg.frames += sr.report.frames;
  }
  return out;
}

std::string SuiteResult::metrics_csv() const
{
  std::string csv = "scenario,l2_1s,l2_2s,l2_3s,l2_avg,col_rate,tpc_1s,tpc_2s,tpc_3s,tpc_avg\n";
  auto row = [&](const std::string & name, const metrics::MetricsReport & r) {
    csv += name;
    for (double v :
         {r.l2.at_1s, r.l2.at_2s, r.l2.at_3s, r.l2.avg, r.collision_rate, r.tpc.at_1s,
          r.tpc.at_2s, r.tpc.at_3s, r.tpc.avg}) {
      csv += ",";
      csv += format_metric(v);
    }
    csv += "\n";
  };
  for (const ScenarioResult & sr : scenarios) {
    row(sr.scenario_id, sr.report);
  }
  row("aggregate", aggregate);
  return csv;
}

}  // namespace nsplan::pipe
