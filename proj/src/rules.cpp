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

#include "nsplan/rules.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "nsplan/text.hpp"

namespace nsplan::rules
{
namespace
{

enum class SpeedRegime { stopped, slow, cruising, fast };

SpeedRegime speed_regime(double v)
{
  if (v < 0.5) return SpeedRegime::stopped;
  if (v < 4.0) return SpeedRegime::slow;
  if (v < 9.0) return SpeedRegime::cruising;
  return SpeedRegime::fast;
}

enum class TtcBucket { critical, near, far };

TtcBucket ttc_bucket(double ttc)
{
  if (ttc < 1.5) return TtcBucket::critical;
  if (ttc < 4.0) return TtcBucket::near;
  return TtcBucket::far;
}

// Most imminent object: smallest ttc, then smallest distance, then id.
const ObjectFact * threat_object(const SceneFacts & facts)
{
  const ObjectFact * best = nullptr;
  for (const ObjectFact & o : facts.objects) {
    if (
      !best || std::tie(o.ttc, o.distance, o.id) < std::tie(best->ttc, best->distance, best->id)) {
      best = &o;
    }
  }
  return best;
}

Suggestion make(ActionSymbol a, SpeedSymbol s, RuleType t, const char * prov)
{
  return Suggestion{a, s, t, prov};
}

Suggestion threat_rule(const ObjectFact & o)
{
  const TtcBucket b = ttc_bucket(o.ttc);
  switch (o.category) {
    case Category::pedestrian:
      if (b == TtcBucket::critical)
        return make(
          ActionSymbol::yield, SpeedSymbol::zero, RuleType::safety,
          "template:threat_pedestrian_critical");
      if (b == TtcBucket::near)
        return make(
          ActionSymbol::yield, SpeedSymbol::slow, RuleType::safety,
          "template:threat_pedestrian_near");
      return make(
        ActionSymbol::keep_lane, SpeedSymbol::slow, RuleType::comfort,
        "template:threat_pedestrian_far");
    case Category::vehicle:
      if (b == TtcBucket::critical)
        return make(
          ActionSymbol::yield, SpeedSymbol::slow, RuleType::safety,
          "template:threat_vehicle_critical");
      if (b == TtcBucket::near)
        return make(
          ActionSymbol::keep_lane, SpeedSymbol::slow, RuleType::comfort,
          "template:threat_vehicle_near");
      return make(
        ActionSymbol::keep_lane, SpeedSymbol::current, RuleType::efficiency,
        "template:threat_vehicle_far");
    case Category::cyclist:
      if (b == TtcBucket::critical)
        return make(
          ActionSymbol::yield, SpeedSymbol::slow, RuleType::safety,
          "template:threat_cyclist_critical");
      if (b == TtcBucket::near)
        return make(
          ActionSymbol::nudge_left, SpeedSymbol::slow, RuleType::safety,
          "template:threat_cyclist_near");
      return make(
        ActionSymbol::keep_lane, SpeedSymbol::current, RuleType::comfort,
        "template:threat_cyclist_far");
    case Category::barrier:
      if (b == TtcBucket::critical)
        return make(
          ActionSymbol::nudge_left, SpeedSymbol::zero, RuleType::safety,
          "template:threat_barrier_critical");
      if (b == TtcBucket::near)
        return make(
          ActionSymbol::nudge_left, SpeedSymbol::slow, RuleType::safety,
          "template:threat_barrier_near");
      return make(
        ActionSymbol::keep_lane, SpeedSymbol::current, RuleType::efficiency,
        "template:threat_barrier_far");
  }
  return make(
    ActionSymbol::keep_lane, SpeedSymbol::slow, RuleType::comfort, "template:threat_unknown");
}

std::string read_file(const std::string & path, bool & ok)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ok = false;
    return {};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  ok = true;
  return buf.str();
}

}  // namespace

std::vector<Suggestion> TemplateGenerator::generate(const SceneFacts & facts)
{
  notes_.clear();
  std::vector<Suggestion> out;
  const SpeedRegime regime = speed_regime(facts.ego.speed);
  const bool lateral_is_turn = facts.ego.speed < 4.0;

  // Navigation rule. Facts carry no road topology, so the speed regime
  // separates the intersection turn from the lane change.
  switch (facts.ego.nav) {
    case NavCommand::straight:
      out.push_back(make(
        ActionSymbol::keep_lane, SpeedSymbol::normal, RuleType::efficiency,
        "template:nav_straight"));
      break;
    case NavCommand::left:
      out.push_back(
        lateral_is_turn
          ? make(ActionSymbol::turn_left, SpeedSymbol::slow, RuleType::legal,
                 "template:nav_turn_left")
          : make(ActionSymbol::change_lane_left, SpeedSymbol::current, RuleType::legal,
                 "template:nav_lane_left"));
      break;
    case NavCommand::right:
      out.push_back(
        lateral_is_turn
          ? make(ActionSymbol::turn_right, SpeedSymbol::slow, RuleType::legal,
                 "template:nav_turn_right")
          : make(ActionSymbol::change_lane_right, SpeedSymbol::current, RuleType::legal,
                 "template:nav_lane_right"));
      break;
  }

  // Response to the most imminent object.
  if (const ObjectFact * threat = threat_object(facts)) {
    out.push_back(threat_rule(*threat));
  }

  // Speed management.
  switch (regime) {
    case SpeedRegime::stopped:
      out.push_back(make(
        ActionSymbol::keep_lane, SpeedSymbol::creep, RuleType::efficiency, "template:pull_away"));
      break;
    case SpeedRegime::slow:
      out.push_back(make(
        ActionSymbol::keep_lane, SpeedSymbol::normal, RuleType::efficiency, "template:speed_up"));
      break;
    case SpeedRegime::cruising:
      out.push_back(make(
        ActionSymbol::keep_lane, SpeedSymbol::current, RuleType::efficiency,
        "template:hold_speed"));
      break;
    case SpeedRegime::fast:
      out.push_back(make(
        ActionSymbol::keep_lane, SpeedSymbol::normal, RuleType::comfort, "template:ease_off"));
      break;
  }

  // Clear road ahead.
  if (
    facts.objects.empty() && facts.ego.nav == NavCommand::straight &&
    (regime == SpeedRegime::cruising || regime == SpeedRegime::fast)) {
    out.push_back(
      make(ActionSymbol::keep_lane, SpeedSymbol::fast, RuleType::efficiency, "template:open_road"));
  }

  // Recent speed jitter.
  if (facts.ego.history_speeds.size() >= 3) {
    const auto [lo, hi] =
      std::minmax_element(facts.ego.history_speeds.begin(), facts.ego.history_speeds.end());
    if (*hi - *lo > 2.0) {
      out.push_back(make(
        ActionSymbol::keep_lane, SpeedSymbol::current, RuleType::comfort,
        "template:smooth_speed"));
    }
  }

  // Make progress.
  out.push_back(
    make(ActionSymbol::keep_lane, SpeedSymbol::current, RuleType::efficiency, "template:progress"));

  return out;
}

std::vector<Suggestion> sanitize_generated(
  std::vector<Suggestion> valid, const std::vector<std::string> & rejected,
  std::vector<std::string> & notes)
{
  for (const std::string & r : rejected) {
    notes.push_back("dropped: " + r);
  }
  if (valid.size() > 6) {
    notes.push_back(
      "truncated " + std::to_string(valid.size()) + " valid suggestions to the first 6");
    valid.resize(6);
  }
  if (valid.size() < 3) {
    throw GeneratorFailure(
      "generator returned " + std::to_string(valid.size()) + " valid suggestions, need 3 to 6");
  }
  return valid;
}

std::vector<Suggestion> CacheGenerator::generate(const SceneFacts & facts)
{
  notes_.clear();
  if (facts.frame_id.empty()) {
    throw GeneratorFailure("cache generator needs a frame id");
  }
  const std::string path = dir_ + "/" + facts.frame_id + ".lp";
  bool ok = false;
  const std::string body = read_file(path, ok);
  if (!ok) {
    throw GeneratorFailure("no cache entry: " + path);
  }
  auto parsed = text::parse_suggestions_lenient(body, name());
  return sanitize_generated(std::move(parsed.accepted), parsed.rejected, notes_);
}

std::vector<Suggestion> apply_axioms(const SceneFacts & facts, const ArbitrationConfig & cfg)
{
  double min_ttc = std::numeric_limits<double>::infinity();
  for (const ObjectFact & o : facts.objects) {
    min_ttc = std::min(min_ttc, o.ttc);
  }
  std::vector<Suggestion> out;
  if (min_ttc < cfg.ttc_emergency_s) {
    out.push_back(make(
      ActionSymbol::emergency_stop, SpeedSymbol::zero, RuleType::emergency,
      "axiom:emergency_brake"));
  } else if (min_ttc < cfg.ttc_safety_s) {
    out.push_back(
      make(ActionSymbol::yield, SpeedSymbol::zero, RuleType::safety, "axiom:safe_following"));
  }
  return out;
}

FinalDecision arbitrate(
  const std::vector<Suggestion> & suggestions, const ArbitrationConfig & cfg, double ego_speed)
{
  if (suggestions.empty()) {
    throw EmptyInput("arbitrate: no suggestions");
  }
  const Suggestion * best = nullptr;
  auto key = [&](const Suggestion & s) {
    return std::make_tuple(
      tier_priority(s.type), cfg.speed_targets.resolve(s.speed, ego_speed),
      action_severity(s.action), std::string_view(s.provenance));
  };
  for (const Suggestion & s : suggestions) {
    if (!best || key(s) < key(*best)) {
      best = &s;
    }
  }
  return FinalDecision{best->action, best->speed, best->type, best->provenance};
}

DecideResult decide(
  const SceneFacts & facts, RuleGenerator & generator, const ArbitrationConfig & cfg)
{
  DecideResult result;
  result.considered = apply_axioms(facts, cfg);
  try {
    std::vector<Suggestion> generated = generator.generate(facts);
    result.notes = generator.last_notes();
    result.considered.insert(result.considered.end(), generated.begin(), generated.end());
  } catch (const GeneratorFailure & e) {
    // Fail safe: continue on axioms plus the default, never without them.
    result.generator_error = e.what();
  }
  result.considered.push_back(
    make(ActionSymbol::keep_lane, SpeedSymbol::current, RuleType::efficiency, "default"));
  result.decision = arbitrate(result.considered, cfg, facts.ego.speed);
  return result;
}

std::unique_ptr<RuleGenerator> make_generator(const std::string & spec)
{
  if (spec == "template") {
    return std::make_unique<TemplateGenerator>();
  }
  if (spec.rfind("cache:", 0) == 0) {
    const std::string dir = spec.substr(6);
    if (dir.empty()) {
      throw ConfigError("generator spec 'cache:' needs a directory");
    }
    return std::make_unique<CacheGenerator>(dir);
  }
  if (spec.rfind("http://", 0) == 0) {
    return std::make_unique<HttpGenerator>(spec);
  }
  if (spec.rfind("http:", 0) == 0) {
    return std::make_unique<HttpGenerator>("http://" + spec.substr(5));
  }
  throw ConfigError("unknown generator spec: " + spec + " (template | cache:<dir> | http:<url>)");
}

}  // namespace nsplan::rules
