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

#ifndef NSPLAN_FACTS_HPP_
#define NSPLAN_FACTS_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nsplan/vocab.hpp"

namespace nsplan
{

inline constexpr double kPi = 3.14159265358979323846;

// Normalize an angle to (-pi, pi].
inline double wrap_angle(double a)
{
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

// Time to collision under the instantaneous constant-closing-speed model.
// Non-closing objects have no finite TTC.
inline double compute_ttc(double distance, double closing_speed)
{
  constexpr double kEps = 1e-9;
  if (closing_speed <= kEps) return std::numeric_limits<double>::infinity();
  return distance / closing_speed;
}

// One tracked object, as seen from the ego frame. `distance` is the
// line-of-sight gap between box surfaces (bumper gap), not center-to-center.
struct ObjectFact
{
  std::int64_t id{0};
  Category category{Category::vehicle};
  double distance{0.0};   // m, >= 0
  double speed{0.0};      // m/s, >= 0
  double heading{0.0};    // rad, (-pi, pi]
  RelativePos relative_pos{RelativePos::front};
  Attribute attribute{Attribute::moving};
  double ttc{std::numeric_limits<double>::infinity()};  // s, > 0 or +inf

  bool operator==(const ObjectFact &) const = default;
};

struct EgoFacts
{
  double speed{0.0};    // m/s, >= 0
  double heading{0.0};  // rad, (-pi, pi], world frame
  NavCommand nav{NavCommand::straight};
  std::int64_t lane_id{0};
  std::vector<double> history_speeds;  // most recent last

  bool operator==(const EgoFacts &) const = default;
};

struct SceneFacts
{
  std::string frame_id;  // opaque token, may be empty
  EgoFacts ego;
  std::vector<ObjectFact> objects;

  bool operator==(const SceneFacts &) const = default;
};

// One candidate decision emitted by an axiom, the template generator, or an
// external rule generator. `provenance` names the emitting rule and is part
// of the deterministic tie-break.
struct Suggestion
{
  ActionSymbol action{ActionSymbol::keep_lane};
  SpeedSymbol speed{SpeedSymbol::current};
  RuleType type{RuleType::efficiency};
  std::string provenance;

  bool operator==(const Suggestion &) const = default;
};

struct FinalDecision
{
  ActionSymbol action{ActionSymbol::keep_lane};
  SpeedSymbol speed{SpeedSymbol::current};
  RuleType tier{RuleType::efficiency};
  std::string winning_provenance;

  bool operator==(const FinalDecision &) const = default;
};

}  // namespace nsplan

#endif  // NSPLAN_FACTS_HPP_
