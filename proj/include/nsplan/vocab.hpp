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

#ifndef NSPLAN_VOCAB_HPP_
#define NSPLAN_VOCAB_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

// Closed symbol vocabularies of the predicate layer. Every enum here is a
// fixed set: parsing anything outside of it is a vocabulary error, never a
// silent passthrough.

namespace nsplan
{

enum class ActionSymbol {
  keep_lane,
  change_lane_left,
  change_lane_right,
  turn_left,
  turn_right,
  nudge_left,
  nudge_right,
  yield,
  emergency_stop,
};
inline constexpr std::size_t kActionCount = 9;

enum class SpeedSymbol {
  current,
  zero,
  creep,
  slow,
  normal,
  fast,
};
inline constexpr std::size_t kSpeedCount = 6;

enum class NavCommand {
  left,
  right,
  straight,
};
inline constexpr std::size_t kNavCount = 3;

// Rule tiers, highest priority first.
enum class RuleType {
  emergency,
  safety,
  legal,
  comfort,
  efficiency,
};
inline constexpr std::size_t kRuleTypeCount = 5;

enum class Category {
  pedestrian,
  vehicle,
  cyclist,
  barrier,
};
inline constexpr std::size_t kCategoryCount = 4;

enum class RelativePos {
  front,
  front_left,
  front_right,
  left,
  right,
  rear,
};
inline constexpr std::size_t kRelativePosCount = 6;

enum class Attribute {
  moving,
  stationary,
  crossing,
};
inline constexpr std::size_t kAttributeCount = 3;

std::string_view to_string(ActionSymbol a);
std::string_view to_string(SpeedSymbol s);
std::string_view to_string(NavCommand n);
std::string_view to_string(RuleType t);
std::string_view to_string(Category c);
std::string_view to_string(RelativePos p);
std::string_view to_string(Attribute a);

std::optional<ActionSymbol> action_from_string(std::string_view s);
std::optional<SpeedSymbol> speed_from_string(std::string_view s);
std::optional<NavCommand> nav_from_string(std::string_view s);
std::optional<RuleType> rule_type_from_string(std::string_view s);
std::optional<Category> category_from_string(std::string_view s);
std::optional<RelativePos> relative_pos_from_string(std::string_view s);
std::optional<Attribute> attribute_from_string(std::string_view s);

// Smaller value = higher priority. emergency outranks safety outranks legal
// outranks comfort outranks efficiency.
inline constexpr int tier_priority(RuleType t) { return static_cast<int>(t); }

// Conservatism order used to break ties inside a tier: emergency_stop >
// yield > nudge_* > change_lane_* > turn_* > keep_lane. Smaller = preferred.
int action_severity(ActionSymbol a);

// Numeric targets (m/s) for the symbolic speeds. `current` resolves to the
// ego speed supplied by the caller.
struct SpeedTargets
{
  double creep{1.5};
  double slow{3.0};
  double normal{8.0};
  double fast{12.0};

  double resolve(SpeedSymbol s, double ego_speed) const
  {
    switch (s) {
      case SpeedSymbol::current:
        return ego_speed;
      case SpeedSymbol::zero:
        return 0.0;
      case SpeedSymbol::creep:
        return creep;
      case SpeedSymbol::slow:
        return slow;
      case SpeedSymbol::normal:
        return normal;
      case SpeedSymbol::fast:
        return fast;
    }
    return ego_speed;
  }
};

}  // namespace nsplan

#endif  // NSPLAN_VOCAB_HPP_
