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

#include "nsplan/vocab.hpp"

namespace nsplan
{
namespace
{

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N> & names, std::string_view s)
{
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, kActionCount> kActionNames{
  "keep_lane",  "change_lane_left", "change_lane_right", "turn_left",      "turn_right",
  "nudge_left", "nudge_right",      "yield",             "emergency_stop",
};

constexpr std::array<std::string_view, kSpeedCount> kSpeedNames{
  "current", "zero", "creep", "slow", "normal", "fast",
};

constexpr std::array<std::string_view, kNavCount> kNavNames{"left", "right", "straight"};

constexpr std::array<std::string_view, kRuleTypeCount> kRuleTypeNames{
  "emergency", "safety", "legal", "comfort", "efficiency",
};

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames{
  "pedestrian", "vehicle", "cyclist", "barrier"};

constexpr std::array<std::string_view, kRelativePosCount> kRelativePosNames{
  "front", "front_left", "front_right", "left", "right", "rear"};

constexpr std::array<std::string_view, kAttributeCount> kAttributeNames{
  "moving", "stationary", "crossing"};

}  // namespace

std::string_view to_string(ActionSymbol a) { return kActionNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(SpeedSymbol s) { return kSpeedNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(NavCommand n) { return kNavNames[static_cast<std::size_t>(n)]; }
std::string_view to_string(RuleType t) { return kRuleTypeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(RelativePos p) { return kRelativePosNames[static_cast<std::size_t>(p)]; }
std::string_view to_string(Attribute a) { return kAttributeNames[static_cast<std::size_t>(a)]; }

std::optional<ActionSymbol> action_from_string(std::string_view s)
{
  return lookup<ActionSymbol>(kActionNames, s);
}
std::optional<SpeedSymbol> speed_from_string(std::string_view s)
{
  return lookup<SpeedSymbol>(kSpeedNames, s);
}
std::optional<NavCommand> nav_from_string(std::string_view s)
{
  return lookup<NavCommand>(kNavNames, s);
}
std::optional<RuleType> rule_type_from_string(std::string_view s)
{
  return lookup<RuleType>(kRuleTypeNames, s);
}
std::optional<Category> category_from_string(std::string_view s)
{
  return lookup<Category>(kCategoryNames, s);
}
std::optional<RelativePos> relative_pos_from_string(std::string_view s)
{
  return lookup<RelativePos>(kRelativePosNames, s);
}
std::optional<Attribute> attribute_from_string(std::string_view s)
{
  return lookup<Attribute>(kAttributeNames, s);
}

int action_severity(ActionSymbol a)
{
  switch (a) {
    case ActionSymbol::emergency_stop:
      return 0;
    case ActionSymbol::yield:
      return 1;
    case ActionSymbol::nudge_left:
      return 2;
    case ActionSymbol::nudge_right:
      return 3;
    case ActionSymbol::change_lane_left:
      return 4;
    case ActionSymbol::change_lane_right:
      return 5;
    case ActionSymbol::turn_left:
      return 6;
    case ActionSymbol::turn_right:
      return 7;
    case ActionSymbol::keep_lane:
      return 8;
  }
  return 8;
}

}  // namespace nsplan
