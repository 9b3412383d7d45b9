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

#ifndef NSPLAN_TEXT_HPP_
#define NSPLAN_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nsplan/errors.hpp"
#include "nsplan/facts.hpp"

// Text exchange format for scene facts and rule suggestions: one predicate
// per statement, lowercase atoms, comma-separated arguments, '.' terminator,
// '%' line comments. Facts use ego/object (plus optional frame, ego_lane,
// ego_history); rule responses use suggestion.
//
//   ego(6.9, 0, straight).
//   object(3, pedestrian, 4.5, 1.2, 1.57, front, crossing, 0.89).
//   suggestion(yield, zero, safety).
//
// The parser is total: any byte string either parses or raises ParseError
// with a 1-based line/column position.

namespace nsplan::text
{

class ParseError : public Error
{
public:
  enum class Kind {
    syntax,        // malformed token or structure; `expected` says what was wanted
    vocabulary,    // well-formed atom outside a closed vocabulary slot
    duplicate_id,  // repeated object id
    validation,    // well-formed value violating a range/arity constraint
  };

  ParseError(Kind k, int line, int col, std::string detail);

  // Builders that fill the conventional fields.
  static ParseError syntax(int line, int col, std::string expected);
  static ParseError vocabulary(int line, int col, std::string atom, std::string slot);
  static ParseError duplicate_id(int line, int col, std::int64_t id);
  static ParseError validation(int line, int col, std::string message);

  Kind kind;
  int line;  // 1-based
  int col;   // 1-based, in bytes
  std::string expected;  // syntax only
  std::string atom;      // vocabulary only
  std::string slot;      // vocabulary only
  std::int64_t id{-1};   // duplicate_id only
};

struct UnknownPredicate
{
  std::string name;
  int line{0};
};

struct ParsedFacts
{
  SceneFacts facts;
  // Well-formed statements whose predicate is not part of the fact schema.
  // Reported so callers can warn; never silently dropped.
  std::vector<UnknownPredicate> unknown;
};

// Parse a facts document. Requires exactly one ego predicate. Object ids must
// be unique. `max_history` bounds the ego_history arity.
ParsedFacts parse_facts(std::string_view input, std::size_t max_history = 16);

// Parse a rule-generator response: only suggestion/3 statements are allowed.
// Provenance of each result is "line<N>" (1-based statement line).
std::vector<Suggestion> parse_suggestions(std::string_view input);

struct LenientSuggestions
{
  std::vector<Suggestion> accepted;
  std::vector<std::string> rejected;  // one human-readable note per dropped statement
};

// Statement-by-statement parse that drops invalid entries instead of failing,
// for responses from out-of-process generators. Provenance of accepted
// entries is "<provenance_prefix>:line<N>". A document too broken to split
// into statements contributes everything after the break to `rejected`.
LenientSuggestions parse_suggestions_lenient(
  std::string_view input, std::string_view provenance_prefix);

// Canonical serialization: fixed predicate order, fixed field order, one
// statement per line, numbers at 6 significant digits, +inf as `inf`.
// parse_facts(serialize_facts(f)).facts == f for facts on the canonical grid.
std::string serialize_facts(const SceneFacts & facts);
std::string serialize_suggestion(const Suggestion & s);
std::string serialize_suggestions(const std::vector<Suggestion> & list);

// Canonical number text ("%.6g", -0 normalized, +inf -> "inf").
std::string format_number(double v);

// Round a value onto the canonical 6-significant-digit grid.
double quantize(double v);

}  // namespace nsplan::text

#endif  // NSPLAN_TEXT_HPP_
