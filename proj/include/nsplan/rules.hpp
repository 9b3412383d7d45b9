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

#ifndef NSPLAN_RULES_HPP_
#define NSPLAN_RULES_HPP_

#include <memory>
#include <string>
#include <vector>

#include "nsplan/errors.hpp"
#include "nsplan/facts.hpp"

// Deductive layer: suggestion sources (template table, offline cache, HTTP
// service), always-on safety axioms, and tiered arbitration down to one
// final decision.

namespace nsplan::rules
{

// A source of 3-6 candidate suggestions for a scene. Implementations signal
// unavailability with GeneratorFailure; decide() then falls back to axioms
// plus the default suggestion (fail-safe, never fail-open).
class RuleGenerator
{
public:
  virtual ~RuleGenerator() = default;
  virtual std::vector<Suggestion> generate(const SceneFacts & facts) = 0;
  virtual std::string name() const = 0;

  // Diagnostics from the most recent generate() call (dropped or truncated
  // entries). Empty for in-process generators.
  const std::vector<std::string> & last_notes() const { return notes_; }

protected:
  std::vector<std::string> notes_;
};

// Deterministic rule table keyed on nav command, ego speed regime, and the
// most imminent object. Stands in for an offline reasoning service.
class TemplateGenerator : public RuleGenerator
{
public:
  std::vector<Suggestion> generate(const SceneFacts & facts) override;
  std::string name() const override { return "template"; }
};

// Reads pre-computed responses from <dir>/<frame_id>.lp. Facts without a
// frame id or without a cache entry raise GeneratorFailure.
class CacheGenerator : public RuleGenerator
{
public:
  explicit CacheGenerator(std::string dir) : dir_(std::move(dir)) {}
  std::vector<Suggestion> generate(const SceneFacts & facts) override;
  std::string name() const override { return "cache:" + dir_; }

private:
  std::string dir_;
};

// POSTs the canonical facts text to a suggestion service and parses the
// response. Single round trip per frame; timeouts raise GeneratorFailure.
class HttpGenerator : public RuleGenerator
{
public:
  // url: http://host:port/path
  explicit HttpGenerator(std::string url, double timeout_s = 2.0);
  std::vector<Suggestion> generate(const SceneFacts & facts) override;
  std::string name() const override { return "http:" + url_; }

private:
  std::string url_;
  std::string host_;
  std::string path_;
  int port_{80};
  double timeout_s_;
};

// Validates an out-of-process response: entries failing the vocabulary were
// already dropped one by one by the lenient parse; more than 6 valid entries
// keep the first 6, fewer than 3 is a GeneratorFailure. Dropped/truncated
// counts land in `notes`.
std::vector<Suggestion> sanitize_generated(
  std::vector<Suggestion> valid, const std::vector<std::string> & rejected,
  std::vector<std::string> & notes);

// Build a generator from a spec string: "template", "cache:<dir>", or
// "http:<url>". Anything else is a ConfigError.
std::unique_ptr<RuleGenerator> make_generator(const std::string & spec);

struct ArbitrationConfig
{
  double ttc_emergency_s{0.5};
  double ttc_safety_s{1.5};
  // Numeric speed targets used to rank SpeedSymbols in the tie-break.
  SpeedTargets speed_targets;
};

// Hard-coded reflexes evaluated on every frame, independent of any
// generator. Ordered emergency first.
std::vector<Suggestion> apply_axioms(const SceneFacts & facts, const ArbitrationConfig & cfg);

// Pick the winning suggestion: highest tier wins; inside a tier the slower
// target speed wins, then the more conservative action, then lexicographic
// provenance. Invariant under permutation and duplication of the input.
// `ego_speed` resolves SpeedSymbol::current for the ranking. Throws
// EmptyInput on an empty list.
FinalDecision arbitrate(
  const std::vector<Suggestion> & suggestions, const ArbitrationConfig & cfg,
  double ego_speed = 0.0);

struct DecideResult
{
  FinalDecision decision;
  // Everything arbitration saw: axioms, generator output, default.
  std::vector<Suggestion> considered;
  // Empty when the generator answered; otherwise the failure reason.
  std::string generator_error;
  // Sanitizer notes (dropped/truncated external entries).
  std::vector<std::string> notes;
};

// Full deductive step: axioms + generator output + the always-present
// default {keep_lane, current, efficiency}, arbitrated to one decision.
DecideResult decide(
  const SceneFacts & facts, RuleGenerator & generator, const ArbitrationConfig & cfg);

}  // namespace nsplan::rules

#endif  // NSPLAN_RULES_HPP_
