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

#ifndef NSPLAN_CONFIG_HPP_
#define NSPLAN_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "nsplan/pipeline.hpp"

// Effective run configuration: defaults, overridden by a JSON config file,
// overridden by NSPLAN_* environment variables, overridden by CLI flags.
// The effective config is echoed into the output directory so any run can
// be reproduced from its artifacts alone.

namespace nsplan::config
{

struct TrainParams
{
  int stage1_steps{120};
  int stage2_steps{2600};
  double learning_rate{0.006};
  bool learn_g_scale{false};
};

struct RunConfig
{
  std::uint64_t seed{20260815};
  pipe::PipelineConfig pipeline;
  std::string generator{"template"};
  std::string suite{"suites/default.json"};
  std::string out_dir{"out"};
  std::string weights;  // checkpoint path; empty = fresh seeded init
  std::string ablate;   // "", "no-asp", "no-kbm-residual", "no-smoothing"
  TrainParams train;

  std::string to_json() const;  // full echo, reloads to an identical config
};

RunConfig default_config();

// Parse a config JSON document over the defaults. Unknown keys are
// ConfigErrors so typos fail loudly.
RunConfig parse_config(const std::string & body);
RunConfig load_config(const std::string & path);

// NSPLAN_SEED, NSPLAN_SUITE, NSPLAN_OUT, NSPLAN_GENERATOR, NSPLAN_WEIGHTS.
void apply_env_overrides(RunConfig & cfg);

}  // namespace nsplan::config

#endif  // NSPLAN_CONFIG_HPP_
