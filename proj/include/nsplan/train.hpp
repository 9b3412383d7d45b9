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

#ifndef NSPLAN_TRAIN_HPP_
#define NSPLAN_TRAIN_HPP_

#include <string>
#include <vector>

#include "nsplan/config.hpp"
#include "nsplan/pipeline.hpp"

// Two-stage imitation training with full-batch gradient descent at a fixed
// step size. Stage 1 bypasses the deductive layer (every frame conditions on
// keep_lane/current); stage 2 turns real decisions on and fine-tunes.
// Deterministic for a fixed (suite, config, seed).

namespace nsplan::train
{

// One precomputed training frame: the conditioning inputs plus the expert
// targets in the ego frame of that frame.
struct FrameSample
{
  cond::PlanningQuery query;
  FinalDecision decision;
  double v0{0.0};
  Eigen::MatrixXd expert_xy;  // H x 2
  ActionSymbol label{ActionSymbol::keep_lane};
};

// Runs the deductive layer once per frame and freezes the samples.
// `use_decisions` = false substitutes the stage-1 bypass decision.
std::vector<FrameSample> collect_samples(
  const std::vector<scen::ScenarioSpec> & specs, const pipe::PipelineConfig & cfg,
  const std::string & generator_spec, bool use_decisions);

struct LossCurveRow
{
  int step{0};        // global step across both stages
  int stage{1};
  cond::LossReport losses;  // means over the batch
};

struct TrainResult
{
  cond::ModelWeights weights;
  std::vector<LossCurveRow> curve;

  std::string curve_csv() const;
};

// Full two-stage run from a seeded initialization. Throws DivergenceError
// when the total loss stops being finite.
TrainResult train(
  const std::vector<scen::ScenarioSpec> & specs, const pipe::PipelineConfig & cfg,
  const config::TrainParams & params, const std::string & generator_spec, std::uint64_t seed,
  const cond::LossOptions & loss_options = {});

}  // namespace nsplan::train

#endif  // NSPLAN_TRAIN_HPP_
