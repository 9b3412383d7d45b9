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

#include "nsplan/train.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <utility>

#include "nsplan/errors.hpp"
#include "nsplan/rules.hpp"
#include "nsplan/text.hpp"

namespace nsplan::train
{
namespace
{

// Expert future re-expressed in the coordinates the planner works in: the
// frame pose at the origin, heading along +x.
Eigen::MatrixXd expert_in_ego_frame(const scen::Scenario & scn, int frame)
{
  const kbm::Trajectory world = scn.expert_for_frame(frame);
  const double c = std::cos(world.start.psi);
  const double s = std::sin(world.start.psi);
  Eigen::MatrixXd xy(static_cast<Eigen::Index>(world.points.size()), 2);
  for (Eigen::Index k = 0; k < xy.rows(); ++k) {
    const double dx = world.points[static_cast<std::size_t>(k)].x - world.start.x;
    const double dy = world.points[static_cast<std::size_t>(k)].y - world.start.y;
    xy(k, 0) = c * dx + s * dy;
    xy(k, 1) = -s * dx + c * dy;
  }
  return xy;
}

void accumulate(cond::LossReport & mean, const cond::LossReport & one, double scale)
{
  mean.imitation_l2 += one.imitation_l2 * scale;
  mean.anisotropic_residual += one.anisotropic_residual * scale;
  mean.control_smoothing += one.control_smoothing * scale;
  mean.action_classification += one.action_classification * scale;
  mean.total += one.total * scale;
}

void apply_update(
  cond::ModelWeights & w, const cond::WeightGrads & g, double lr, bool learn_g_scale)
{
  w.action_table -= lr * g.action_table;
  w.speed_table -= lr * g.speed_table;
  w.w1 -= lr * g.w1;
  w.b1 -= lr * g.b1;
  w.w2 -= lr * g.w2;
  w.b2 -= lr * g.b2;
  w.wc -= lr * g.wc;
  w.bc -= lr * g.bc;
  if (learn_g_scale) {
    w.g_scale -= lr * g.g_scale;
  }
}

}  // namespace

std::vector<FrameSample> collect_samples(
  const std::vector<scen::ScenarioSpec> & specs, const pipe::PipelineConfig & cfg,
  const std::string & generator_spec, bool use_decisions)
{
  if (specs.empty()) {
    throw EmptyInput("no scenarios to collect training samples from");
  }
  std::vector<FrameSample> out;
  for (const scen::ScenarioSpec & spec : specs) {
    const scen::Scenario scn = scen::build_scenario(spec, cfg.kbm);
    std::unique_ptr<rules::RuleGenerator> gen = rules::make_generator(generator_spec);
    for (int f = 0; f < scn.frame_count; ++f) {
      // Same canonical text round trip as evaluation, so training and
      // inference consume identical quantized facts.
      SceneFacts facts = scen::extract_facts(scn, f);
      facts = text::parse_facts(text::serialize_facts(facts)).facts;

      FrameSample sample;
      if (use_decisions) {
        sample.decision = rules::decide(facts, *gen, cfg.arbitration).decision;
      } else {
        sample.decision = {
          ActionSymbol::keep_lane, SpeedSymbol::current, RuleType::efficiency, "stage1"};
      }
      sample.v0 = facts.ego.speed;
      sample.query = pipe::synthesize_query(facts.ego.speed, facts.ego.nav, cfg.conditioning);
      sample.expert_xy = expert_in_ego_frame(scn, f);
      sample.label = sample.decision.action;
      out.push_back(std::move(sample));
    }
  }
  return out;
}

std::string TrainResult::curve_csv() const
{
  std::string csv = "step,stage,imitation,residual,smoothing,classification,total\n";
  char buf[64];
  for (const LossCurveRow & row : curve) {
    csv += std::to_string(row.step) + "," + std::to_string(row.stage);
    for (double v :
         {row.losses.imitation_l2, row.losses.anisotropic_residual, row.losses.control_smoothing,
          row.losses.action_classification, row.losses.total}) {
      std::snprintf(buf, sizeof(buf), ",%.8f", v);
      csv += buf;
    }
    csv += "\n";
  }
  return csv;
}

TrainResult train(
  const std::vector<scen::ScenarioSpec> & specs, const pipe::PipelineConfig & cfg,
  const config::TrainParams & params, const std::string & generator_spec, std::uint64_t seed,
  const cond::LossOptions & loss_options)
{
  TrainResult out;
  out.weights = cond::ModelWeights::init(cfg.conditioning, cfg.kbm.horizon_steps, seed);

  int global_step = 0;
  const auto run_stage = [&](int stage, int steps, const std::vector<FrameSample> & samples) {
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    for (int s = 0; s < steps; ++s) {
      cond::WeightGrads grad = cond::WeightGrads::zeros_like(out.weights);
      cond::LossReport mean;
      for (const FrameSample & fs : samples) {
        const cond::PlanResult plan = cond::plan_forward(
          fs.query, fs.decision, fs.v0, out.weights, cfg.conditioning, cfg.kbm);
        const cond::LossReport losses = cond::compute_losses(
          plan, fs.expert_xy, fs.label, cfg.conditioning.loss_weights, loss_options);
        accumulate(mean, losses, inv_n);
        const cond::WeightGrads gi = cond::backward(
          plan, fs.expert_xy, fs.label, out.weights, cfg.conditioning, cfg.kbm,
          cfg.conditioning.loss_weights, loss_options);
        grad.add_scaled(gi, inv_n);
      }
      if (!std::isfinite(mean.total)) {
        throw DivergenceError(
          "training loss is not finite at stage " + std::to_string(stage) + " step " +
          std::to_string(s));
      }
      out.curve.push_back({global_step, stage, mean});
      apply_update(out.weights, grad, params.learning_rate, params.learn_g_scale);
      ++global_step;
    }
  };

  run_stage(1, params.stage1_steps, collect_samples(specs, cfg, generator_spec, false));
  run_stage(2, params.stage2_steps, collect_samples(specs, cfg, generator_spec, true));
  return out;
}

}  // namespace nsplan::train
