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

#ifndef NSPLAN_CONDITIONING_HPP_
#define NSPLAN_CONDITIONING_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nsplan/facts.hpp"
#include "nsplan/kbm.hpp"

// Neural planning head conditioned on the symbolic decision. Two coupling
// paths, kept separate by construction:
//   1. a decision embedding (action row + speed row) added to every mode of
//      the planning query, and
//   2. a velocity bias b_v = clamp(g_scale * (target_speed - v0)) applied to
//      the rollout start speed.
// The head maps each conditioned mode feature through two affine layers with
// a tanh nonlinearity to per-step accel/steer controls (bounded by
// a_max*tanh, delta_max*tanh), a raw residual field, and a mode score. The
// final trajectory is tau_physics + lambda*tanh(residual) on positions.
// Everything is differentiable; gradients are accumulated analytically and
// checked against central finite differences in the test suite.

namespace nsplan::cond
{

struct LossWeights
{
  double imitation{1.0};
  // Anisotropic residual weight on the y axis; x gets 10x this.
  double residual_w_y{0.1};
  double smoothing{0.05};
  double classification{0.1};
};

struct ConditioningConfig
{
  int feature_dim{256};  // D
  int modes{18};         // M
  int hidden_dim{64};
  double bias_max{3.0};     // m/s, |b_v| bound
  double g_scale_init{0.29};
  SpeedTargets speed_targets;
  LossWeights loss_weights;
};

// Planning query tensor of shape batch x 1 x modes x dim, stored row-major
// as (batch*modes) x dim.
struct PlanningQuery
{
  int batch{0};
  int modes{0};
  int dim{0};
  Eigen::MatrixXd data;

  static PlanningQuery zeros(int batch, int modes, int dim)
  {
    return {batch, modes, dim, Eigen::MatrixXd::Zero(batch * modes, dim)};
  }
  Eigen::MatrixXd::RowXpr mode_row(int b, int m) { return data.row(b * modes + m); }
  Eigen::MatrixXd::ConstRowXpr mode_row(int b, int m) const { return data.row(b * modes + m); }
};

// All trainable parameters. Head output layout per mode: H raw accels,
// H raw steers, H raw residual-x, H raw residual-y, 1 score.
struct ModelWeights
{
  Eigen::MatrixXd action_table;  // 9 x D
  Eigen::MatrixXd speed_table;   // 6 x D
  Eigen::MatrixXd w1;            // hidden x D
  Eigen::VectorXd b1;            // hidden
  Eigen::MatrixXd w2;            // (4H+1) x hidden
  Eigen::VectorXd b2;            // 4H+1
  Eigen::MatrixXd wc;            // 9 x D, action classifier
  Eigen::VectorXd bc;            // 9
  double g_scale{0.29};
  int horizon_steps{6};

  static ModelWeights init(const ConditioningConfig & cfg, int horizon_steps, std::uint64_t seed);

  int out_dim() const { return 4 * horizon_steps + 1; }
  bool shape_matches(const ConditioningConfig & cfg, int horizon_steps_in) const;

  // Versioned JSON checkpoint. Loading validates shapes against the config.
  std::string to_json() const;
  static ModelWeights from_json(
    const std::string & body, const ConditioningConfig & cfg, int horizon_steps);
  void save(const std::string & path) const;
  static ModelWeights load(
    const std::string & path, const ConditioningConfig & cfg, int horizon_steps);
};

// Gradient accumulator with the same shapes as ModelWeights.
struct WeightGrads
{
  Eigen::MatrixXd action_table;
  Eigen::MatrixXd speed_table;
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::MatrixXd wc;
  Eigen::VectorXd bc;
  double g_scale{0.0};

  static WeightGrads zeros_like(const ModelWeights & w);
  void add_scaled(const WeightGrads & other, double scale);
};

// d = action row + speed row.
Eigen::VectorXd embed_decision(const ModelWeights & w, const FinalDecision & dec);

// Q'[b, 0, m, :] = Q[b, 0, m, :] + d. Throws ShapeMismatch if d has the
// wrong length.
PlanningQuery condition_query(const PlanningQuery & q, const Eigen::VectorXd & d);

struct VelocityBias
{
  double gap{0.0};       // target speed minus v0
  double raw{0.0};       // g_scale * gap before clamping
  double b_v{0.0};       // clamped bias
  double v0_prime{0.0};  // max(v0 + b_v, 0)
  bool clamped{false};
  bool floored{false};
};

VelocityBias velocity_bias(
  const FinalDecision & dec, double v0, double g_scale, const ConditioningConfig & cfg);

struct PlanOptions
{
  bool disable_residual{false};  // no-kbm-residual ablation
};

// One planned frame in the ego frame (start pose (0, 0, v0', 0)), with the
// activations the backward pass needs.
struct PlanResult
{
  FinalDecision decision;
  Eigen::VectorXd d;  // decision embedding offset
  VelocityBias bias;
  int selected_mode{0};
  Eigen::VectorXd mode_scores;   // M
  Eigen::VectorXd action_logits; // 9
  std::vector<kbm::ControlStep> controls;  // bounded, selected mode
  Eigen::MatrixXd residual_raw;      // H x 2, selected mode
  Eigen::MatrixXd residual_bounded;  // H x 2, lambda * tanh(raw); zero when disabled
  kbm::Trajectory physics;
  kbm::Trajectory final_traj;
  bool residual_disabled{false};

  // forward caches
  Eigen::MatrixXd qprime;  // M x D
  Eigen::MatrixXd z1;      // hidden x M
  Eigen::MatrixXd h1;      // hidden x M
  Eigen::MatrixXd head_out;  // (4H+1) x M
  Eigen::VectorXd pooled;    // D
  kbm::RolloutGradients rollout_grads;
};

// Forward pass for one frame. The query must have batch == 1 and match the
// configured modes/dim.
PlanResult plan_forward(
  const PlanningQuery & query, const FinalDecision & dec, double v0, const ModelWeights & w,
  const ConditioningConfig & cfg, const kbm::KbmParams & kp, const PlanOptions & opts = {});

// Eq.-style combine: positions shifted by lambda*tanh(raw_residual); speeds
// and headings carry the finite-difference increment the shift induces, so a
// zero residual reproduces tau_physics exactly.
kbm::Trajectory combine(
  const kbm::Trajectory & physics, const Eigen::MatrixXd & raw_residual, double lambda);

// Individual losses.
double imitation_l2_loss(const kbm::Trajectory & final_traj, const Eigen::MatrixXd & expert_xy);
double anisotropic_residual_loss(const Eigen::MatrixXd & raw_residual, double w_y);
double control_smoothing_loss(const std::vector<kbm::ControlStep> & controls);
double action_classification_loss(const Eigen::VectorXd & logits, ActionSymbol label);

struct LossReport
{
  double imitation_l2{0.0};
  double anisotropic_residual{0.0};
  double control_smoothing{0.0};
  double action_classification{0.0};
  double total{0.0};
};

struct LossOptions
{
  bool disable_smoothing{false};  // no-smoothing ablation
};

LossReport compute_losses(
  const PlanResult & plan, const Eigen::MatrixXd & expert_xy, ActionSymbol expert_action,
  const LossWeights & lw, const LossOptions & lo = {});

// Analytic gradient of the total loss with respect to every trainable
// scalar. Mode selection is treated as fixed (winner take all).
WeightGrads backward(
  const PlanResult & plan, const Eigen::MatrixXd & expert_xy, ActionSymbol expert_action,
  const ModelWeights & w, const ConditioningConfig & cfg, const kbm::KbmParams & kp,
  const LossWeights & lw, const LossOptions & lo = {});

}  // namespace nsplan::cond

#endif  // NSPLAN_CONDITIONING_HPP_
