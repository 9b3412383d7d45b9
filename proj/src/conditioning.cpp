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

#include "nsplan/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nsplan/errors.hpp"
#include "nsplan/rng.hpp"

namespace nsplan::cond
{

namespace
{

using json = nlohmann::json;

Eigen::MatrixXd uniform_matrix(int rows, int cols, double scale, Rng & rng)
{
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(-scale, scale);
    }
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd & m)
{
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd & v)
{
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) {
    out.push_back(v(i));
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const json & j, int rows, int cols, const char * name)
{
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw ConfigError(std::string("checkpoint field '") + name + "' has wrong row count");
  }
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json & row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw ConfigError(std::string("checkpoint field '") + name + "' has wrong column count");
    }
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw ConfigError(std::string("checkpoint field '") + name + "' has a non-numeric entry");
      }
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json & j, int size, const char * name)
{
  if (!j.is_array() || static_cast<int>(j.size()) != size) {
    throw ConfigError(std::string("checkpoint field '") + name + "' has wrong length");
  }
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) {
    if (!j[i].is_number()) {
      throw ConfigError(std::string("checkpoint field '") + name + "' has a non-numeric entry");
    }
    v(i) = j[i].get<double>();
  }
  return v;
}

double tanh_deriv_from_value(double t) { return 1.0 - t * t; }

}  // namespace

ModelWeights ModelWeights::init(
  const ConditioningConfig & cfg, int horizon_steps, std::uint64_t seed)
{
  if (cfg.feature_dim <= 0 || cfg.modes <= 0 || cfg.hidden_dim <= 0 || horizon_steps <= 0) {
    throw ConfigError("model dimensions must be positive");
  }
  Rng root(seed);
  ModelWeights w;
  w.horizon_steps = horizon_steps;
  const int out = 4 * horizon_steps + 1;
  const double table_scale = 0.1;
  const double w1_scale = 1.0 / std::sqrt(static_cast<double>(cfg.feature_dim));
  const double w2_scale = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));

  Rng r_action = root.fork("action_table");
  Rng r_speed = root.fork("speed_table");
  Rng r_w1 = root.fork("w1");
  Rng r_w2 = root.fork("w2");
  Rng r_wc = root.fork("wc");

  w.action_table = uniform_matrix(kActionCount, cfg.feature_dim, table_scale, r_action);
  w.speed_table = uniform_matrix(kSpeedCount, cfg.feature_dim, table_scale, r_speed);
  w.w1 = uniform_matrix(cfg.hidden_dim, cfg.feature_dim, w1_scale, r_w1);
  w.b1 = Eigen::VectorXd::Zero(cfg.hidden_dim);
  w.w2 = uniform_matrix(out, cfg.hidden_dim, w2_scale, r_w2);
  w.b2 = Eigen::VectorXd::Zero(out);
  w.wc = uniform_matrix(kActionCount, cfg.feature_dim, w1_scale, r_wc);
  w.bc = Eigen::VectorXd::Zero(kActionCount);
  w.g_scale = cfg.g_scale_init;
  return w;
}

bool ModelWeights::shape_matches(const ConditioningConfig & cfg, int horizon_steps_in) const
{
  const int out = 4 * horizon_steps_in + 1;
  return horizon_steps == horizon_steps_in &&
         action_table.rows() == kActionCount && action_table.cols() == cfg.feature_dim &&
         speed_table.rows() == kSpeedCount && speed_table.cols() == cfg.feature_dim &&
         w1.rows() == cfg.hidden_dim && w1.cols() == cfg.feature_dim &&
         b1.size() == cfg.hidden_dim && w2.rows() == out && w2.cols() == cfg.hidden_dim &&
         b2.size() == out && wc.rows() == kActionCount && wc.cols() == cfg.feature_dim &&
         bc.size() == kActionCount;
}

std::string ModelWeights::to_json() const
{
  json j;
  j["version"] = 1;
  j["horizon_steps"] = horizon_steps;
  j["feature_dim"] = static_cast<int>(action_table.cols());
  j["hidden_dim"] = static_cast<int>(w1.rows());
  j["g_scale"] = g_scale;
  j["action_table"] = matrix_to_json(action_table);
  j["speed_table"] = matrix_to_json(speed_table);
  j["w1"] = matrix_to_json(w1);
  j["b1"] = vector_to_json(b1);
  j["w2"] = matrix_to_json(w2);
  j["b2"] = vector_to_json(b2);
  j["wc"] = matrix_to_json(wc);
  j["bc"] = vector_to_json(bc);
  return j.dump();
}

ModelWeights ModelWeights::from_json(
  const std::string & body, const ConditioningConfig & cfg, int horizon_steps)
{
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error & e) {
    throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("version") || j["version"].get<int>() != 1) {
    throw ConfigError("checkpoint has missing or unsupported version");
  }
  for (const char * key :
       {"horizon_steps", "feature_dim", "hidden_dim", "g_scale", "action_table", "speed_table",
        "w1", "b1", "w2", "b2", "wc", "bc"}) {
    if (!j.contains(key)) {
      throw ConfigError(std::string("checkpoint is missing field '") + key + "'");
    }
  }
  if (j["horizon_steps"].get<int>() != horizon_steps) {
    throw ConfigError("checkpoint horizon_steps does not match the configuration");
  }
  if (j["feature_dim"].get<int>() != cfg.feature_dim) {
    throw ConfigError("checkpoint feature_dim does not match the configuration");
  }
  if (j["hidden_dim"].get<int>() != cfg.hidden_dim) {
    throw ConfigError("checkpoint hidden_dim does not match the configuration");
  }
  ModelWeights w;
  w.horizon_steps = horizon_steps;
  const int out = 4 * horizon_steps + 1;
  w.action_table = matrix_from_json(j["action_table"], kActionCount, cfg.feature_dim, "action_table");
  w.speed_table = matrix_from_json(j["speed_table"], kSpeedCount, cfg.feature_dim, "speed_table");
  w.w1 = matrix_from_json(j["w1"], cfg.hidden_dim, cfg.feature_dim, "w1");
  w.b1 = vector_from_json(j["b1"], cfg.hidden_dim, "b1");
  w.w2 = matrix_from_json(j["w2"], out, cfg.hidden_dim, "w2");
  w.b2 = vector_from_json(j["b2"], out, "b2");
  w.wc = matrix_from_json(j["wc"], kActionCount, cfg.feature_dim, "wc");
  w.bc = vector_from_json(j["bc"], kActionCount, "bc");
  if (!j["g_scale"].is_number()) {
    throw ConfigError("checkpoint g_scale must be a number");
  }
  w.g_scale = j["g_scale"].get<double>();
  if (!std::isfinite(w.g_scale)) {
    throw ConfigError("checkpoint g_scale must be finite");
  }
  return w;
}

void ModelWeights::save(const std::string & path) const
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open weights file for writing: " + path);
  }
  out << to_json() << "\n";
  if (!out) {
    throw Error("failed writing weights file: " + path);
  }
}

ModelWeights ModelWeights::load(
  const std::string & path, const ConditioningConfig & cfg, int horizon_steps)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open weights file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str(), cfg, horizon_steps);
}

WeightGrads WeightGrads::zeros_like(const ModelWeights & w)
{
  WeightGrads g;
  g.action_table = Eigen::MatrixXd::Zero(w.action_table.rows(), w.action_table.cols());
  g.speed_table = Eigen::MatrixXd::Zero(w.speed_table.rows(), w.speed_table.cols());
  g.w1 = Eigen::MatrixXd::Zero(w.w1.rows(), w.w1.cols());
  g.b1 = Eigen::VectorXd::Zero(w.b1.size());
  g.w2 = Eigen::MatrixXd::Zero(w.w2.rows(), w.w2.cols());
  g.b2 = Eigen::VectorXd::Zero(w.b2.size());
  g.wc = Eigen::MatrixXd::Zero(w.wc.rows(), w.wc.cols());
  g.bc = Eigen::VectorXd::Zero(w.bc.size());
  g.g_scale = 0.0;
  return g;
}

void WeightGrads::add_scaled(const WeightGrads & other, double scale)
{
  action_table += scale * other.action_table;
  speed_table += scale * other.speed_table;
  w1 += scale * other.w1;
  b1 += scale * other.b1;
  w2 += scale * other.w2;
  b2 += scale * other.b2;
  wc += scale * other.wc;
  bc += scale * other.bc;
  g_scale += scale * other.g_scale;
}

Eigen::VectorXd embed_decision(const ModelWeights & w, const FinalDecision & dec)
{
  const int a = static_cast<int>(dec.action);
  const int s = static_cast<int>(dec.speed);
  return w.action_table.row(a).transpose() + w.speed_table.row(s).transpose();
}

PlanningQuery condition_query(const PlanningQuery & q, const Eigen::VectorXd & d)
{
  if (d.size() != q.dim) {
    throw ShapeMismatch(
      "decision embedding length " + std::to_string(d.size()) +
      " does not match query feature dim " + std::to_string(q.dim));
  }
  if (q.data.rows() != static_cast<Eigen::Index>(q.batch) * q.modes || q.data.cols() != q.dim) {
    throw ShapeMismatch("planning query storage does not match its declared shape");
  }
  PlanningQuery out = q;
  out.data.rowwise() += d.transpose();
  return out;
}

VelocityBias velocity_bias(
  const FinalDecision & dec, double v0, double g_scale, const ConditioningConfig & cfg)
{
  VelocityBias b;
  const double target = cfg.speed_targets.resolve(dec.speed, v0);
  b.gap = target - v0;
  b.raw = g_scale * b.gap;
  b.b_v = std::clamp(b.raw, -cfg.bias_max, cfg.bias_max);
  b.clamped = b.b_v != b.raw;
  const double v = v0 + b.b_v;
  b.floored = v < 0.0;
  b.v0_prime = b.floored ? 0.0 : v;
  return b;
}

kbm::Trajectory combine(
  const kbm::Trajectory & physics, const Eigen::MatrixXd & raw_residual, double lambda)
{
  const int h = static_cast<int>(physics.points.size());
  if (raw_residual.rows() != h || raw_residual.cols() != 2) {
    throw ShapeMismatch("residual field must be horizon x 2");
  }
  kbm::Trajectory out = physics;
  for (int k = 0; k < h; ++k) {
    out.points[k].x = physics.points[k].x + lambda * std::tanh(raw_residual(k, 0));
    out.points[k].y = physics.points[k].y + lambda * std::tanh(raw_residual(k, 1));
  }
  // Speeds and headings follow the corrected geometry as increments over the
  // physics baseline, so they stay bit-identical when the residual is zero.
  double px_prev = physics.start.x;
  double py_prev = physics.start.y;
  double fx_prev = physics.start.x;
  double fy_prev = physics.start.y;
  const double dt = h > 0 ? physics.points[0].t : 0.0;
  for (int k = 0; k < h; ++k) {
    const double pdx = physics.points[k].x - px_prev;
    const double pdy = physics.points[k].y - py_prev;
    const double fdx = out.points[k].x - fx_prev;
    const double fdy = out.points[k].y - fy_prev;
    const double d_phys = std::hypot(pdx, pdy);
    const double d_fin = std::hypot(fdx, fdy);
    if (dt > 0.0) {
      out.points[k].v = std::max(0.0, physics.points[k].v + (d_fin - d_phys) / dt);
    }
    if (d_phys > 1e-9 && d_fin > 1e-9) {
      const double dtheta = wrap_angle(std::atan2(fdy, fdx) - std::atan2(pdy, pdx));
      out.points[k].psi = wrap_angle(physics.points[k].psi + dtheta);
    }
    px_prev = physics.points[k].x;
    py_prev = physics.points[k].y;
    fx_prev = out.points[k].x;
    fy_prev = out.points[k].y;
  }
  return out;
}

PlanResult plan_forward(
  const PlanningQuery & query, const FinalDecision & dec, double v0, const ModelWeights & w,
  const ConditioningConfig & cfg, const kbm::KbmParams & kp, const PlanOptions & opts)
{
  if (query.batch != 1) {
    throw ShapeMismatch("plan_forward expects a batch of one frame");
  }
  if (query.modes != cfg.modes || query.dim != cfg.feature_dim) {
    throw ShapeMismatch("planning query shape does not match the configuration");
  }
  if (!w.shape_matches(cfg, kp.horizon_steps)) {
    throw ShapeMismatch("model weights do not match the configuration");
  }
  const int h = kp.horizon_steps;
  const int m = cfg.modes;

  PlanResult res;
  res.decision = dec;
  res.residual_disabled = opts.disable_residual;
  res.d = embed_decision(w, dec);
  const PlanningQuery qp = condition_query(query, res.d);
  res.qprime = qp.data;

  res.z1 = (w.w1 * res.qprime.transpose()).colwise() + w.b1;  // hidden x M
  res.h1 = res.z1.array().tanh();
  res.head_out = (w.w2 * res.h1).colwise() + w.b2;  // (4H+1) x M

  res.mode_scores = res.head_out.row(4 * h).transpose();
  int best = 0;
  for (int i = 1; i < m; ++i) {
    if (res.mode_scores(i) > res.mode_scores(best)) {
      best = i;
    }
  }
  res.selected_mode = best;

  const Eigen::VectorXd col = res.head_out.col(best);
  res.controls.resize(h);
  for (int k = 0; k < h; ++k) {
    res.controls[k].a = kp.accel_max * std::tanh(col(k));
    res.controls[k].delta = kp.steer_max * std::tanh(col(h + k));
  }
  res.residual_raw.resize(h, 2);
  for (int k = 0; k < h; ++k) {
    res.residual_raw(k, 0) = col(2 * h + k);
    res.residual_raw(k, 1) = col(3 * h + k);
  }

  res.bias = velocity_bias(dec, v0, w.g_scale, cfg);
  kbm::VehicleState start{0.0, 0.0, res.bias.v0_prime, 0.0};
  kbm::RolloutWithGradients rolled = kbm::rollout_with_gradients(start, res.controls, kp);
  res.physics = std::move(rolled.trajectory);
  res.rollout_grads = std::move(rolled.gradients);

  if (opts.disable_residual) {
    res.residual_bounded = Eigen::MatrixXd::Zero(h, 2);
    res.final_traj = combine(res.physics, res.residual_bounded, kp.residual_scale);
  } else {
    res.residual_bounded = kp.residual_scale * res.residual_raw.array().tanh();
    res.final_traj = combine(res.physics, res.residual_raw, kp.residual_scale);
  }

  res.pooled = res.qprime.colwise().mean().transpose();
  res.action_logits = w.wc * res.pooled + w.bc;
  return res;
}

double imitation_l2_loss(const kbm::Trajectory & final_traj, const Eigen::MatrixXd & expert_xy)
{
  const int h = static_cast<int>(final_traj.points.size());
  if (expert_xy.rows() != h || expert_xy.cols() != 2) {
    throw ShapeMismatch("expert trajectory must be horizon x 2");
  }
  double sum = 0.0;
  for (int k = 0; k < h; ++k) {
    const double dx = final_traj.points[k].x - expert_xy(k, 0);
    const double dy = final_traj.points[k].y - expert_xy(k, 1);
    sum += dx * dx + dy * dy;
  }
  return sum / static_cast<double>(h);
}

double anisotropic_residual_loss(const Eigen::MatrixXd & raw_residual, double w_y)
{
  const double w_x = 10.0 * w_y;
  double sum = 0.0;
  for (int k = 0; k < raw_residual.rows(); ++k) {
    sum += w_x * raw_residual(k, 0) * raw_residual(k, 0) +
           w_y * raw_residual(k, 1) * raw_residual(k, 1);
  }
  return sum;
}

double control_smoothing_loss(const std::vector<kbm::ControlStep> & controls)
{
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < controls.size(); ++k) {
    const double da = controls[k + 1].a - controls[k].a;
    const double dd = controls[k + 1].delta - controls[k].delta;
    sum += da * da + dd * dd;
  }
  return sum;
}

double action_classification_loss(const Eigen::VectorXd & logits, ActionSymbol label)
{
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits(static_cast<int>(label));
}

LossReport compute_losses(
  const PlanResult & plan, const Eigen::MatrixXd & expert_xy, ActionSymbol expert_action,
  const LossWeights & lw, const LossOptions & lo)
{
  LossReport r;
  r.imitation_l2 = imitation_l2_loss(plan.final_traj, expert_xy);
  r.anisotropic_residual = anisotropic_residual_loss(plan.residual_raw, lw.residual_w_y);
  r.control_smoothing = control_smoothing_loss(plan.controls);
  r.action_classification = action_classification_loss(plan.action_logits, expert_action);
  r.total = lw.imitation * r.imitation_l2 + r.anisotropic_residual +
            lw.classification * r.action_classification;
  if (!lo.disable_smoothing) {
    r.total += lw.smoothing * r.control_smoothing;
  }
  return r;
}

WeightGrads backward(
  const PlanResult & plan, const Eigen::MatrixXd & expert_xy, ActionSymbol expert_action,
  const ModelWeights & w, const ConditioningConfig & cfg, const kbm::KbmParams & kp,
  const LossWeights & lw, const LossOptions & lo)
{
  const int h = kp.horizon_steps;
  const int m = cfg.modes;
  if (expert_xy.rows() != h || expert_xy.cols() != 2) {
    throw ShapeMismatch("expert trajectory must be horizon x 2");
  }
  WeightGrads g = WeightGrads::zeros_like(w);

  // d total / d final position.
  Eigen::MatrixXd g_pos(h, 2);
  const double im_scale = lw.imitation * 2.0 / static_cast<double>(h);
  for (int k = 0; k < h; ++k) {
    g_pos(k, 0) = im_scale * (plan.final_traj.points[k].x - expert_xy(k, 0));
    g_pos(k, 1) = im_scale * (plan.final_traj.points[k].y - expert_xy(k, 1));
  }

  // Residual path: final = physics + lambda * tanh(raw).
  Eigen::MatrixXd g_raw_res = Eigen::MatrixXd::Zero(h, 2);
  if (!plan.residual_disabled) {
    for (int k = 0; k < h; ++k) {
      for (int c = 0; c < 2; ++c) {
        const double t = std::tanh(plan.residual_raw(k, c));
        g_raw_res(k, c) = g_pos(k, c) * kp.residual_scale * tanh_deriv_from_value(t);
      }
    }
  }
  const double w_x = 10.0 * lw.residual_w_y;
  for (int k = 0; k < h; ++k) {
    g_raw_res(k, 0) += 2.0 * w_x * plan.residual_raw(k, 0);
    g_raw_res(k, 1) += 2.0 * lw.residual_w_y * plan.residual_raw(k, 1);
  }

  // Physics path: accumulate waypoint position gradients into the rollout
  // parameters (per-step accel, per-step steer, start speed).
  const int pc = plan.rollout_grads.param_count();
  Eigen::RowVectorXd g_theta = Eigen::RowVectorXd::Zero(pc);
  for (int k = 0; k < h; ++k) {
    g_theta += g_pos(k, 0) * plan.rollout_grads.jac[k].row(0);
    g_theta += g_pos(k, 1) * plan.rollout_grads.jac[k].row(1);
  }

  // Bounded control gradients: physics plus smoothing.
  Eigen::VectorXd g_ctrl_a(h);
  Eigen::VectorXd g_ctrl_d(h);
  for (int k = 0; k < h; ++k) {
    g_ctrl_a(k) = g_theta(plan.rollout_grads.accel_col(k));
    g_ctrl_d(k) = g_theta(plan.rollout_grads.steer_col(k));
  }
  if (!lo.disable_smoothing) {
    for (int k = 0; k < h; ++k) {
      double da = 0.0;
      double dd = 0.0;
      if (k > 0) {
        da += 2.0 * (plan.controls[k].a - plan.controls[k - 1].a);
        dd += 2.0 * (plan.controls[k].delta - plan.controls[k - 1].delta);
      }
      if (k + 1 < h) {
        da -= 2.0 * (plan.controls[k + 1].a - plan.controls[k].a);
        dd -= 2.0 * (plan.controls[k + 1].delta - plan.controls[k].delta);
      }
      g_ctrl_a(k) += lw.smoothing * da;
      g_ctrl_d(k) += lw.smoothing * dd;
    }
  }

  // Velocity bias path: v0' -> b_v -> g_scale, dead when clamped or floored.
  if (!plan.bias.floored && !plan.bias.clamped) {
    g.g_scale += g_theta(plan.rollout_grads.v0_col()) * plan.bias.gap;
  }

  // Head output gradient for the selected mode.
  const Eigen::VectorXd col = plan.head_out.col(plan.selected_mode);
  Eigen::VectorXd g_out = Eigen::VectorXd::Zero(4 * h + 1);
  for (int k = 0; k < h; ++k) {
    g_out(k) = g_ctrl_a(k) * kp.accel_max * tanh_deriv_from_value(std::tanh(col(k)));
    g_out(h + k) = g_ctrl_d(k) * kp.steer_max * tanh_deriv_from_value(std::tanh(col(h + k)));
    g_out(2 * h + k) = g_raw_res(k, 0);
    g_out(3 * h + k) = g_raw_res(k, 1);
  }
  // Score row: no loss attaches to mode scores.

  // Classification path.
  Eigen::VectorXd sm = (plan.action_logits.array() - plan.action_logits.maxCoeff()).exp();
  sm /= sm.sum();
  Eigen::VectorXd g_logits = lw.classification * sm;
  g_logits(static_cast<int>(expert_action)) -= lw.classification;
  g.wc += g_logits * plan.pooled.transpose();
  g.bc += g_logits;
  const Eigen::VectorXd g_pooled = w.wc.transpose() * g_logits;

  // Backprop through the head for the selected mode only.
  Eigen::MatrixXd g_qprime = Eigen::MatrixXd::Zero(m, cfg.feature_dim);
  const Eigen::VectorXd h1_col = plan.h1.col(plan.selected_mode);
  const Eigen::VectorXd g_h1 = w.w2.transpose() * g_out;
  const Eigen::VectorXd g_z1 =
    g_h1.array() * (1.0 - h1_col.array() * h1_col.array());
  g.w2 += g_out * h1_col.transpose();
  g.b2 += g_out;
  g.w1 += g_z1 * plan.qprime.row(plan.selected_mode);
  g.b1 += g_z1;
  g_qprime.row(plan.selected_mode) += (w.w1.transpose() * g_z1).transpose();

  // Mean pooling feeds the classifier from every mode.
  const Eigen::RowVectorXd g_pool_row = g_pooled.transpose() / static_cast<double>(m);
  g_qprime.rowwise() += g_pool_row;

  // The decision embedding is added to every mode row.
  const Eigen::RowVectorXd g_d = g_qprime.colwise().sum();
  g.action_table.row(static_cast<int>(plan.decision.action)) += g_d;
  g.speed_table.row(static_cast<int>(plan.decision.speed)) += g_d;
  return g;
}

}  // namespace nsplan::cond
