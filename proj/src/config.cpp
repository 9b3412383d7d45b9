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

#include "nsplan/config.hpp"

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nsplan/errors.hpp"

namespace nsplan::config
{

namespace
{

using json = nlohmann::json;

void check_keys(const json & j, std::initializer_list<const char *> allowed, const char * where)
{
  for (const auto & [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char * a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError(std::string("unknown config key '") + key + "' in " + where);
    }
  }
}

double need_number(const json & j, const char * key, double fallback)
{
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j[key].is_number()) {
    throw ConfigError(std::string("config key '") + key + "' must be a number");
  }
  return j[key].get<double>();
}

int need_int(const json & j, const char * key, int fallback)
{
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j[key].is_number_integer()) {
    throw ConfigError(std::string("config key '") + key + "' must be an integer");
  }
  return j[key].get<int>();
}

std::string need_string(const json & j, const char * key, const std::string & fallback)
{
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j[key].is_string()) {
    throw ConfigError(std::string("config key '") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

bool need_bool(const json & j, const char * key, bool fallback)
{
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j[key].is_boolean()) {
    throw ConfigError(std::string("config key '") + key + "' must be a boolean");
  }
  return j[key].get<bool>();
}

}  // namespace

RunConfig default_config() { return RunConfig{}; }

RunConfig parse_config(const std::string & body)
{
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error & e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  check_keys(
    j, {"seed", "kbm", "arbitration", "conditioning", "generator", "suite", "out_dir", "weights",
        "ablate", "train"},
    "the top level");

  RunConfig cfg = default_config();
  if (j.contains("seed")) {
    // is_number_integer() also matches negative values, which would wrap.
    if (!j["seed"].is_number_unsigned()) {
      throw ConfigError("config key 'seed' must be a non-negative integer");
    }
    cfg.seed = j["seed"].get<std::uint64_t>();
  }

  if (j.contains("kbm")) {
    const json & k = j["kbm"];
    check_keys(
      k, {"wheelbase", "dt", "horizon_steps", "accel_max", "steer_max", "residual_scale"}, "kbm");
    kbm::KbmParams & kp = cfg.pipeline.kbm;
    kp.wheelbase = need_number(k, "wheelbase", kp.wheelbase);
    kp.dt = need_number(k, "dt", kp.dt);
    kp.horizon_steps = need_int(k, "horizon_steps", kp.horizon_steps);
    kp.accel_max = need_number(k, "accel_max", kp.accel_max);
    kp.steer_max = need_number(k, "steer_max", kp.steer_max);
    kp.residual_scale = need_number(k, "residual_scale", kp.residual_scale);
    if (kp.wheelbase <= 0 || kp.dt <= 0 || kp.horizon_steps <= 0 || kp.accel_max <= 0 ||
        kp.steer_max <= 0 || kp.steer_max >= kPi / 2.0 || kp.residual_scale < 0) {
      throw ConfigError("kbm parameters out of range");
    }
  }

  if (j.contains("arbitration")) {
    const json & a = j["arbitration"];
    check_keys(a, {"ttc_emergency_s", "ttc_safety_s", "speed_targets"}, "arbitration");
    rules::ArbitrationConfig & ac = cfg.pipeline.arbitration;
    ac.ttc_emergency_s = need_number(a, "ttc_emergency_s", ac.ttc_emergency_s);
    ac.ttc_safety_s = need_number(a, "ttc_safety_s", ac.ttc_safety_s);
    if (a.contains("speed_targets")) {
      const json & st = a["speed_targets"];
      check_keys(st, {"creep", "slow", "normal", "fast"}, "speed_targets");
      ac.speed_targets.creep = need_number(st, "creep", ac.speed_targets.creep);
      ac.speed_targets.slow = need_number(st, "slow", ac.speed_targets.slow);
      ac.speed_targets.normal = need_number(st, "normal", ac.speed_targets.normal);
      ac.speed_targets.fast = need_number(st, "fast", ac.speed_targets.fast);
    }
    if (ac.ttc_emergency_s <= 0 || ac.ttc_safety_s <= ac.ttc_emergency_s) {
      throw ConfigError("arbitration thresholds must satisfy 0 < emergency < safety");
    }
  }

  if (j.contains("conditioning")) {
    const json & c = j["conditioning"];
    check_keys(
      c, {"feature_dim", "modes", "hidden_dim", "bias_max", "g_scale", "loss_weights"},
      "conditioning");
    cond::ConditioningConfig & cc = cfg.pipeline.conditioning;
    cc.feature_dim = need_int(c, "feature_dim", cc.feature_dim);
    cc.modes = need_int(c, "modes", cc.modes);
    cc.hidden_dim = need_int(c, "hidden_dim", cc.hidden_dim);
    cc.bias_max = need_number(c, "bias_max", cc.bias_max);
    cc.g_scale_init = need_number(c, "g_scale", cc.g_scale_init);
    if (c.contains("loss_weights")) {
      const json & lw = c["loss_weights"];
      check_keys(lw, {"imitation", "residual_w_y", "smoothing", "classification"}, "loss_weights");
      cc.loss_weights.imitation = need_number(lw, "imitation", cc.loss_weights.imitation);
      cc.loss_weights.residual_w_y = need_number(lw, "residual_w_y", cc.loss_weights.residual_w_y);
      cc.loss_weights.smoothing = need_number(lw, "smoothing", cc.loss_weights.smoothing);
      cc.loss_weights.classification =
        need_number(lw, "classification", cc.loss_weights.classification);
    }
    if (cc.feature_dim <= 0 || cc.modes <= 0 || cc.hidden_dim <= 0 || cc.bias_max < 0) {
      throw ConfigError("conditioning parameters out of range");
    }
  }

  cfg.generator = need_string(j, "generator", cfg.generator);
  cfg.suite = need_string(j, "suite", cfg.suite);
  cfg.out_dir = need_string(j, "out_dir", cfg.out_dir);
  cfg.weights = need_string(j, "weights", cfg.weights);
  cfg.ablate = need_string(j, "ablate", cfg.ablate);

  if (j.contains("train")) {
    const json & t = j["train"];
    check_keys(t, {"stage1_steps", "stage2_steps", "learning_rate", "learn_g_scale"}, "train");
    cfg.train.stage1_steps = need_int(t, "stage1_steps", cfg.train.stage1_steps);
    cfg.train.stage2_steps = need_int(t, "stage2_steps", cfg.train.stage2_steps);
    cfg.train.learning_rate = need_number(t, "learning_rate", cfg.train.learning_rate);
    cfg.train.learn_g_scale = need_bool(t, "learn_g_scale", cfg.train.learn_g_scale);
    if (cfg.train.stage1_steps < 0 || cfg.train.stage2_steps < 0 || cfg.train.learning_rate < 0) {
      throw ConfigError("train parameters out of range");
    }
  }

  // One speed-target table drives both arbitration ranking and the velocity
  // bias; keep the conditioning copy in lockstep.
  cfg.pipeline.conditioning.speed_targets = cfg.pipeline.arbitration.speed_targets;

  // Validates the ablation name early.
  pipe::ablation_from_string(cfg.ablate);
  return cfg;
}

RunConfig load_config(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_env_overrides(RunConfig & cfg)
{
  if (const char * v = std::getenv("NSPLAN_SEED")) {
    try {
      cfg.seed = std::stoull(v);
    } catch (const std::exception &) {
      throw ConfigError("NSPLAN_SEED must be a non-negative integer");
    }
  }
  if (const char * v = std::getenv("NSPLAN_SUITE")) {
    cfg.suite = v;
  }
  if (const char * v = std::getenv("NSPLAN_OUT")) {
    cfg.out_dir = v;
  }
  if (const char * v = std::getenv("NSPLAN_GENERATOR")) {
    cfg.generator = v;
  }
  if (const char * v = std::getenv("NSPLAN_WEIGHTS")) {
    cfg.weights = v;
  }
}

std::string RunConfig::to_json() const
{
  json j;
  j["seed"] = seed;
  j["kbm"] = {
    {"wheelbase", pipeline.kbm.wheelbase},
    {"dt", pipeline.kbm.dt},
    {"horizon_steps", pipeline.kbm.horizon_steps},
    {"accel_max", pipeline.kbm.accel_max},
    {"steer_max", pipeline.kbm.steer_max},
    {"residual_scale", pipeline.kbm.residual_scale},
  };
  j["arbitration"] = {
    {"ttc_emergency_s", pipeline.arbitration.ttc_emergency_s},
    {"ttc_safety_s", pipeline.arbitration.ttc_safety_s},
    {"speed_targets",
     {{"creep", pipeline.arbitration.speed_targets.creep},
      {"slow", pipeline.arbitration.speed_targets.slow},
      {"normal", pipeline.arbitration.speed_targets.normal},
      {"fast", pipeline.arbitration.speed_targets.fast}}},
  };
  j["conditioning"] = {
    {"feature_dim", pipeline.conditioning.feature_dim},
    {"modes", pipeline.conditioning.modes},
    {"hidden_dim", pipeline.conditioning.hidden_dim},
    {"bias_max", pipeline.conditioning.bias_max},
    {"g_scale", pipeline.conditioning.g_scale_init},
    {"loss_weights",
     {{"imitation", pipeline.conditioning.loss_weights.imitation},
      {"residual_w_y", pipeline.conditioning.loss_weights.residual_w_y},
      {"smoothing", pipeline.conditioning.loss_weights.smoothing},
      {"classification", pipeline.conditioning.loss_weights.classification}}},
  };
  j["generator"] = generator;
  j["suite"] = suite;
  j["out_dir"] = out_dir;
  j["weights"] = weights;
  j["ablate"] = ablate;
  j["train"] = {
    {"stage1_steps", train.stage1_steps},
    {"stage2_steps", train.stage2_steps},
    {"learning_rate", train.learning_rate},
    {"learn_g_scale", train.learn_g_scale},
  };
  return j.dump(2) + "\n";
}

}  // namespace nsplan::config
