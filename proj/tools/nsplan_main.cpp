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

// nsplan command line. Subcommands:
//   run    evaluate a scenario suite and write metrics + replayable traces
//   train  two-stage imitation training, writes a checkpoint + loss curve
//   trace  render recorded frames layer by layer; --replay re-checks them
//
// Exit codes: 0 ok, 2 configuration error, 3 runtime error, 4 check failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsplan/config.hpp"
#include "nsplan/errors.hpp"
#include "nsplan/pipeline.hpp"
#include "nsplan/train.hpp"

namespace fs = std::filesystem;
using namespace nsplan;

namespace
{

std::string sv(std::string_view v) { return std::string(v); }

std::string fmt(const char * spec, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void write_file(const fs::path & path, const std::string & body)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open for writing: " + path.string());
  }
  out << body;
  if (!out.flush()) {
    throw Error("write failed: " + path.string());
  }
}

// Flags shared by the subcommands; each remembers whether it was set so
// config-file and environment values survive unless overridden.
struct CommonFlags
{
  std::string config_path;
  std::string suite;
  std::uint64_t seed{0};
  std::string out_dir;
  std::string generator;
  std::string weights;
  std::string ablate;
  CLI::Option * o_suite{nullptr};
  CLI::Option * o_seed{nullptr};
  CLI::Option * o_out{nullptr};
  CLI::Option * o_generator{nullptr};
  CLI::Option * o_weights{nullptr};
  CLI::Option * o_ablate{nullptr};
};

void add_common_flags(CLI::App * cmd, CommonFlags & f)
{
  cmd->add_option("--config", f.config_path, "JSON config file (defaults used when absent)");
  f.o_suite = cmd->add_option("--suite", f.suite, "scenario suite JSON");
  f.o_seed = cmd->add_option("--seed", f.seed, "master seed");
  f.o_out = cmd->add_option("--out", f.out_dir, "output directory");
  f.o_generator =
    cmd->add_option("--generator", f.generator, "rule generator: template | cache:<dir> | http:<url>");
  f.o_weights = cmd->add_option("--weights", f.weights, "model checkpoint to load");
  f.o_ablate =
    cmd->add_option("--ablate", f.ablate, "ablation: no-asp | no-kbm-residual | no-smoothing");
}

// defaults < config file < environment < explicit flags.
config::RunConfig resolve_config(const CommonFlags & f)
{
  config::RunConfig cfg =
    f.config_path.empty() ? config::default_config() : config::load_config(f.config_path);
  config::apply_env_overrides(cfg);
  if (f.o_suite->count() > 0) cfg.suite = f.suite;
  if (f.o_seed->count() > 0) cfg.seed = f.seed;
  if (f.o_out->count() > 0) cfg.out_dir = f.out_dir;
  if (f.o_generator->count() > 0) cfg.generator = f.generator;
  if (f.o_weights->count() > 0) cfg.weights = f.weights;
  if (f.o_ablate->count() > 0) cfg.ablate = f.ablate;
  pipe::ablation_from_string(cfg.ablate);  // validate early
  return cfg;
}

cond::ModelWeights load_or_init_weights(const config::RunConfig & cfg)
{
  if (cfg.weights.empty()) {
    return cond::ModelWeights::init(
      cfg.pipeline.conditioning, cfg.pipeline.kbm.horizon_steps, cfg.seed);
  }
  return cond::ModelWeights::load(
    cfg.weights, cfg.pipeline.conditioning, cfg.pipeline.kbm.horizon_steps);
}

int cmd_run(const CommonFlags & flags)
{
  const config::RunConfig cfg = resolve_config(flags);
  const pipe::Ablation ablation = pipe::ablation_from_string(cfg.ablate);
  const std::vector<scen::ScenarioSpec> specs = scen::load_suite(cfg.suite);
  const cond::ModelWeights weights = load_or_init_weights(cfg);

  const pipe::SuiteResult result =
    pipe::evaluate(specs, weights, cfg.pipeline, cfg.generator, ablation);

  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir / "traces");
  write_file(out_dir / "config.json", cfg.to_json());
  write_file(out_dir / "weights.json", weights.to_json());
  write_file(out_dir / "metrics.csv", result.metrics_csv());
  for (const pipe::ScenarioResult & sr : result.scenarios) {
    std::string body;
    for (const pipe::FrameTrace & tr : sr.traces) {
      body += tr.to_json_line();
      body += "\n";
    }
    write_file(out_dir / "traces" / (sr.scenario_id + ".jsonl"), body);
  }

  std::printf("%-28s %9s %9s %9s %9s\n", "scenario", "l2_1s", "l2_avg", "col_rate", "tpc_avg");
  const auto print_row = [](const std::string & name, const metrics::MetricsReport & r) {
    std::printf(
      "%-28s %9.4f %9.4f %9.4f %9.4f\n", name.c_str(), r.l2.at_1s, r.l2.avg, r.collision_rate,
      r.tpc.avg);
  };
  for (const pipe::ScenarioResult & sr : result.scenarios) {
    print_row(sr.scenario_id, sr.report);
  }
  print_row("aggregate", result.aggregate);
  std::printf(
    "wrote %s, %s and %zu trace files under %s\n", (out_dir / "metrics.csv").c_str(),
    (out_dir / "weights.json").c_str(), result.scenarios.size(), (out_dir / "traces").c_str());
  return 0;
}

int cmd_train(const CommonFlags & flags)
{
  const config::RunConfig cfg = resolve_config(flags);
  const pipe::Ablation ablation = pipe::ablation_from_string(cfg.ablate);
  if (ablation != pipe::Ablation::none && ablation != pipe::Ablation::no_smoothing) {
    throw ConfigError("training supports only the no-smoothing ablation, got '" + cfg.ablate + "'");
  }
  cond::LossOptions lo;
  lo.disable_smoothing = ablation == pipe::Ablation::no_smoothing;

  const std::vector<scen::ScenarioSpec> specs = scen::load_suite(cfg.suite);
  const train::TrainResult result =
    train::train(specs, cfg.pipeline, cfg.train, cfg.generator, cfg.seed, lo);

  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);
  write_file(out_dir / "config.json", cfg.to_json());
  write_file(out_dir / "weights.json", result.weights.to_json());
  write_file(out_dir / "train_curve.csv", result.curve_csv());

  if (!result.curve.empty()) {
    const train::LossCurveRow & first = result.curve.front();
    const train::LossCurveRow & last = result.curve.back();
    std::printf(
      "trained %zu steps: total loss %.6f -> %.6f (imitation %.6f -> %.6f)\n",
      result.curve.size(), first.losses.total, last.losses.total, first.losses.imitation_l2,
      last.losses.imitation_l2);
  }
  std::printf("wrote %s\n", (out_dir / "weights.json").c_str());
  return 0;
}

// Three layers per frame: the facts the planner saw, the rule arbitration
// that produced the decision, and the conditioned trajectory.
std::string render_trace(const pipe::FrameTrace & tr)
{
  std::string s;
  s += "=== " + tr.scenario_id + " frame " + std::to_string(tr.frame) + "  t=" +
       fmt("%.2f", tr.t) + "s  ablation=" + tr.ablation + " ===\n";
  s += "facts:\n";
  std::size_t pos = 0;
  while (pos < tr.facts_text.size()) {
    const std::size_t nl = tr.facts_text.find('\n', pos);
    const std::size_t end = nl == std::string::npos ? tr.facts_text.size() : nl;
    s += "  " + tr.facts_text.substr(pos, end - pos) + "\n";
    pos = end + 1;
  }
  s += "rules:\n";
  if (tr.suggestions.empty()) {
    s += "  (deductive layer bypassed)\n";
  }
  for (const Suggestion & sg : tr.suggestions) {
    s += "  considered: " + sv(to_string(sg.type)) + " / " + sv(to_string(sg.action)) + " / " +
         sv(to_string(sg.speed)) + "  [" + sg.provenance + "]\n";
  }
  if (!tr.generator_error.empty()) {
    s += "  generator_error: " + tr.generator_error + "\n";
  }
  for (const std::string & note : tr.notes) {
    s += "  note: " + note + "\n";
  }
  s += "  decision: " + sv(to_string(tr.decision.action)) + " @ " +
       sv(to_string(tr.decision.speed)) + "  tier=" + sv(to_string(tr.decision.tier)) +
       "  from=" + tr.decision.winning_provenance + "\n";
  s += "conditioning: |d|=" + fmt("%.6g", tr.d_norm) + "  b_v=" + fmt("%.6g", tr.b_v) +
       "  v0'=" + fmt("%.6g", tr.v0_prime) + "  mode=" + std::to_string(tr.mode) + "\n";
  s += "plan (ego frame):\n";
  s += "   k      t       a   delta |     physics x,y ->       final x,y  (residual)      v     psi\n";
  for (std::size_t k = 0; k < tr.final_traj.points.size(); ++k) {
    const kbm::Waypoint & p = tr.physics.points[k];
    const kbm::Waypoint & f = tr.final_traj.points[k];
    const double rx = k < tr.residual.size() ? tr.residual[k][0] : 0.0;
    const double ry = k < tr.residual.size() ? tr.residual[k][1] : 0.0;
    char line[192];
    std::snprintf(
      line, sizeof(line),
      "  %2zu %6.2f %7.3f %7.3f | %7.3f,%7.3f -> %7.3f,%7.3f (%+.3f,%+.3f) %6.3f %7.3f\n", k,
      f.t, tr.controls[k].a, tr.controls[k].delta, p.x, p.y, f.x, f.y, rx, ry, f.v, f.psi);
    s += line;
  }
  return s;
}

int cmd_trace(
  const CommonFlags & flags, const std::string & path, int frame, bool frame_set, bool replay)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open trace file: " + path);
  }
  std::vector<pipe::FrameTrace> traces;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    traces.push_back(pipe::FrameTrace::from_json_line(line));
  }
  if (traces.empty()) {
    throw EmptyInput("trace file has no frames: " + path);
  }

  std::vector<const pipe::FrameTrace *> selected;
  for (const pipe::FrameTrace & tr : traces) {
    if (!frame_set || tr.frame == frame) {
      selected.push_back(&tr);
    }
  }
  if (selected.empty()) {
    throw FrameNotFound("frame " + std::to_string(frame) + " not present in " + path);
  }

  for (const pipe::FrameTrace * tr : selected) {
    std::fputs(render_trace(*tr).c_str(), stdout);
  }

  if (!replay) {
    return 0;
  }
  const config::RunConfig cfg = resolve_config(flags);
  if (cfg.weights.empty()) {
    throw ConfigError("--replay needs a checkpoint: pass --weights or set NSPLAN_WEIGHTS");
  }
  const cond::ModelWeights weights = cond::ModelWeights::load(
    cfg.weights, cfg.pipeline.conditioning, cfg.pipeline.kbm.horizon_steps);
  int mismatched = 0;
  for (const pipe::FrameTrace * tr : selected) {
    const std::vector<std::string> mismatches = pipe::replay_frame(*tr, weights, cfg.pipeline);
    if (!mismatches.empty()) {
      ++mismatched;
      std::printf("replay MISMATCH %s frame %d:\n", tr->scenario_id.c_str(), tr->frame);
      for (const std::string & m : mismatches) {
        std::printf("  %s\n", m.c_str());
      }
    }
  }
  if (mismatched > 0) {
    std::printf("replay: %d of %zu frames mismatched\n", mismatched, selected.size());
    return 4;
  }
  std::printf("replay: all %zu frames match exactly\n", selected.size());
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"deduction-conditioned trajectory planner"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App * run_cmd = app.add_subcommand("run", "evaluate a suite and write traces");
  add_common_flags(run_cmd, run_flags);

  CommonFlags train_flags;
  CLI::App * train_cmd = app.add_subcommand("train", "two-stage imitation training");
  add_common_flags(train_cmd, train_flags);

  CommonFlags trace_flags;
  std::string trace_path;
  int trace_frame = 0;
  bool trace_replay = false;
  CLI::App * trace_cmd = app.add_subcommand("trace", "render recorded frames");
  trace_cmd->add_option("path", trace_path, "trace .jsonl file")->required();
  CLI::Option * o_frame = trace_cmd->add_option("--frame", trace_frame, "select one frame index");
  trace_cmd->add_flag("--replay", trace_replay, "re-run and compare every recorded value");
  add_common_flags(trace_cmd, trace_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run_cmd->parsed()) {
      return cmd_run(run_flags);
    }
    if (train_cmd->parsed()) {
      return cmd_train(train_flags);
    }
    return cmd_trace(trace_flags, trace_path, trace_frame, o_frame->count() > 0, trace_replay);
  } catch (const ConfigError & e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
