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

// Release gate. Prints exactly one PASS/FAIL verdict line per numbered
// criterion with the measured quantities, and exits nonzero if any criterion
// fails. Progress notes go to stderr so stdout stays a clean verdict log.
// The two checkpoints the behavioral criteria need are trained in-process
// from the committed training suite; that is the long step.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "arbitration_reference.hpp"
#include "euler_reference.hpp"
#include "finite_difference.hpp"
#include "nsplan/conditioning.hpp"
#include "nsplan/config.hpp"
#include "nsplan/errors.hpp"
#include "nsplan/kbm.hpp"
#include "nsplan/metrics.hpp"
#include "nsplan/pipeline.hpp"
#include "nsplan/rng.hpp"
#include "nsplan/rules.hpp"
#include "nsplan/scenario.hpp"
#include "nsplan/text.hpp"
#include "nsplan/train.hpp"
#include "nsplan/vocab.hpp"

using namespace nsplan;
namespace fs = std::filesystem;

namespace
{

int g_failures = 0;

std::string strf(const char * format, ...)
{
  char buf[768];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

void verdict(int criterion, bool pass, const std::string & detail)
{
  std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) {
    ++g_failures;
  }
}

void info(const std::string & message)
{
  std::fprintf(stderr, "[info] %s\n", message.c_str());
  std::fflush(stderr);
}

std::string read_file(const fs::path & path)
{
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path & path, const std::string & body)
{
  std::ofstream out(path, std::ios::binary);
  out << body;
}

struct CmdResult
{
  int status{-1};
  std::string out;
};

// Runs a shell command, capturing stdout+stderr and the exit code.
CmdResult run_cmd(const std::string & cmd)
{
  CmdResult r;
  FILE * pipe = ::popen((cmd + " 2>&1").c_str(), "r");
  if (pipe == nullptr) {
    return r;
  }
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) {
    r.out.append(buf, n);
  }
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

bool contains(const std::string & haystack, const std::string & needle)
{
  return haystack.find(needle) != std::string::npos;
}

std::string first_line(const std::string & s)
{
  const std::size_t pos = s.find('\n');
  return pos == std::string::npos ? s : s.substr(0, pos);
}

// ---------------------------------------------------------------------------
// Criterion 1: integrator accuracy against a fine-step Euler oracle, plus the
// measured convergence order of the midpoint scheme.

void criterion_1()
{
  const kbm::KbmParams p;
  Rng rng(101);

  // Terminal error over 100 randomized rollouts vs a dt=1e-4 Euler oracle.
  // Gentle steering keeps both integrators far from the v >= 0 clamp.
  double worst_terminal = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const kbm::VehicleState s0{
      rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(4.0, 10.0),
      rng.uniform(-1.0, 1.0)};
    std::vector<kbm::ControlStep> controls;
    std::vector<std::pair<double, double>> pairs;
    for (int j = 0; j < p.horizon_steps; ++j) {
      const kbm::ControlStep c{rng.uniform(-1.0, 1.0), rng.uniform(-0.003, 0.003)};
      controls.push_back(c);
      pairs.emplace_back(c.a, c.delta);
    }
    const kbm::Trajectory traj = kbm::rollout(s0, controls, p);
    const std::vector<oracle::CarState> ref =
      oracle::euler_rollout({s0.x, s0.y, s0.v, s0.psi}, pairs, p.wheelbase, p.dt, 5000);
    const kbm::Waypoint & got = traj.points.back();
    const oracle::CarState & want = ref.back();
    worst_terminal = std::max(worst_terminal, std::hypot(got.x - want.x, got.y - want.y));
  }

  // Convergence order: halve dt under the same piecewise-constant controls
  // and compare both grids against a much finer oracle. Moderate steering
  // keeps the dt^2 term well above the oracle's own error.
  Rng org(202);
  double coarse_sq = 0.0;
  double fine_sq = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const kbm::VehicleState s0{0.0, 0.0, org.uniform(7.0, 10.0), org.uniform(-0.5, 0.5)};
    std::vector<kbm::ControlStep> coarse_controls;
    std::vector<kbm::ControlStep> fine_controls;
    std::vector<std::pair<double, double>> pairs;
    for (int j = 0; j < p.horizon_steps; ++j) {
      const kbm::ControlStep c{org.uniform(-1.5, 1.5), org.uniform(-0.25, 0.25)};
      coarse_controls.push_back(c);
      fine_controls.push_back(c);
      fine_controls.push_back(c);
      pairs.emplace_back(c.a, c.delta);
    }
    kbm::KbmParams fine = p;
    fine.dt = p.dt / 2.0;
    fine.horizon_steps = 2 * p.horizon_steps;
    const kbm::Waypoint coarse_end = kbm::rollout(s0, coarse_controls, p).points.back();
    const kbm::Waypoint fine_end = kbm::rollout(s0, fine_controls, fine).points.back();
    const oracle::CarState ref =
      oracle::euler_rollout({s0.x, s0.y, s0.v, s0.psi}, pairs, p.wheelbase, p.dt, 200000).back();
    const double ec = std::hypot(coarse_end.x - ref.x, coarse_end.y - ref.y);
    const double ef = std::hypot(fine_end.x - ref.x, fine_end.y - ref.y);
    coarse_sq += ec * ec;
    fine_sq += ef * ef;
  }
  const double exponent = std::log2(std::sqrt(coarse_sq / fine_sq));

  const bool pass = worst_terminal <= 1e-3 && exponent >= 1.8 && exponent <= 2.2;
  verdict(
    1, pass,
    strf(
      "100 rollouts: worst terminal error %.3e m (limit 1e-3); convergence exponent %.3f "
      "(window [1.8, 2.2])",
      worst_terminal, exponent));
}

// ---------------------------------------------------------------------------
// Criterion 2: every rollout Jacobian entry and every loss-gradient entry
// against central finite differences.

struct LossProbe
{
  cond::ModelWeights w;
  cond::PlanningQuery q;
  FinalDecision dec;
  double v0{0.0};
  Eigen::MatrixXd expert;
  ActionSymbol label{ActionSymbol::keep_lane};
};

// Finite differences are only meaningful away from the winner-take-all mode
// switch, the bias clamp/floor, and the v >= 0 clamp; resample until the
// probe sits clearly inside the smooth region.
bool probe_is_smooth(
  const LossProbe & p, const cond::ConditioningConfig & cfg, const kbm::KbmParams & kp)
{
  const cond::PlanResult plan = cond::plan_forward(p.q, p.dec, p.v0, p.w, cfg, kp);
  double best = -1e300;
  double second = -1e300;
  for (int m = 0; m < plan.mode_scores.size(); ++m) {
    const double s = plan.mode_scores(m);
    if (s > best) {
      second = best;
      best = s;
    } else if (s > second) {
      second = s;
    }
  }
  if (plan.mode_scores.size() > 1 && best - second < 1e-3) {
    return false;
  }
  if (plan.bias.clamped || plan.bias.floored) {
    return false;
  }
  if (std::fabs(plan.bias.raw) > cfg.bias_max - 0.01 || plan.bias.v0_prime < 0.05) {
    return false;
  }
  if (plan.physics.start.v < 0.2) {
    return false;
  }
  for (const kbm::Waypoint & pt : plan.physics.points) {
    if (pt.v < 0.2) {
      return false;
    }
  }
  return true;
}

LossProbe make_loss_probe(
  std::uint64_t seed, const cond::ConditioningConfig & cfg, const kbm::KbmParams & kp)
{
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    Rng rng(779310ULL + seed * 1013ULL + attempt * 7919ULL);
    LossProbe p;
    p.w = cond::ModelWeights::init(cfg, kp.horizon_steps, rng.next_u64());
    p.q = cond::PlanningQuery::zeros(1, cfg.modes, cfg.feature_dim);
    for (Eigen::Index i = 0; i < p.q.data.size(); ++i) {
      p.q.data.data()[i] = rng.uniform(-1.0, 1.0);
    }
    p.dec.action = static_cast<ActionSymbol>(rng.below(9));
    p.dec.speed = static_cast<SpeedSymbol>(rng.below(6));
    p.dec.tier = RuleType::safety;
    p.dec.winning_provenance = "probe";
    p.v0 = rng.uniform(4.0, 8.0);
    p.expert = Eigen::MatrixXd(kp.horizon_steps, 2);
    for (int k = 0; k < kp.horizon_steps; ++k) {
      p.expert(k, 0) = p.v0 * kp.dt * (k + 1) + rng.uniform(-0.5, 0.5);
      p.expert(k, 1) = rng.uniform(-0.5, 0.5);
    }
    p.label = static_cast<ActionSymbol>(rng.below(9));
    if (probe_is_smooth(p, cfg, kp)) {
      return p;
    }
  }
  throw Error("no smooth loss probe found for seed " + std::to_string(seed));
}

std::vector<std::pair<double *, const double *>> param_pairs(
  cond::ModelWeights & w, const cond::WeightGrads & g)
{
  std::vector<std::pair<double *, const double *>> out;
  auto mat = [&out](Eigen::MatrixXd & wm, const Eigen::MatrixXd & gm) {
    for (Eigen::Index i = 0; i < wm.size(); ++i) {
      out.emplace_back(wm.data() + i, gm.data() + i);
    }
  };
  auto vec = [&out](Eigen::VectorXd & wv, const Eigen::VectorXd & gv) {
    for (Eigen::Index i = 0; i < wv.size(); ++i) {
      out.emplace_back(wv.data() + i, gv.data() + i);
    }
  };
  mat(w.action_table, g.action_table);
  mat(w.speed_table, g.speed_table);
  mat(w.w1, g.w1);
  vec(w.b1, g.b1);
  mat(w.w2, g.w2);
  vec(w.b2, g.b2);
  mat(w.wc, g.wc);
  vec(w.bc, g.bc);
  out.emplace_back(&w.g_scale, &g.g_scale);
  return out;
}

void criterion_2()
{
  const kbm::KbmParams kp;

  // Part A: rollout Jacobians. Mild controls keep psi away from the wrap
  // seam and v away from the clamp so the finite differences are smooth.
  Rng rng(2026);
  int jac_checked = 0;
  int jac_bad = 0;
  double jac_worst = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const kbm::VehicleState s0{
      rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(5.0, 10.0),
      rng.uniform(-0.5, 0.5)};
    std::vector<kbm::ControlStep> controls;
    for (int j = 0; j < kp.horizon_steps; ++j) {
      controls.push_back({rng.uniform(-1.4, 1.4), rng.uniform(-0.15, 0.15)});
    }
    const kbm::RolloutWithGradients rg = kbm::rollout_with_gradients(s0, controls, kp);
    const int params = rg.gradients.param_count();
    for (int col = 0; col < params; ++col) {
      auto perturbed = [&](double eps) {
        kbm::VehicleState s = s0;
        std::vector<kbm::ControlStep> cs = controls;
        if (col < kp.horizon_steps) {
          cs[col].a += eps;
        } else if (col < 2 * kp.horizon_steps) {
          cs[col - kp.horizon_steps].delta += eps;
        } else {
          s.v += eps;
        }
        return kbm::rollout(s, cs, kp);
      };
      const double h = 1e-5;
      const kbm::Trajectory plus = perturbed(h);
      const kbm::Trajectory minus = perturbed(-h);
      for (int k = 0; k < kp.horizon_steps; ++k) {
        const std::array<double, 4> fd = {
          (plus.points[k].x - minus.points[k].x) / (2.0 * h),
          (plus.points[k].y - minus.points[k].y) / (2.0 * h),
          (plus.points[k].v - minus.points[k].v) / (2.0 * h),
          (plus.points[k].psi - minus.points[k].psi) / (2.0 * h)};
        for (int row = 0; row < 4; ++row) {
          const double got = rg.gradients.jac[k](row, col);
          ++jac_checked;
          if (!oracle::grad_close(got, fd[row])) {
            ++jac_bad;
          }
          const double scale = std::max(std::fabs(got), std::fabs(fd[row]));
          if (scale > 1e-7) {
            jac_worst = std::max(jac_worst, std::fabs(got - fd[row]) / scale);
          }
        }
      }
    }
  }

  // Part B: analytic loss gradients at reduced widths, every trainable
  // scalar, against central differences of the end-to-end total loss.
  cond::ConditioningConfig small;
  small.feature_dim = 8;
  small.modes = 3;
  small.hidden_dim = 5;
  const cond::LossWeights lw = small.loss_weights;
  int loss_checked = 0;
  int loss_bad = 0;
  double loss_worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    LossProbe p = make_loss_probe(seed, small, kp);
    const cond::PlanResult plan = cond::plan_forward(p.q, p.dec, p.v0, p.w, small, kp);
    const cond::WeightGrads g = cond::backward(plan, p.expert, p.label, p.w, small, kp, lw);
    for (auto & [wp, gp] : param_pairs(p.w, g)) {
      const double saved = *wp;
      const double fd = oracle::central_diff([&](double h) {
        *wp = saved + h;
        const cond::PlanResult pr = cond::plan_forward(p.q, p.dec, p.v0, p.w, small, kp);
        *wp = saved;
        return cond::compute_losses(pr, p.expert, p.label, lw).total;
      });
      ++loss_checked;
      if (!oracle::grad_close(*gp, fd)) {
        ++loss_bad;
      }
      const double scale = std::max(std::fabs(*gp), std::fabs(fd));
      if (scale > 1e-7) {
        loss_worst = std::max(loss_worst, std::fabs(*gp - fd) / scale);
      }
    }
  }

  const bool pass = jac_bad == 0 && loss_bad == 0;
  verdict(
    2, pass,
    strf(
      "%d Jacobian entries (max rel %.1e) and %d loss-gradient entries (max rel %.1e) vs "
      "central differences, 100+100 seeds; %d outside rel 1e-4 / floor 1e-7",
      jac_checked, jac_worst, loss_checked, loss_worst, jac_bad + loss_bad));
}

// ---------------------------------------------------------------------------
// Criterion 3: arbitration equals the brute-force reference, is invariant
// under permutation and duplication, and respects tier dominance.

void criterion_3()
{
  const rules::ArbitrationConfig cfg;
  Rng rng(303);
  int violations = 0;
  const int trials = 10000;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(8));
    std::vector<Suggestion> input;
    for (int i = 0; i < n; ++i) {
      Suggestion s;
      s.action = static_cast<ActionSymbol>(rng.below(9));
      s.speed = static_cast<SpeedSymbol>(rng.below(6));
      s.type = static_cast<RuleType>(rng.below(5));
      s.provenance = "p" + std::to_string(rng.below(8));
      input.push_back(s);
    }
    const double ego = rng.uniform(0.0, 12.0);

    const FinalDecision base = rules::arbitrate(input, cfg, ego);
    if (!(base == oracle::ref_arbitrate(input, ego))) {
      ++violations;
      continue;
    }
    if (!(rules::arbitrate(input, cfg, ego) == base)) {
      ++violations;
      continue;
    }
    std::vector<Suggestion> shuffled = input;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    }
    if (!(rules::arbitrate(shuffled, cfg, ego) == base)) {
      ++violations;
      continue;
    }
    std::vector<Suggestion> duplicated = input;
    duplicated.push_back(input[rng.below(input.size())]);
    if (!(rules::arbitrate(duplicated, cfg, ego) == base)) {
      ++violations;
      continue;
    }
    int best_tier = 1000;
    for (const Suggestion & s : input) {
      best_tier = std::min(best_tier, tier_priority(s.type));
    }
    if (tier_priority(base.tier) != best_tier) {
      ++violations;
    }
  }
  verdict(
    3, violations == 0,
    strf(
      "%d random multisets: reference equality, permutation/duplication invariance, tier "
      "dominance; %d violations",
      trials, violations));
}

// ---------------------------------------------------------------------------
// Criterion 4: the bounded-residual combine never moves a waypoint by more
// than lambda, and a zero residual reproduces the physics rollout exactly.

void criterion_4()
{
  const kbm::KbmParams kp;
  Rng rng(404);
  std::vector<kbm::Trajectory> pool;
  for (int i = 0; i < 50; ++i) {
    const kbm::VehicleState s0{
      rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), rng.uniform(0.0, 12.0),
      rng.uniform(-3.0, 3.0)};
    std::vector<kbm::ControlStep> controls;
    for (int j = 0; j < kp.horizon_steps; ++j) {
      controls.push_back({rng.uniform(-4.0, 4.0), rng.uniform(-0.6, 0.6)});
    }
    pool.push_back(kbm::rollout(s0, controls, kp));
  }

  // The bound check allows 1e-12 of slack: lambda*tanh(r) <= lambda holds
  // exactly, but re-deriving the offset as fl(x + d) - x picks up half an
  // ulp of the waypoint coordinate when the addition crosses a binade.
  const double lambda = kp.residual_scale;
  const double slack = 1e-12;
  int violations = 0;
  double worst = 0.0;
  const int trials = 10000;
  for (int trial = 0; trial < trials; ++trial) {
    const kbm::Trajectory & phys = pool[trial % pool.size()];
    const double mag = std::pow(10.0, rng.uniform(-3.0, 2.0));
    Eigen::MatrixXd raw(kp.horizon_steps, 2);
    for (int k = 0; k < kp.horizon_steps; ++k) {
      raw(k, 0) = rng.uniform(-mag, mag);
      raw(k, 1) = rng.uniform(-mag, mag);
    }
    const kbm::Trajectory fin = cond::combine(phys, raw, lambda);
    for (int k = 0; k < kp.horizon_steps; ++k) {
      const double dx = std::fabs(fin.points[k].x - phys.points[k].x);
      const double dy = std::fabs(fin.points[k].y - phys.points[k].y);
      worst = std::max({worst, dx, dy});
      if (dx > lambda + slack || dy > lambda + slack) {
        ++violations;
      }
    }
  }

  bool exact = true;
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(kp.horizon_steps, 2);
  for (const kbm::Trajectory & phys : pool) {
    if (!(cond::combine(phys, zero, lambda) == phys)) {
      exact = false;
    }
  }

  verdict(
    4, violations == 0 && exact,
    strf(
      "%d random residuals: max |delta| %.15f vs lambda %.2f (%d violations); zero residual "
      "reproduces physics exactly on 50 rollouts: %s",
      trials, worst, lambda, violations, exact ? "yes" : "no"));
}

// ---------------------------------------------------------------------------
// Criterion 5: the residual loss weights x ten times as strongly as y, and
// the ratio of unit-x to unit-y losses is exactly 10.

void criterion_5()
{
  const kbm::KbmParams kp;
  Eigen::MatrixXd unit_x = Eigen::MatrixXd::Zero(kp.horizon_steps, 2);
  Eigen::MatrixXd unit_y = Eigen::MatrixXd::Zero(kp.horizon_steps, 2);
  unit_x(0, 0) = 1.0;
  unit_y(0, 1) = 1.0;

  bool pass = true;
  std::array<double, 3> ratios{};
  const std::array<double, 3> w_ys = {0.1, 0.25, 1.0};
  for (std::size_t i = 0; i < w_ys.size(); ++i) {
    const double lx = cond::anisotropic_residual_loss(unit_x, w_ys[i]);
    const double ly = cond::anisotropic_residual_loss(unit_y, w_ys[i]);
    ratios[i] = lx / ly;
    if (ratios[i] != 10.0) {
      pass = false;
    }
  }
  verdict(
    5, pass,
    strf(
      "unit-x / unit-y residual loss ratio = %.17g, %.17g, %.17g for w_y = 0.1, 0.25, 1.0 "
      "(exact 10 required)",
      ratios[0], ratios[1], ratios[2]));
}

// ---------------------------------------------------------------------------
// Criterion 6: the pedestrian case study end to end, in-process and through
// the command-line trace renderer.

void criterion_6(
  const pipe::SuiteResult & case_res, const fs::path & art, const std::string & cli,
  const fs::path & weights_path)
{
  const pipe::ScenarioResult & sr = case_res.scenarios.at(0);
  const pipe::FrameTrace & t0 = sr.traces.at(0);

  const bool decision_ok =
    t0.decision.action == ActionSymbol::yield && t0.decision.speed == SpeedSymbol::zero;
  const bool bias_ok = t0.b_v <= -1.5 && t0.b_v >= -2.5;

  bool monotone = true;
  double prev_v = t0.final_traj.start.v;
  for (const kbm::Waypoint & p : t0.final_traj.points) {
    if (p.v > prev_v + 1e-9) {
      monotone = false;
    }
    prev_v = p.v;
  }
  const double terminal_v = t0.final_traj.points.back().v;
  const bool stop_ok = monotone && terminal_v <= 0.5;
  const bool collision_ok = sr.report.collision_rate == 0.0;

  // Render the same frame through the CLI and require all three reasoning
  // layers (facts, rules, conditioned plan) to appear.
  const fs::path suite_path = art / "case_suite.json";
  write_file(suite_path, R"({
  "scenarios": [
    {
      "template": "pedestrian_crossing",
      "id": "case_study",
      "seed": 501,
      "params": { "v0": 6.9, "gap": 4.5, "ttc": 0.89, "ped_speed": 2.5, "ped_y": -1.0 }
    }
  ]
}
)");
  const fs::path run_dir = art / "case_run";
  const CmdResult run = run_cmd(
    cli + " run --suite " + suite_path.string() + " --weights " + weights_path.string() +
    " --out " + run_dir.string());
  const std::string trace_file = (run_dir / "traces" / "case_study.jsonl").string();
  const CmdResult trace = run_cmd(cli + " trace " + trace_file + " --frame 0");
  const std::array<const char *, 8> markers = {
    "facts:",      "ego(",          "considered:",   "axiom:safe_following",
    "decision: yield @ zero", "conditioning:", "b_v=", "plan (ego frame):"};
  bool render_ok = run.status == 0 && trace.status == 0;
  std::string missing;
  for (const char * m : markers) {
    if (!contains(trace.out, m)) {
      render_ok = false;
      missing = m;
    }
  }
  const CmdResult replay = run_cmd(
    cli + " trace " + trace_file + " --replay --weights " + weights_path.string());
  const bool replay_ok = replay.status == 0;

  const bool pass = decision_ok && bias_ok && stop_ok && collision_ok && render_ok && replay_ok;
  std::string detail = strf(
    "decision (%s, %s), b_v %+0.3f, terminal v %.3f (monotone %s), collision rate %.3f, "
    "CLI layers %s, replay %s",
    std::string(to_string(t0.decision.action)).c_str(),
    std::string(to_string(t0.decision.speed)).c_str(), t0.b_v, terminal_v,
    monotone ? "yes" : "no", sr.report.collision_rate, render_ok ? "rendered" : "MISSING",
    replay_ok ? "exact" : "mismatch");
  if (!render_ok && !missing.empty()) {
    detail += " [missing marker: " + missing + "]";
  }
  if (run.status != 0) {
    detail += " [run failed: " + first_line(run.out) + "]";
  }
  verdict(6, pass, detail);
}

// ---------------------------------------------------------------------------
// Criterion 7: removing the deductive path must strictly raise the collision
// rate on the hazard suite.

void criterion_7(const pipe::SuiteResult & full, const pipe::SuiteResult & no_asp)
{
  int colliding = 0;
  for (const pipe::ScenarioResult & sr : no_asp.scenarios) {
    if (sr.report.collision_rate > 0.0) {
      ++colliding;
    }
  }
  const bool pass =
    full.aggregate.collision_rate < no_asp.aggregate.collision_rate && colliding >= 1;
  verdict(
    7, pass,
    strf(
      "collision rate %.4f (full) vs %.4f (no-asp) on %zu scenarios; no-asp collides on %d",
      full.aggregate.collision_rate, no_asp.aggregate.collision_rate, full.scenarios.size(),
      colliding));
}

// ---------------------------------------------------------------------------
// Criterion 8: every emitted physics trajectory respects the steering-limit
// curvature bound, and the final trajectory stays within lambda of it.

void criterion_8(
  const std::vector<const pipe::SuiteResult *> & suites, const pipe::PipelineConfig & cfg)
{
  const double kappa_limit =
    std::tan(cfg.kbm.steer_max) / cfg.kbm.wheelbase + 1e-6;
  const double lambda = cfg.kbm.residual_scale + 1e-12;
  long pairs = 0;
  long curvature_bad = 0;
  long residual_bad = 0;
  double kappa_max = 0.0;
  for (const pipe::SuiteResult * suite : suites) {
    for (const pipe::ScenarioResult & sr : suite->scenarios) {
      for (const pipe::FrameTrace & tr : sr.traces) {
        double prev_v = tr.physics.start.v;
        double prev_psi = tr.physics.start.psi;
        for (std::size_t k = 0; k < tr.physics.points.size(); ++k) {
          const kbm::Waypoint & p = tr.physics.points[k];
          const double arc = 0.5 * cfg.kbm.dt * (prev_v + p.v);
          if (arc > 1e-9) {
            const double kappa = std::fabs(wrap_angle(p.psi - prev_psi)) / arc;
            kappa_max = std::max(kappa_max, kappa);
            ++pairs;
            if (kappa > kappa_limit) {
              ++curvature_bad;
            }
          }
          prev_v = p.v;
          prev_psi = p.psi;
          const kbm::Waypoint & f = tr.final_traj.points[k];
          if (std::fabs(f.x - p.x) > lambda || std::fabs(f.y - p.y) > lambda) {
            ++residual_bad;
          }
        }
      }
    }
  }
  verdict(
    8, curvature_bad == 0 && residual_bad == 0,
    strf(
      "%ld waypoint pairs: max curvature %.6f vs limit %.6f (%ld over); %ld waypoints drift "
      "beyond lambda",
      pairs, kappa_max, kappa_limit, curvature_bad, residual_bad));
}

// ---------------------------------------------------------------------------
// Criterion 9: training with the smoothing term must not plan less
// consistently than the no-smoothing ablation.

void criterion_9(const pipe::SuiteResult & smoothed, const pipe::SuiteResult & plain)
{
  const bool pass = smoothed.aggregate.tpc.avg <= plain.aggregate.tpc.avg;
  verdict(
    9, pass,
    strf(
      "avg plan consistency %.4f m (smoothing) vs %.4f m (no-smoothing) on %zu scenarios",
      smoothed.aggregate.tpc.avg, plain.aggregate.tpc.avg, smoothed.scenarios.size()));
}

// ---------------------------------------------------------------------------
// Criterion 10: two identical CLI runs are byte-identical, and every
// recorded frame replays exactly.

void criterion_10(
  const fs::path & art, const fs::path & src_dir, const std::string & cli,
  const fs::path & weights_path, const pipe::PipelineConfig & cfg)
{
  const std::string suite = (src_dir / "suites" / "default.json").string();
  const fs::path dir_a = art / "run_a";
  const fs::path dir_b = art / "run_b";
  const std::string base = cli + " run --suite " + suite + " --seed 7 --weights " +
                           weights_path.string() + " --out ";
  const CmdResult ra = run_cmd(base + dir_a.string());
  const CmdResult rb = run_cmd(base + dir_b.string());

  bool identical = ra.status == 0 && rb.status == 0;
  identical = identical && read_file(dir_a / "metrics.csv") == read_file(dir_b / "metrics.csv");
  std::vector<fs::path> names;
  if (identical) {
    for (const auto & entry : fs::directory_iterator(dir_a / "traces")) {
      names.push_back(entry.path().filename());
    }
    std::sort(names.begin(), names.end());
    std::size_t b_count = 0;
    for (const auto & entry : fs::directory_iterator(dir_b / "traces")) {
      (void)entry;
      ++b_count;
    }
    identical = identical && b_count == names.size();
    for (const fs::path & name : names) {
      if (read_file(dir_a / "traces" / name) != read_file(dir_b / "traces" / name)) {
        identical = false;
      }
    }
  }

  // Config echo: the emitted effective config re-runs to identical results.
  const fs::path dir_c = art / "run_c";
  const CmdResult rc = run_cmd(
    cli + " run --config " + (dir_a / "config.json").string() + " --out " + dir_c.string());
  bool echo_ok = rc.status == 0 &&
                 read_file(dir_a / "metrics.csv") == read_file(dir_c / "metrics.csv");
  for (const fs::path & name : names) {
    if (read_file(dir_a / "traces" / name) != read_file(dir_c / "traces" / name)) {
      echo_ok = false;
    }
  }

  const cond::ModelWeights weights =
    cond::ModelWeights::load(weights_path.string(), cfg.conditioning, cfg.kbm.horizon_steps);
  long frames = 0;
  long mismatched = 0;
  for (const fs::path & name : names) {
    std::ifstream in(dir_a / "traces" / name);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) {
        continue;
      }
      const pipe::FrameTrace tr = pipe::FrameTrace::from_json_line(line);
      ++frames;
      if (!pipe::replay_frame(tr, weights, cfg).empty()) {
        ++mismatched;
      }
    }
  }

  verdict(
    10, identical && echo_ok && frames > 0 && mismatched == 0,
    strf(
      "repeat runs byte-identical: %s (%zu trace files); config echo re-run identical: %s; "
      "%ld frames replayed, %ld mismatched",
      identical ? "yes" : "no", names.size(), echo_ok ? "yes" : "no", frames, mismatched));
}

// ---------------------------------------------------------------------------
// Criterion 11: the parsers never crash on random bytes, fail only with the
// structured parse error, and accept exactly the closed vocabulary.

void criterion_11()
{
  Rng rng(1111);
  const int trials = 100000;
  long parsed_ok = 0;
  long parse_errors = 0;
  long foreign_errors = 0;
  for (int i = 0; i < trials; ++i) {
    std::string s(rng.below(201), '\0');
    for (char & ch : s) {
      ch = static_cast<char>(rng.below(256));
    }
    try {
      (void)text::parse_facts(s);
      ++parsed_ok;
    } catch (const text::ParseError &) {
      ++parse_errors;
    } catch (const std::exception &) {
      ++foreign_errors;
    }
    try {
      (void)text::parse_suggestions(s);
      ++parsed_ok;
    } catch (const text::ParseError &) {
      ++parse_errors;
    } catch (const std::exception &) {
      ++foreign_errors;
    }
  }

  const std::array<const char *, 9> actions = {
    "keep_lane",  "change_lane_left", "change_lane_right", "turn_left", "turn_right",
    "nudge_left", "nudge_right",      "yield",             "emergency_stop"};
  const std::array<const char *, 6> speeds = {"current", "zero", "creep", "slow", "normal",
                                              "fast"};
  const std::array<const char *, 3> navs = {"left", "right", "straight"};
  int accepted = 0;
  bool vocab_ok = true;
  for (const char * a : actions) {
    for (const char * s : speeds) {
      try {
        const std::string doc = std::string("suggestion(") + a + ", " + s + ", safety).";
        if (text::parse_suggestions(doc).size() != 1) {
          vocab_ok = false;
          continue;
        }
      } catch (const std::exception &) {
        vocab_ok = false;
        continue;
      }
      for (const char * n : navs) {
        try {
          (void)text::parse_facts(std::string("ego(1, 0, ") + n + ").");
          ++accepted;
        } catch (const std::exception &) {
          vocab_ok = false;
        }
      }
    }
  }
  for (const char * bad :
       {"suggestion(coast, zero, safety).", "suggestion(yield, reverse, safety)."}) {
    try {
      (void)text::parse_suggestions(bad);
      vocab_ok = false;
    } catch (const text::ParseError &) {
    }
  }
  try {
    (void)text::parse_facts("ego(1, 0, backward).");
    vocab_ok = false;
  } catch (const text::ParseError &) {
  }

  verdict(
    11, foreign_errors == 0 && vocab_ok && accepted == 162,
    strf(
      "%d fuzzed inputs x 2 parsers: %ld accepted, %ld structured rejections, %ld foreign "
      "errors; vocabulary cardinality %d/162",
      trials, parsed_ok, parse_errors, foreign_errors, accepted));
}

}  // namespace

int main()
{
  try {
    const fs::path src_dir(NSPLAN_SOURCE_DIR);
    const std::string cli = NSPLAN_CLI_PATH;
    const fs::path art = fs::current_path() / "acceptance_artifacts";
    fs::remove_all(art);
    fs::create_directories(art);

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();

    const pipe::PipelineConfig pcfg;
    const config::TrainParams tp;
    const std::vector<scen::ScenarioSpec> train_specs =
      scen::load_suite((src_dir / "suites" / "train.json").string());
    info(strf(
      "training checkpoint A (smoothing on): %d + %d steps, this is the long part",
      tp.stage1_steps, tp.stage2_steps));
    const train::TrainResult full = train::train(train_specs, pcfg, tp, "template", 20260815);
    info("training checkpoint B (smoothing off)");
    cond::LossOptions no_smoothing;
    no_smoothing.disable_smoothing = true;
    const train::TrainResult plain =
      train::train(train_specs, pcfg, tp, "template", 20260815, no_smoothing);
    const fs::path weights_path = art / "weights_full.json";
    full.weights.save(weights_path.string());

    info("evaluating suites");
    const std::vector<scen::ScenarioSpec> default_specs =
      scen::load_suite((src_dir / "suites" / "default.json").string());
    std::vector<scen::ScenarioSpec> case_specs;
    for (const scen::ScenarioSpec & spec : default_specs) {
      if (spec.id == "case_study") {
        case_specs.push_back(spec);
      }
    }
    const pipe::SuiteResult case_res =
      pipe::evaluate(case_specs, full.weights, pcfg, "template", pipe::Ablation::none);

    const std::vector<scen::ScenarioSpec> hazard_specs =
      scen::load_suite((src_dir / "suites" / "yield50.json").string());
    const pipe::SuiteResult hazard_full =
      pipe::evaluate(hazard_specs, full.weights, pcfg, "template", pipe::Ablation::none);
    const pipe::SuiteResult hazard_noasp =
      pipe::evaluate(hazard_specs, full.weights, pcfg, "template", pipe::Ablation::no_asp);

    const std::vector<scen::ScenarioSpec> tpc_specs =
      scen::load_suite((src_dir / "suites" / "tpc20.json").string());
    const pipe::SuiteResult tpc_smoothed =
      pipe::evaluate(tpc_specs, full.weights, pcfg, "template", pipe::Ablation::none);
    const pipe::SuiteResult tpc_plain =
      pipe::evaluate(tpc_specs, plain.weights, pcfg, "template", pipe::Ablation::none);

    criterion_6(case_res, art, cli, weights_path);
    criterion_7(hazard_full, hazard_noasp);
    criterion_8({&case_res, &hazard_full, &hazard_noasp, &tpc_smoothed, &tpc_plain}, pcfg);
    criterion_9(tpc_smoothed, tpc_plain);
    criterion_10(art, src_dir, cli, weights_path, pcfg);
    criterion_11();

    std::printf("%d of 11 criteria passed\n", 11 - g_failures);
    return g_failures == 0 ? 0 : 1;
  } catch (const std::exception & e) {
    std::fprintf(stderr, "[fatal] %s\n", e.what());
    std::printf("FAIL: acceptance run aborted: %s\n", e.what());
    return 2;
  }
}
