// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Pass criterion numbers to run a subset.

#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>

#include "drdqn/gradcheck.hpp"
#include "drdqn/trainer.hpp"

using namespace drdqn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "drdqn-acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Run {
  TrainResult result;
  fs::path dir;
  double seconds = 0.0;
};

Run desk_run(const std::string& env, AgentKind kind, std::uint64_t seed, const std::string& tag = "") {
  TrainOptions o;
  o.env_name = env;
  o.kind = kind;
  o.seed = seed;
  o.out_dir = work_dir() / fmt::format("{}-{}-{}{}", env, agent_kind_name(kind), seed, tag);
  const auto t0 = Clock::now();
  Run r{train(o), o.out_dir, 0.0};
  r.seconds = seconds_since(t0);
  return r;
}

double eval_return(const Run& run, const std::string& env, std::size_t episodes) {
  const Agent agent = restore_agent(run.result.checkpoint);
  return evaluate_agent(agent, *make_environment(env), episodes, 2024).mean;
}

// Kept across criteria so the determinism check can reuse a finished run.
std::map<std::string, Run> finished_runs;

Verdict gradient_correctness() {
  const auto t0 = Clock::now();
  const auto cases = run_gradcheck_suite(1e-5, 17);
  const double secs = seconds_since(t0);
  bool ok = secs < 60.0;
  std::string detail;
  for (const auto& c : cases) {
    ok = ok && c.report.max_rel_error < 1e-4;
    detail += fmt::format("{} {:.2e}, ", c.name, c.report.max_rel_error);
  }
  return {ok, fmt::format("{}tol 1e-4, {:.1f} s (limit 60 s)", detail, secs)};
}

Verdict oracle_convergence() {
  GridWorld grid;
  Rng rng = make_rng(0, 0);
  const double optimum = greedy_return(value_iteration(enumerate_mdp(grid), 0.99), grid, 1, rng);
  const double band = 0.05 * std::abs(optimum);
  bool ok = true;
  double slowest = 0.0;
  std::string detail = fmt::format("optimum {}; ", optimum);
  for (auto kind : {AgentKind::dqn, AgentKind::ddqn}) {
    int hits = 0;
    std::string returns;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Run r = desk_run("grid", kind, seed);
      const double ret = eval_return(r, "grid", 10);
      hits += std::abs(ret - optimum) <= band ? 1 : 0;
      slowest = std::max(slowest, r.seconds);
      returns += fmt::format("{}{}", seed ? " " : "", ret);
      finished_runs[fmt::format("grid-{}-{}", agent_kind_name(kind), seed)] = std::move(r);
    }
    ok = ok && hits >= 4;
    detail += fmt::format("{} [{}] {}/5 within 5%; ", agent_kind_name(kind), returns, hits);
  }
  ok = ok && slowest < 300.0;
  return {ok, fmt::format("{}slowest run {:.1f} s (limit 300 s)", detail, slowest)};
}

Verdict overestimation() {
  const auto t0 = Clock::now();
  Rng rng = make_rng(0, 0);
  int closer = 0;
  bool all_significant = true;
  double min_z = 1e300;
  for (int rep = 0; rep < 20; ++rep) {
    const auto b = bias_experiment(10'000, 1.0, 0.99, rng, 8);
    const double z = b.max_estimator_bias / b.max_estimator_stderr;
    min_z = std::min(min_z, z);
    all_significant = all_significant && z > 3.0;
    closer += std::abs(b.double_estimator_bias) < b.max_estimator_bias ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  const bool ok = all_significant && closer >= 18 && secs < 60.0;
  return {ok, fmt::format("max bias beyond 3 SE in every repetition (min z {:.1f}); |double| < max in {}/20 "
                          "(need 18); {:.2f} s",
                          min_z, closer, secs)};
}

Verdict recurrence_benefit() {
  const auto t0 = Clock::now();
  std::map<AgentKind, double> mean;
  std::string detail;
  for (auto kind : {AgentKind::dqn, AgentKind::drqn, AgentKind::drdqn}) {
    double total = 0.0;
    std::string returns;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Run r = desk_run("flickergrid", kind, seed);
      const double ret = eval_return(r, "flickergrid", 100);
      total += ret;
      returns += fmt::format("{}{:.2f}", seed ? " " : "", ret);
      finished_runs[fmt::format("flickergrid-{}-{}", agent_kind_name(kind), seed)] = std::move(r);
    }
    mean[kind] = total / 5.0;
    detail += fmt::format("{} {:.2f} [{}]; ", agent_kind_name(kind), mean[kind], returns);
  }
  const double secs = seconds_since(t0);
  const bool ok = mean[AgentKind::drdqn] > mean[AgentKind::dqn] && mean[AgentKind::drqn] > mean[AgentKind::dqn] &&
                  secs < 1800.0;
  return {ok, fmt::format("{}total {:.0f} s (limit 1800 s)", detail, secs)};
}

Verdict target_identity() {
  const auto t0 = Clock::now();
  Rng rng = make_rng(5, 0);
  std::uniform_real_distribution<double> val(-10.0, 10.0), unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> len(1, 10), small(0, 3);
  std::size_t equal_ok = 0, bound_ok = 0;
  for (int i = 0; i < 10'000; ++i) {
    const std::size_t n = len(rng);
    Tensor a({n}), b({n});
    const bool coarse = unit(rng) < 0.3;  // coarse values force argmax ties
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = coarse ? static_cast<double>(small(rng)) : val(rng);
      b[k] = coarse ? static_cast<double>(small(rng)) : val(rng);
    }
    const double r = val(rng), gamma = unit(rng);
    const bool terminal = unit(rng) < 0.1;
    equal_ok += ddqn_target(r, terminal, a, a, gamma) == dqn_target(r, terminal, a, gamma) ? 1 : 0;
    bound_ok += ddqn_target(r, false, a, b, gamma) <= r + gamma * max_value(b.data()) ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  return {equal_ok == 10'000 && bound_ok == 10'000 && secs < 1.0,
          fmt::format("identity {}/10000, bound {}/10000, {:.3f} s", equal_ok, bound_ok, secs)};
}

Verdict schedule_endpoints() {
  const AgentConfig full = AgentConfig::full_scale();
  const double e0 = epsilon_at(0, full), e1 = epsilon_at(850'000, full);
  return {e0 == 1.0 && e1 == 0.1, fmt::format("epsilon_at(0) = {}, epsilon_at(850000) = {}", e0, e1)};
}

Verdict determinism() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const auto& [env, kind] : {std::pair{"grid", AgentKind::ddqn}, std::pair{"flickergrid", AgentKind::drdqn}}) {
    const std::string key = fmt::format("{}-{}-0", env, agent_kind_name(kind));
    if (!finished_runs.contains(key)) finished_runs[key] = desk_run(env, kind, 0);
    const Run& first = finished_runs[key];
    const Run second = desk_run(env, kind, 0, "-again");
    const bool same_csv = slurp(first.dir / "metrics.csv") == slurp(second.dir / "metrics.csv");

    const std::string bytes = slurp(first.dir / "final.ckpt");
    const Checkpoint loaded = load_checkpoint(first.dir / "final.ckpt");
    const bool round_trip = loaded == first.result.checkpoint && encode_checkpoint(loaded) == bytes;

    const Agent in_memory = restore_agent(first.result.checkpoint);
    const auto env_ptr = make_environment(env);
    const auto a = evaluate_agent(in_memory, *env_ptr, 20, 99);
    const auto b = evaluate(first.dir / "final.ckpt", env, 20, 99, 2);
    const bool same_eval = a.returns == b.returns;

    ok = ok && same_csv && round_trip && same_eval;
    detail += fmt::format("{}/{}: metrics {}, checkpoint {}, eval {}; ", env, agent_kind_name(kind),
                          same_csv ? "identical" : "DIFFER", round_trip ? "bit-exact" : "MISMATCH",
                          same_eval ? "equal" : "DIFFER");
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 300.0, fmt::format("{}{:.0f} s", detail, secs)};
}

Verdict replay_contract() {
  const auto t0 = Clock::now();
  Rng gen = make_rng(8, 0);
  std::uniform_int_distribution<std::size_t> cap_dist(1, 64), push_dist(0, 300);
  int fifo_ok = 0;
  for (int c = 0; c < 500; ++c) {
    const std::size_t cap = cap_dist(gen), pushes = push_dist(gen);
    ReplayBuffer b(cap);
    for (std::size_t i = 0; i < pushes; ++i) b.push(Transition{Tensor({1}), 0, static_cast<double>(i), Tensor({1}), false});
    bool ok = b.size() == std::min(cap, pushes);
    const std::size_t first = pushes > cap ? pushes - cap : 0;
    for (std::size_t i = 0; ok && i < b.size(); ++i) ok = b.at(i).reward == static_cast<double>(first + i);
    fifo_ok += ok ? 1 : 0;
  }

  double worst = 0.0;
  for (std::size_t n : {2, 4}) {
    ReplayBuffer b(n);
    for (std::size_t i = 0; i < n; ++i) b.push(Transition{Tensor({1}), 0, static_cast<double>(i), Tensor({1}), false});
    Rng rng = make_rng(n, 3);
    std::vector<int> counts(n, 0);
    for (int i = 0; i < 10'000; ++i) ++counts[static_cast<std::size_t>(b.sample_batch(1, rng).front().reward)];
    const double expected = 1.0 / static_cast<double>(n);
    for (int k : counts) worst = std::max(worst, std::abs(k / 10'000.0 - expected) / expected);
  }
  const double secs = seconds_since(t0);
  return {fifo_ok == 500 && worst <= 0.05 && secs < 5.0,
          fmt::format("FIFO exact in {}/500 cases; worst relative frequency error {:.3f} (limit 0.05); {:.2f} s",
                      fifo_ok, worst, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"oracle convergence (grid, dqn/ddqn)", oracle_convergence},
      {"double-Q overestimation", overestimation},
      {"recurrence benefit (flickergrid)", recurrence_benefit},
      {"target-rule identity", target_identity},
      {"schedule endpoints", schedule_endpoints},
      {"determinism and persistence", determinism},
      {"replay contract", replay_contract},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::cout << fmt::format("criterion {} {}: {} ({})", id, criteria[i].first, v.pass ? "PASS" : "FAIL", v.detail)
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
