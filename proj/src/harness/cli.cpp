#include "drdqn/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <ostream>

#include "drdqn/config_file.hpp"
#include "drdqn/gradcheck.hpp"
#include "drdqn/trainer.hpp"

namespace drdqn {

namespace {

constexpr double kGradTolerance = 1e-4;

struct TrainArgs {
  std::string config_path, env = "grid", agent = "dqn", out, network;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> iterations;
  bool full_scale = false, wall_clock = false;
};

struct EvalArgs {
  std::string checkpoint, env;
  std::size_t episodes = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct OracleArgs {
  std::string env = "grid";
  double gamma = 0.99, tol = 1e-10, noise_std = 1.0;
  std::size_t runs = 10'000, actions = 8, repetitions = 20;
  std::uint64_t seed = 0;
};

struct PlotArgs {
  std::string csv, column = "episode_return", out;
};

int do_train(const TrainArgs& a, std::ostream& out) {
  TrainOptions opt;
  const AgentConfig base = a.full_scale ? AgentConfig::full_scale() : AgentConfig::desk();
  opt.config = a.config_path.empty() ? base : load_config(a.config_path, base);
  if (a.iterations) opt.config.iterations = *a.iterations;
  opt.env_name = a.env;
  opt.kind = parse_agent_kind(a.agent);
  opt.seed = a.seed;
  opt.out_dir = a.out;
  opt.network = a.network;
  opt.wall_clock = a.wall_clock;
  (void)make_environment(opt.env_name);
  const auto result = train(opt);
  out << fmt::format("trained {} on {} for {} steps ({} episodes, {} updates)\n", a.agent, a.env,
                     result.checkpoint.step, result.episodes, result.checkpoint.online.step_count());
  out << fmt::format("wrote {} and {}\n", (opt.out_dir / "metrics.csv").string(), (opt.out_dir / "final.ckpt").string());
  return 0;
}

int do_eval(const EvalArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const std::string env_name = a.env.empty() ? ckpt.env_name : a.env;
  const Agent agent = restore_agent(ckpt);
  const auto env = make_environment(env_name);
  const auto stats = evaluate_agent(agent, *env, a.episodes, a.seed, a.threads);
  out << fmt::format("episodes {} mean {} min {} max {}\n", a.episodes, stats.mean, stats.min, stats.max);
  return 0;
}

int do_gradcheck(double eps, std::uint64_t seed, std::ostream& out) {
  bool ok = true;
  for (const auto& c : run_gradcheck_suite(eps, seed)) {
    const bool pass = c.report.max_rel_error < kGradTolerance;
    ok = ok && pass;
    out << fmt::format("{:<14} unroll {}  entries {:>5}  max_rel_error {:.3e}  {}\n", c.name, c.unroll,
                       c.report.entries_checked, c.report.max_rel_error, pass ? "ok" : "FAIL");
    for (const auto& [param, err] : c.report.per_parameter) {
      out << fmt::format("    {:<20} {:.3e}\n", param, err);
    }
  }
  out << (ok ? "gradcheck passed\n" : "gradcheck FAILED\n");
  return ok ? 0 : 1;
}

int do_value_iteration(const OracleArgs& a, std::ostream& out) {
  const auto env = make_environment(a.env);
  const auto mdp = enumerate_mdp(*env);
  const auto q = value_iteration(mdp, a.gamma, a.tol);
  const auto& grid = dynamic_cast<const GridWorld&>(*env);
  Rng rng = make_rng(a.seed, 0);
  out << fmt::format("states {} actions {} gamma {}\n", mdp.state_count(), mdp.action_count(), a.gamma);
  out << fmt::format("start value {}\n", q.state_value(mdp.start_state()));
  out << fmt::format("bellman residual {:.3e}\n", bellman_residual(mdp, q, a.gamma));
  out << fmt::format("greedy return {}\n", greedy_return(q, grid, 1, rng));
  return 0;
}

int do_bias(const OracleArgs& a, std::ostream& out) {
  Rng rng = make_rng(a.seed, 0);
  std::size_t wins = 0;
  for (std::size_t r = 0; r < a.repetitions; ++r) {
    const auto b = bias_experiment(a.runs, a.noise_std, a.gamma, rng, a.actions);
    const bool win = std::abs(b.double_estimator_bias) < b.max_estimator_bias;
    wins += win ? 1 : 0;
    out << fmt::format("rep {:>3}  max_bias {:+.5f} (se {:.5f})  double_bias {:+.5f} (se {:.5f})\n", r,
                       b.max_estimator_bias, b.max_estimator_stderr, b.double_estimator_bias,
                       b.double_estimator_stderr);
  }
  out << fmt::format("double estimator closer to truth in {}/{} repetitions\n", wins, a.repetitions);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep recurrent double Q-learning toolkit"};
  app.name("drdqn");
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train an agent and write metrics.csv and final.ckpt");
  train_cmd->add_option("--config", train_args.config_path, "key = value config file")->check(CLI::ExistingFile);
  train_cmd->add_option("--env", train_args.env, "grid, flickergrid or catch");
  train_cmd->add_option("--agent", train_args.agent, "dqn, ddqn, drqn or drdqn");
  train_cmd->add_option("--seed", train_args.seed, "Seed for init, environment, exploration and sampling");
  train_cmd->add_option("--out", train_args.out, "Output directory")->required();
  train_cmd->add_option("--network", train_args.network, "Network preset (mlp, compact-conv, small-atari)");
  train_cmd->add_option("--iterations", train_args.iterations, "Override the number of agent steps");
  train_cmd->add_flag("--paper", train_args.full_scale, "Start from the full-scale hyperparameters instead of the desk profile");
  train_cmd->add_flag("--wall-clock", train_args.wall_clock, "Record elapsed seconds in metrics.csv");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  eval_cmd->add_option("--checkpoint,checkpoint", eval_args.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--env", eval_args.env, "Environment (defaults to the one trained on)");
  eval_cmd->add_option("--episodes", eval_args.episodes, "Episodes to average")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval_args.seed, "Evaluation seed");
  eval_cmd->add_option("--threads", eval_args.threads, "Worker threads")->check(CLI::PositiveNumber);

  double grad_eps = 1e-5;
  std::uint64_t grad_seed = 17;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare backprop against central differences");
  grad_cmd->add_option("--eps", grad_eps, "Finite-difference step");
  grad_cmd->add_option("--seed", grad_seed, "Parameter seed");

  OracleArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle", "Ground-truth computations");
  oracle_cmd->require_subcommand(1);
  auto* vi_cmd = oracle_cmd->add_subcommand("value_iteration", "Exact Q* for an enumerable environment");
  vi_cmd->add_option("--env", oracle_args.env, "Environment (grid)");
  vi_cmd->add_option("--gamma", oracle_args.gamma, "Discount factor")->check(CLI::Range(0.0, 1.0));
  vi_cmd->add_option("--tol", oracle_args.tol, "Sup-norm stopping tolerance");
  auto* bias_cmd = oracle_cmd->add_subcommand("bias_experiment", "Single vs double estimator bias");
  bias_cmd->add_option("--runs", oracle_args.runs, "Runs per repetition")->check(CLI::PositiveNumber);
  bias_cmd->add_option("--noise-std", oracle_args.noise_std, "Reward noise standard deviation");
  bias_cmd->add_option("--gamma", oracle_args.gamma, "Discount factor")->check(CLI::Range(0.0, 1.0));
  bias_cmd->add_option("--actions", oracle_args.actions, "Noisy actions in the second stage")
      ->check(CLI::PositiveNumber);
  bias_cmd->add_option("--repetitions", oracle_args.repetitions, "Batched repetitions")->check(CLI::PositiveNumber);
  bias_cmd->add_option("--seed", oracle_args.seed, "Seed");

  PlotArgs plot_args;
  auto* plot_cmd = app.add_subcommand("plot", "Render one metrics column as an SVG line chart");
  plot_cmd->add_option("--csv,csv", plot_args.csv, "metrics.csv path")->required();
  plot_cmd->add_option("--column", plot_args.column, "Column to plot against step");
  plot_cmd->add_option("--out", plot_args.out, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*train_cmd) return do_train(train_args, out);
    if (*eval_cmd) return do_eval(eval_args, out);
    if (*grad_cmd) return do_gradcheck(grad_eps, grad_seed, out);
    if (*vi_cmd) return do_value_iteration(oracle_args, out);
    if (*bias_cmd) return do_bias(oracle_args, out);
    if (*plot_cmd) {
      emit_plot(plot_args.csv, plot_args.column, plot_args.out);
      out << "wrote " << plot_args.out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace drdqn
