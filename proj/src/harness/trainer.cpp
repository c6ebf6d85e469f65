#include "drdqn/trainer.hpp"

#include <chrono>
#include <numeric>
#include <thread>
#include <variant>

#include "drdqn/presets.hpp"

namespace drdqn {

namespace {

enum Stream : std::uint64_t { kEnvStream = 1, kExploreStream = 2, kSampleStream = 3, kEvalStream = 1000 };

}  // namespace

std::string default_network(std::string_view env_name) {
  if (env_name == "catch") return "compact-conv";
  return "mlp";
}

Agent make_agent(const AgentConfig& config, const Environment& env, AgentKind kind, std::uint64_t seed,
                 std::string_view network) {
  AgentConfig cfg = config;
  cfg.apply_kind(kind);
  const std::string preset = network.empty() ? default_network(env.name()) : std::string(network);
  NetworkSpec spec = make_preset(preset, env.observation_shape(), env.action_count(), cfg.recurrent);
  return Agent(std::move(spec), cfg, seed);
}

TrainResult train(const TrainOptions& options) {
  auto env = make_environment(options.env_name);
  Agent agent = make_agent(options.config, *env, options.kind, options.seed, options.network);
  const AgentConfig& cfg = agent.config();

  std::optional<MetricsWriter> metrics;
  if (!options.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + options.out_dir.string() + "': " + ec.message());
    metrics.emplace(options.out_dir / "metrics.csv");
  }

  Rng env_rng = make_rng(options.seed, kEnvStream);
  Rng explore_rng = make_rng(options.seed, kExploreStream);
  Rng sample_rng = make_rng(options.seed, kSampleStream);

  std::variant<ReplayBuffer, EpisodeStore> memory =
      cfg.recurrent ? std::variant<ReplayBuffer, EpisodeStore>(std::in_place_type<EpisodeStore>, cfg.memory_capacity)
                    : std::variant<ReplayBuffer, EpisodeStore>(std::in_place_type<ReplayBuffer>, cfg.memory_capacity);
  TransitionSink& sink = std::visit([](auto& m) -> TransitionSink& { return m; }, memory);

  ActingState acting = begin_episode(agent, *env, env_rng);
  for (std::size_t i = 0; i < cfg.replay_start_size; ++i) {
    if (env->terminal()) acting = begin_episode(agent, *env, env_rng);
    explore_and_record(agent, *env, acting, sink, explore_rng);
  }
  if (auto* store = std::get_if<EpisodeStore>(&memory)) store->discard_open();
  acting = begin_episode(agent, *env, env_rng);

  const auto started = std::chrono::steady_clock::now();
  const std::size_t sequences_per_update = std::max<std::size_t>(1, cfg.minibatch_size / cfg.seq_len);

  TrainResult result;
  double episode_return = 0.0, q_sum = 0.0, loss_sum = 0.0;
  std::size_t q_count = 0, loss_count = 0;

  for (std::uint64_t it = 0; it < cfg.iterations; ++it) {
    const Transition t = act_and_record(agent, *env, acting, sink, explore_rng);
    episode_return += t.reward;
    q_sum += acting.last_max_q;
    ++q_count;

    if (agent.step() % cfg.sgd_period == 0) {
      std::optional<double> loss;
      if (auto* buffer = std::get_if<ReplayBuffer>(&memory)) {
        if (buffer->size() >= cfg.minibatch_size) {
          const auto batch = buffer->sample_batch(cfg.minibatch_size, sample_rng);
          loss = agent.train_step(batch);
        }
      } else {
        auto& store = std::get<EpisodeStore>(memory);
        if (store.eligible_count(cfg.seq_len) > 0) {
          auto samples = store.sample_sequences(sequences_per_update, cfg.seq_len, sample_rng);
          std::vector<std::vector<Transition>> sequences;
          sequences.reserve(samples.size());
          for (auto& s : samples) sequences.push_back(std::move(s.steps));
          loss = agent.train_step_recurrent(sequences);
        }
      }
      if (loss) {
        loss_sum += *loss;
        ++loss_count;
        if (agent.updates() % cfg.target_sync_period == 0) agent.sync_target();
      }
    }

    if (t.terminal) {
      MetricsRow row;
      row.step = agent.step();
      row.episode = result.episodes;
      row.episode_return = episode_return;
      row.loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
      row.epsilon = epsilon_at(agent.step(), cfg);
      row.mean_q = q_sum / static_cast<double>(q_count);
      if (options.wall_clock) {
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      }
      if (metrics) metrics->write(row);
      ++result.episodes;
      episode_return = q_sum = loss_sum = 0.0;
      q_count = loss_count = 0;
      acting = begin_episode(agent, *env, env_rng);
    }
  }

  result.checkpoint = make_checkpoint(agent, options.kind, options.env_name);
  if (!options.out_dir.empty()) save_checkpoint(options.out_dir / "final.ckpt", result.checkpoint);
  return result;
}

ReturnStats evaluate_agent(const Agent& agent, const Environment& env, std::size_t episodes, std::uint64_t seed,
                           unsigned threads) {
  if (episodes == 0) throw std::invalid_argument("evaluate: episodes must be at least 1");
  if (env.observation_shape() != agent.spec().input_shape || env.action_count() != agent.spec().output_size()) {
    throw DimensionError("evaluate: network expects observations " + shape_string(agent.spec().input_shape) + " and " +
                         std::to_string(agent.spec().output_size()) + " actions, environment '" + env.name() +
                         "' provides " + shape_string(env.observation_shape()) + " and " +
                         std::to_string(env.action_count()));
  }
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(episodes)));
  std::vector<double> returns(episodes);
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t e = first; e < episodes; e += stride) {
      Rng rng = make_rng(seed, kEvalStream + e);
      returns[e] = greedy_returns(agent, env, 1, rng).mean;
    }
  };
  if (threads == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) workers.emplace_back(run, w, threads);
  }
  ReturnStats st;
  st.mean = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(episodes);
  st.min = *std::min_element(returns.begin(), returns.end());
  st.max = *std::max_element(returns.begin(), returns.end());
  st.returns = std::move(returns);
  return st;
}

ReturnStats evaluate(const std::filesystem::path& checkpoint_path, std::string_view env_name, std::size_t episodes,
                     std::uint64_t seed, unsigned threads) {
  const Agent agent = restore_agent(load_checkpoint(checkpoint_path));
  const auto env = make_environment(env_name);
  return evaluate_agent(agent, *env, episodes, seed, threads);
}

}  // namespace drdqn
