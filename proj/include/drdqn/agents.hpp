#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drdqn/envs.hpp"
#include "drdqn/network.hpp"
#include "drdqn/optim.hpp"
#include "drdqn/replay.hpp"

namespace drdqn {

enum class TargetRule { max_q, double_q };
enum class AgentKind { dqn, ddqn, drqn, drdqn };

std::string agent_kind_name(AgentKind kind);
AgentKind parse_agent_kind(std::string_view name);
std::string target_rule_name(TargetRule rule);
TargetRule parse_target_rule(std::string_view name);

/// Every training hyperparameter. Member defaults are the published
/// hyperparameter table; `desk()` scales the run down for a workstation.
struct AgentConfig {
  std::uint64_t iterations = 10'000'000;
  std::size_t minibatch_size = 32;
  std::size_t memory_capacity = 900'000;
  double learning_rate = 0.00025;
  std::size_t action_repeat = 4;
  std::uint64_t target_sync_period = 40'000;  // parameter updates between target syncs
  std::uint64_t sgd_period = 10'000;          // agent actions between gradient steps
  std::size_t replay_start_size = 50'000;
  double eps_max = 1.0;
  double eps_min = 0.1;
  std::uint64_t eps_steps = 850'000;
  double discount_factor = 0.99;
  bool recurrent = false;
  TargetRule target_rule = TargetRule::max_q;
  std::size_t seq_len = 8;
  LossKind loss = LossKind::huber;
  double huber_delta = 1.0;
  OptimizerKind optimizer = OptimizerKind::rmsprop;
  double rmsprop_decay = 0.95;
  double rmsprop_eps = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  static AgentConfig full_scale() { return {}; }
  static AgentConfig desk();

  /// Sets `recurrent` and `target_rule` for one of the four variants.
  void apply_kind(AgentKind kind);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  OptimizerOptions optimizer_options() const;
  LossSpec loss_spec() const { return {loss, huber_delta}; }

  bool operator==(const AgentConfig&) const = default;
};

/// Linear decay from eps_max at step 0 to eps_min at eps_steps, then flat.
double epsilon_at(std::uint64_t step, const AgentConfig& cfg);

/// Uniform random action with probability `epsilon`, else the lowest-index argmax.
std::size_t select_action(const Tensor& q, double epsilon, Rng& rng);

/// reward + gamma * max(next_q_target), or reward alone on terminal steps.
double dqn_target(double reward, bool terminal, const Tensor& next_q_target, double gamma);

/// reward + gamma * next_q_target[argmax(next_q_online)], or reward on terminal steps.
double ddqn_target(double reward, bool terminal, const Tensor& next_q_online, const Tensor& next_q_target,
                   double gamma);

/// Online network, frozen target copy and optimizer for one agent variant.
class Agent {
 public:
  Agent(NetworkSpec spec, AgentConfig config, std::uint64_t init_seed);
  Agent(NetworkSpec spec, AgentConfig config, ParamSet online, ParamSet target, Optimizer optimizer,
        std::uint64_t step);

  const NetworkSpec& spec() const { return spec_; }
  const AgentConfig& config() const { return config_; }
  ParamSet& online() { return online_; }
  const ParamSet& online() const { return online_; }
  const ParamSet& target() const { return target_; }
  const Optimizer& optimizer() const { return optimizer_; }

  /// Agent actions taken so far; drives the exploration schedule.
  std::uint64_t step() const { return step_; }
  void advance_step() { ++step_; }
  /// Parameter updates applied so far.
  std::uint64_t updates() const { return online_.step_count(); }

  std::optional<RecurrentState> initial_state() const;
  ForwardResult act_values(const Tensor& observation, const std::optional<RecurrentState>& state) const;

  void sync_target();

  /// One optimizer step on a feedforward minibatch; returns the mean loss.
  double train_step(std::span<const Transition> batch);

  /// One optimizer step on `seq_len`-long sequences, each unrolled from a zero
  /// recurrent state; returns the mean loss over all steps of all sequences.
  double train_step_recurrent(std::span<const std::vector<Transition>> sequences);

 private:
  double bootstrap(const Transition& t, const Tensor& next_online, const Tensor& next_target) const;

  NetworkSpec spec_;
  AgentConfig config_;
  ParamSet online_;
  ParamSet target_;
  Optimizer optimizer_;
  std::uint64_t step_ = 0;
};

/// What the acting loop carries between steps of one episode.
struct ActingState {
  Tensor observation;  // preprocessed
  std::optional<RecurrentState> memory;
  double last_max_q = 0.0;
};

/// Starts an episode: resets `env`, preprocesses the first frame and zeroes memory.
ActingState begin_episode(const Agent& agent, Environment& env, Rng& env_rng);

/// Epsilon-greedy action at the agent's current step, repeated
/// `action_repeat` times (stopping early on terminal) with rewards summed. The
/// resulting transition goes into `sink`, and the agent's step advances by one.
Transition act_and_record(Agent& agent, Environment& env, ActingState& acting, TransitionSink& sink, Rng& rng);

/// Same as act_and_record with a uniformly random action and without
/// advancing the agent's step. Used to fill replay before learning starts.
Transition explore_and_record(const Agent& agent, Environment& env, ActingState& acting, TransitionSink& sink,
                              Rng& rng);

}  // namespace drdqn
