#include "drdqn/agents.hpp"

#include <cmath>

namespace drdqn {

std::string agent_kind_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::dqn:
      return "dqn";
    case AgentKind::ddqn:
      return "ddqn";
    case AgentKind::drqn:
      return "drqn";
    case AgentKind::drdqn:
      return "drdqn";
  }
  return "dqn";
}

AgentKind parse_agent_kind(std::string_view name) {
  if (name == "dqn") return AgentKind::dqn;
  if (name == "ddqn") return AgentKind::ddqn;
  if (name == "drqn") return AgentKind::drqn;
  if (name == "drdqn") return AgentKind::drdqn;
  throw std::invalid_argument("unknown agent '" + std::string(name) + "' (expected dqn, ddqn, drqn or drdqn)");
}

std::string target_rule_name(TargetRule rule) { return rule == TargetRule::double_q ? "double_q" : "max_q"; }

TargetRule parse_target_rule(std::string_view name) {
  if (name == "max_q") return TargetRule::max_q;
  if (name == "double_q") return TargetRule::double_q;
  throw std::invalid_argument("unknown target rule '" + std::string(name) + "' (expected max_q or double_q)");
}

AgentConfig AgentConfig::desk() {
  AgentConfig c;
  c.iterations = 50'000;
  c.memory_capacity = 10'000;
  c.replay_start_size = 500;
  c.eps_steps = 10'000;
  c.target_sync_period = 500;
  c.sgd_period = 4;
  c.action_repeat = 1;
  c.optimizer = OptimizerKind::adam;
  c.learning_rate = 0.001;
  return c;
}

void AgentConfig::apply_kind(AgentKind kind) {
  recurrent = kind == AgentKind::drqn || kind == AgentKind::drdqn;
  target_rule = (kind == AgentKind::ddqn || kind == AgentKind::drdqn) ? TargetRule::double_q : TargetRule::max_q;
}

void AgentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (minibatch_size == 0) fail("minibatch_size", "must be positive");
  if (memory_capacity == 0) fail("memory_capacity", "must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate", "must be positive");
  if (action_repeat == 0) fail("action_repeat", "must be positive");
  if (target_sync_period == 0) fail("target_sync_period", "must be positive");
  if (sgd_period == 0) fail("sgd_period", "must be positive");
  if (!(eps_max >= 0.0 && eps_max <= 1.0)) fail("eps_max", "must lie in [0, 1]");
  if (!(eps_min >= 0.0 && eps_min <= eps_max)) fail("eps_min", "must lie in [0, eps_max]");
  if (eps_steps == 0) fail("eps_steps", "must be positive");
  if (!(discount_factor >= 0.0 && discount_factor <= 1.0)) fail("discount_factor", "must lie in [0, 1]");
  if (seq_len == 0) fail("seq_len", "must be positive");
  if (!(huber_delta > 0.0)) fail("huber_delta", "must be positive");
  if (!(rmsprop_decay >= 0.0 && rmsprop_decay < 1.0)) fail("rmsprop_decay", "must lie in [0, 1)");
  if (!(rmsprop_eps > 0.0)) fail("rmsprop_eps", "must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) fail("adam_beta1", "must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) fail("adam_beta2", "must lie in [0, 1)");
  if (!(adam_eps > 0.0)) fail("adam_eps", "must be positive");
}

OptimizerOptions AgentConfig::optimizer_options() const {
  OptimizerOptions o;
  o.kind = optimizer;
  o.learning_rate = learning_rate;
  o.rmsprop_decay = rmsprop_decay;
  o.rmsprop_eps = rmsprop_eps;
  o.adam_beta1 = adam_beta1;
  o.adam_beta2 = adam_beta2;
  o.adam_eps = adam_eps;
  return o;
}

double epsilon_at(std::uint64_t step, const AgentConfig& cfg) {
  if (step >= cfg.eps_steps) return cfg.eps_min;
  const double frac = static_cast<double>(step) / static_cast<double>(cfg.eps_steps);
  return cfg.eps_max - (cfg.eps_max - cfg.eps_min) * frac;
}

std::size_t select_action(const Tensor& q, double epsilon, Rng& rng) {
  if (q.empty()) throw ContractViolation("select_action: empty action-value vector");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("select_action: epsilon must lie in [0, 1]");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
    return pick(rng);
  }
  return argmax(q.data());
}

double dqn_target(double reward, bool terminal, const Tensor& next_q_target, double gamma) {
  if (terminal) return reward;
  if (next_q_target.empty()) throw ContractViolation("dqn_target: empty action-value vector");
  return reward + gamma * max_value(next_q_target.data());
}

double ddqn_target(double reward, bool terminal, const Tensor& next_q_online, const Tensor& next_q_target,
                   double gamma) {
  if (next_q_online.size() != next_q_target.size()) {
    throw DimensionError("ddqn_target: online and target vectors differ in length (" +
                         std::to_string(next_q_online.size()) + " vs " + std::to_string(next_q_target.size()) + ")");
  }
  if (terminal) return reward;
  if (next_q_online.empty()) throw ContractViolation("ddqn_target: empty action-value vector");
  return reward + gamma * next_q_target[argmax(next_q_online.data())];
}

Agent::Agent(NetworkSpec spec, AgentConfig config, std::uint64_t init_seed)
    : spec_(std::move(spec)), config_(config) {
  config_.validate();
  if (config_.recurrent != spec_.recurrent()) {
    throw std::invalid_argument(config_.recurrent ? "recurrent agent needs a network with an lstm layer"
                                                  : "feedforward agent cannot use a network with an lstm layer");
  }
  online_ = init_params(spec_, init_seed);
  target_ = online_;
  optimizer_ = Optimizer(config_.optimizer_options(), online_);
}

Agent::Agent(NetworkSpec spec, AgentConfig config, ParamSet online, ParamSet target, Optimizer optimizer,
             std::uint64_t step)
    : spec_(std::move(spec)),
      config_(config),
      online_(std::move(online)),
      target_(std::move(target)),
      optimizer_(std::move(optimizer)),
      step_(step) {
  config_.validate();
  const ParamSet layout = zero_params(spec_);
  layout.require_same_layout(online_, "online parameters");
  layout.require_same_layout(target_, "target parameters");
}

std::optional<RecurrentState> Agent::initial_state() const {
  if (!spec_.recurrent()) return std::nullopt;
  return RecurrentState::zeros(spec_.lstm_hidden());
}

ForwardResult Agent::act_values(const Tensor& observation, const std::optional<RecurrentState>& state) const {
  return forward(spec_, online_, observation, state);
}

void Agent::sync_target() {
  const auto t = target_.step_count();
  target_ = online_;
  target_.set_step_count(t);
}

double Agent::bootstrap(const Transition& t, const Tensor& next_online, const Tensor& next_target) const {
  if (config_.target_rule == TargetRule::double_q) {
    return ddqn_target(t.reward, t.terminal, next_online, next_target, config_.discount_factor);
  }
  return dqn_target(t.reward, t.terminal, next_target, config_.discount_factor);
}

double Agent::train_step(std::span<const Transition> batch) {
  if (spec_.recurrent()) throw ContractViolation("train_step: recurrent agents train on sequences");
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  const bool want_online_next = config_.target_rule == TargetRule::double_q;
  ParamSet grads = online_.zeros_like();
  double total = 0.0;
  for (const auto& t : batch) {
    if (t.action >= spec_.output_size()) throw std::out_of_range("train_step: transition action out of range");
    double y = t.reward;
    if (!t.terminal) {
      const Tensor next_target = forward(spec_, target_, t.next_state).q;
      const Tensor next_online = want_online_next ? forward(spec_, online_, t.next_state).q : Tensor();
      y = bootstrap(t, next_online, next_target);
    }
    const auto trace = forward_sequence(spec_, online_, std::span<const Tensor>(&t.state, 1));
    auto loss = td_loss(trace.outputs[0], t.action, y, config_.loss_spec());
    total += loss.loss;
    for (auto& v : loss.dq.data()) v *= scale;
    accumulate_backward(spec_, online_, trace, std::span<const Tensor>(&loss.dq, 1), grads);
  }
  optimizer_.step(online_, grads);
  return total * scale;
}

double Agent::train_step_recurrent(std::span<const std::vector<Transition>> sequences) {
  if (!spec_.recurrent()) throw ContractViolation("train_step_recurrent: agent has no lstm layer");
  if (sequences.empty()) throw std::invalid_argument("train_step_recurrent: no sequences");
  std::size_t steps = 0;
  for (const auto& s : sequences) {
    if (s.empty()) throw std::invalid_argument("train_step_recurrent: empty sequence");
    steps += s.size();
  }
  const double scale = 1.0 / static_cast<double>(steps);
  const bool want_online_next = config_.target_rule == TargetRule::double_q;
  const auto zero = initial_state();
  ParamSet grads = online_.zeros_like();
  double total = 0.0;
  std::vector<Tensor> states, next_states, dqs;
  for (const auto& seq : sequences) {
    states.clear();
    next_states.clear();
    for (const auto& t : seq) {
      states.push_back(t.state);
      next_states.push_back(t.next_state);
    }
    const auto next_target = forward_sequence(spec_, target_, next_states, zero);
    std::optional<SequenceTrace> next_online;
    if (want_online_next) next_online = forward_sequence(spec_, online_, next_states, zero);
    const auto trace = forward_sequence(spec_, online_, states, zero);
    dqs.clear();
    for (std::size_t k = 0; k < seq.size(); ++k) {
      const auto& t = seq[k];
      if (t.action >= spec_.output_size()) {
        throw std::out_of_range("train_step_recurrent: transition action out of range");
      }
      const Tensor& online_next = want_online_next ? next_online->outputs[k] : next_target.outputs[k];
      const double y = bootstrap(t, online_next, next_target.outputs[k]);
      auto loss = td_loss(trace.outputs[k], t.action, y, config_.loss_spec());
      total += loss.loss;
      for (auto& v : loss.dq.data()) v *= scale;
      dqs.push_back(std::move(loss.dq));
    }
    accumulate_backward(spec_, online_, trace, dqs, grads);
  }
  optimizer_.step(online_, grads);
  return total * scale;
}

ActingState begin_episode(const Agent& agent, Environment& env, Rng& env_rng) {
  ActingState acting;
  acting.observation = preprocess(env.reset(env_rng));
  acting.memory = agent.initial_state();
  return acting;
}

namespace {

Transition apply_action(const Agent& agent, Environment& env, ActingState& acting, TransitionSink& sink,
                        std::size_t action) {
  if (action >= env.action_count()) throw ContractViolation("action out of range for environment");
  double reward = 0.0;
  bool terminal = false;
  Tensor last;
  for (std::size_t r = 0; r < agent.config().action_repeat && !terminal; ++r) {
    EnvStep s = env.step(action);
    reward += s.reward;
    terminal = s.terminal;
    last = std::move(s.observation);
  }
  Transition t{acting.observation, action, reward, preprocess(last), terminal};
  acting.observation = t.next_state;
  sink.push(t);
  return t;
}

}  // namespace

Transition act_and_record(Agent& agent, Environment& env, ActingState& acting, TransitionSink& sink, Rng& rng) {
  if (env.terminal()) throw ContractViolation("act_and_record: environment episode already finished");
  auto out = agent.act_values(acting.observation, acting.memory);
  acting.memory = std::move(out.state);
  acting.last_max_q = max_value(out.q.data());
  const std::size_t action = select_action(out.q, epsilon_at(agent.step(), agent.config()), rng);
  Transition t = apply_action(agent, env, acting, sink, action);
  agent.advance_step();
  return t;
}

Transition explore_and_record(const Agent& agent, Environment& env, ActingState& acting, TransitionSink& sink,
                              Rng& rng) {
  if (env.terminal()) throw ContractViolation("explore_and_record: environment episode already finished");
  std::uniform_int_distribution<std::size_t> pick(0, env.action_count() - 1);
  return apply_action(agent, env, acting, sink, pick(rng));
}

}  // namespace drdqn
