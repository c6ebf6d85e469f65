#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "drdqn/agents.hpp"
#include "drdqn/presets.hpp"
#include "drdqn/replay.hpp"
#include "support.hpp"

using namespace drdqn;
using drdqn::testing::Gen;

namespace {

// One observation, reward per step, never terminates on its own.
class ConstantEnv : public Environment {
 public:
  explicit ConstantEnv(double reward, std::size_t end_after = 0) : reward_(reward), end_after_(end_after) {}
  Tensor reset(Rng&) override {
    steps_ = 0;
    done_ = false;
    return Tensor({2}, 255.0);
  }
  EnvStep step(std::size_t action) override {
    if (done_ || action >= 2) throw ContractViolation("constant env");
    ++steps_;
    done_ = end_after_ != 0 && steps_ >= end_after_;
    return {Tensor({2}, 255.0), reward_, done_};
  }
  bool terminal() const override { return done_; }
  std::size_t action_count() const override { return 2; }
  Shape observation_shape() const override { return {2}; }
  std::string name() const override { return "constant"; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<ConstantEnv>(*this); }
  std::size_t steps() const { return steps_; }

 private:
  double reward_;
  std::size_t end_after_;
  std::size_t steps_ = 0;
  bool done_ = true;
};

class Recorder : public TransitionSink {
 public:
  void push(Transition t) override { items.push_back(std::move(t)); }
  std::vector<Transition> items;
};

AgentConfig small_config(AgentKind kind) {
  AgentConfig c = AgentConfig::desk();
  c.apply_kind(kind);
  c.minibatch_size = 4;
  c.seq_len = 3;
  return c;
}

Agent grid_agent(AgentKind kind, std::uint64_t seed = 1) {
  const auto cfg = small_config(kind);
  return Agent(mlp_preset({3, 3}, 4, cfg.recurrent), cfg, seed);
}

Transition random_transition(Gen& gen, const Shape& shape, std::size_t actions) {
  return Transition{gen.tensor(shape, 0, 1), gen.index(0, actions - 1), gen.real(-1, 1), gen.tensor(shape, 0, 1),
                    gen.coin(0.2)};
}

}  // namespace

TEST(Epsilon, TableOneEndpoints) {
  const auto cfg = AgentConfig::full_scale();
  EXPECT_EQ(epsilon_at(0, cfg), 1.0);
  EXPECT_EQ(epsilon_at(850'000, cfg), 0.1);
  EXPECT_EQ(epsilon_at(5'000'000, cfg), 0.1);
  EXPECT_NEAR(epsilon_at(425'000, cfg), 0.55, 1e-12);
}

TEST(Epsilon, NonIncreasingAndBoundedProperty) {
  Gen gen(41);
  for (int c = 0; c < 100; ++c) {
    AgentConfig cfg;
    cfg.eps_max = gen.real(0, 1);
    cfg.eps_min = gen.real(0, cfg.eps_max);
    cfg.eps_steps = gen.index(1, 5000);
    double prev = 2.0;
    for (std::uint64_t s = 0; s < 6000; s += gen.index(1, 97)) {
      const double e = epsilon_at(s, cfg);
      EXPECT_LE(e, prev);
      EXPECT_GE(e, cfg.eps_min);
      EXPECT_LE(e, cfg.eps_max);
      prev = e;
    }
  }
}

TEST(SelectAction, GreedyAndTies) {
  Rng rng = make_rng(1, 2);
  EXPECT_EQ(select_action(Tensor::vector({0.1, 0.9, 0.3}), 0.0, rng), 1u);
  EXPECT_EQ(select_action(Tensor::vector({0.5, 0.5}), 0.0, rng), 0u);
  EXPECT_THROW(select_action(Tensor{}, 0.0, rng), ContractViolation);
  EXPECT_THROW(select_action(Tensor::vector({1}), 1.5, rng), std::invalid_argument);
}

TEST(SelectAction, UniformWhenFullyRandom) {
  Rng rng = make_rng(2, 2);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 10'000; ++i) ++counts[select_action(Tensor::vector({9, 0, 0, 0}), 1.0, rng)];
  for (int n : counts) EXPECT_NEAR(n / 10'000.0, 0.25, 0.05 * 0.25);
}

TEST(Targets, DqnHandValues) {
  EXPECT_EQ(dqn_target(5.0, true, Tensor::vector({100}), 0.99), 5.0);
  EXPECT_EQ(dqn_target(-2.0, false, Tensor::vector({3, 4}), 0.0), -2.0);
  EXPECT_NEAR(dqn_target(1.0, false, Tensor::vector({1, 2}), 0.99), 2.98, 1e-12);
}

TEST(Targets, DdqnHandValues) {
  EXPECT_EQ(ddqn_target(0.0, false, Tensor::vector({1, 2}), Tensor::vector({5, 0}), 0.99), 0.0);
  EXPECT_EQ(ddqn_target(3.0, true, Tensor::vector({1, 2}), Tensor::vector({5, 0}), 0.99), 3.0);
  EXPECT_THROW(ddqn_target(0.0, false, Tensor::vector({1, 2}), Tensor::vector({5}), 0.99), DimensionError);
}

TEST(Targets, DecompositionIdentityProperty) {
  Gen gen(42);
  for (int c = 0; c < 2000; ++c) {
    const std::size_t n = gen.index(1, 8);
    const Tensor q = gen.coin() ? gen.tied_tensor(n) : gen.tensor({n}, -10, 10);
    const double r = gen.real(-5, 5), gamma = gen.real(0, 1);
    const bool term = gen.coin(0.1);
    EXPECT_EQ(ddqn_target(r, term, q, q, gamma), dqn_target(r, term, q, gamma));
  }
}

TEST(Targets, DoubleNeverExceedsMaxProperty) {
  Gen gen(43);
  for (int c = 0; c < 2000; ++c) {
    const std::size_t n = gen.index(1, 8);
    const Tensor on = gen.tensor({n}, -10, 10), tg = gen.tensor({n}, -10, 10);
    const double r = gen.real(-5, 5), gamma = gen.real(0, 1);
    EXPECT_LE(ddqn_target(r, false, on, tg, gamma), r + gamma * max_value(tg.data()));
  }
}

TEST(Targets, JointPermutationInvarianceProperty) {
  Gen gen(44);
  for (int c = 0; c < 500; ++c) {
    const std::size_t n = gen.index(1, 6);
    // Distinct online values so the argmax is unique under any permutation.
    Tensor on = gen.tensor({n}, -10, 10);
    const Tensor tg = gen.tensor({n}, -10, 10);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen.rng());
    Tensor pon({n}), ptg({n});
    for (std::size_t k = 0; k < n; ++k) {
      pon[k] = on[perm[k]];
      ptg[k] = tg[perm[k]];
    }
    const double r = gen.real(-1, 1), gamma = gen.real(0, 1);
    EXPECT_EQ(ddqn_target(r, false, on, tg, gamma), ddqn_target(r, false, pon, ptg, gamma));
    EXPECT_EQ(dqn_target(r, false, tg, gamma), dqn_target(r, false, ptg, gamma));
  }
}

TEST(AgentConfig, ValidationNamesField) {
  AgentConfig c;
  c.discount_factor = 1.5;
  try {
    c.validate();
    FAIL() << "expected a throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("discount_factor"), std::string::npos);
  }
  c = AgentConfig{};
  c.eps_min = 0.5;
  c.eps_max = 0.2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = AgentConfig{};
  c.sgd_period = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(AgentConfig, KindsSetRuleAndRecurrence) {
  AgentConfig c;
  c.apply_kind(AgentKind::drdqn);
  EXPECT_TRUE(c.recurrent);
  EXPECT_EQ(c.target_rule, TargetRule::double_q);
  c.apply_kind(AgentKind::dqn);
  EXPECT_FALSE(c.recurrent);
  EXPECT_EQ(c.target_rule, TargetRule::max_q);
  for (const char* n : {"dqn", "ddqn", "drqn", "drdqn"}) EXPECT_EQ(agent_kind_name(parse_agent_kind(n)), n);
  EXPECT_THROW(parse_agent_kind("a3c"), std::invalid_argument);
}

TEST(Agent, SyncCopiesAndIsolates) {
  Agent a = grid_agent(AgentKind::dqn);
  EXPECT_TRUE(a.online().same_layout(a.target()));
  Gen gen(45);
  for (auto& e : a.online())
    for (auto& v : e.value.data()) v += gen.real(-0.1, 0.1);
  a.sync_target();
  EXPECT_EQ(a.online(), a.target());
  const Tensor x = gen.tensor({3, 3}, 0, 1);
  EXPECT_EQ(forward(a.spec(), a.online(), x).q, forward(a.spec(), a.target(), x).q);
  const ParamSet frozen = a.target();
  a.online().fill(0.3);
  EXPECT_EQ(a.target(), frozen);
  a.sync_target();
  const ParamSet once = a.target();
  a.sync_target();
  EXPECT_EQ(a.target(), once);
}

TEST(Agent, TrainStepLeavesTargetUntouched) {
  Gen gen(46);
  for (auto kind : {AgentKind::dqn, AgentKind::ddqn}) {
    Agent a = grid_agent(kind);
    const ParamSet before = a.target();
    for (int u = 0; u < 5; ++u) {
      std::vector<Transition> batch;
      for (int i = 0; i < 4; ++i) batch.push_back(random_transition(gen, {3, 3}, 4));
      EXPECT_GE(a.train_step(batch), 0.0);
    }
    EXPECT_EQ(a.target(), before);
    EXPECT_EQ(a.updates(), 5u);
  }
}

TEST(Agent, FixedPointBatchDoesNotMove) {
  // Zero parameters, zero rewards, terminal transitions: every q equals its target.
  auto cfg = small_config(AgentKind::dqn);
  const auto spec = mlp_preset({3, 3}, 4, false);
  Agent a(spec, cfg, zero_params(spec), zero_params(spec), Optimizer(cfg.optimizer_options(), zero_params(spec)), 0);
  Gen gen(47);
  std::vector<Transition> batch;
  for (int i = 0; i < 4; ++i) {
    auto t = random_transition(gen, {3, 3}, 4);
    t.reward = 0.0;
    batch.push_back(t);
  }
  const ParamSet before = a.online();
  EXPECT_EQ(a.train_step(batch), 0.0);
  EXPECT_EQ(a.online(), before);
}

TEST(Agent, OneParameterHandGradientStep) {
  // q = w * x with a single linear weight; mse loss, RMSProp with a fresh cache.
  AgentConfig cfg = AgentConfig::full_scale();
  cfg.loss = LossKind::mse;
  cfg.learning_rate = 0.1;
  cfg.rmsprop_decay = 0.9;
  cfg.rmsprop_eps = 1e-8;
  cfg.minibatch_size = 1;
  const NetworkSpec spec{{1}, {DenseLayer{1, 1, Activation::linear}}};
  ParamSet p = zero_params(spec);
  p.at("layer0.weight")[0] = 0.5;
  Agent a(spec, cfg, p, p, Optimizer(cfg.optimizer_options(), p), 0);
  const Transition t{Tensor::vector({2.0}), 0, 3.0, Tensor::vector({0.0}), true};
  const double loss = a.train_step(std::span<const Transition>(&t, 1));
  // q = 1, target 3: loss 2, dL/dw = (q - y) * x = -4, dL/db = -2.
  EXPECT_DOUBLE_EQ(loss, 2.0);
  // Fresh cache: c = (1 - decay) * g^2, step = lr * |g| / sqrt(c + eps).
  EXPECT_NEAR(a.online().at("layer0.weight")[0], 0.5 + 0.1 * 4.0 / std::sqrt(1.6 + 1e-8), 1e-12);
  EXPECT_NEAR(a.online().at("layer0.bias")[0], 0.1 * 2.0 / std::sqrt(0.4 + 1e-8), 1e-12);
}

TEST(Agent, RecurrentAndFeedforwardEntryPointsAreExclusive) {
  Agent ff = grid_agent(AgentKind::dqn);
  Agent rec = grid_agent(AgentKind::drdqn);
  Gen gen(48);
  std::vector<Transition> batch{random_transition(gen, {3, 3}, 4)};
  std::vector<std::vector<Transition>> seqs{batch};
  EXPECT_THROW(rec.train_step(batch), ContractViolation);
  EXPECT_THROW(ff.train_step_recurrent(seqs), ContractViolation);
}

TEST(Agent, UnitSequencesMatchFeedforwardUpdate) {
  // With seq_len 1 and a zero start state, a recurrent update on a list of
  // single transitions equals a feedforward update of the same network on the batch.
  Gen gen(49);
  auto cfg = small_config(AgentKind::drdqn);
  cfg.seq_len = 1;
  const auto spec = mlp_preset({3, 3}, 4, true);
  const ParamSet init = init_params(spec, 5);
  Agent a(spec, cfg, init, init, Optimizer(cfg.optimizer_options(), init), 0);
  std::vector<Transition> batch;
  std::vector<std::vector<Transition>> seqs;
  for (int i = 0; i < 4; ++i) {
    batch.push_back(random_transition(gen, {3, 3}, 4));
    seqs.push_back({batch.back()});
  }
  a.train_step_recurrent(seqs);

  // Reference: the same loss evaluated per transition through forward/backward.
  ParamSet grads = init.zeros_like();
  for (const auto& t : batch) {
    const auto zero = RecurrentState::zeros(spec.lstm_hidden());
    const auto q = forward(spec, init, t.state, zero).q;
    const auto next_online = forward(spec, init, t.next_state, zero).q;
    const auto next_target = forward(spec, init, t.next_state, zero).q;
    const double y = ddqn_target(t.reward, t.terminal, next_online, next_target, cfg.discount_factor);
    auto l = td_loss(q, t.action, y, cfg.loss_spec());
    for (auto& v : l.dq.data()) v /= 4.0;
    grads.add_scaled(backward(spec, init, t.state, zero, l.dq), 1.0);
  }
  ParamSet expected = init;
  Optimizer opt(cfg.optimizer_options(), init);
  opt.step(expected, grads);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& x = expected.entry(i).value.data();
    const auto& y = a.online().entry(i).value.data();
    for (std::size_t k = 0; k < x.size(); ++k) EXPECT_NEAR(x[k], y[k], 1e-12) << expected.entry(i).name;
  }
}

TEST(Agent, RecurrentLossShrinksOnAbsorbingZeroRewardData) {
  auto cfg = small_config(AgentKind::drqn);
  cfg.learning_rate = 0.01;
  const auto spec = mlp_preset({3, 3}, 4, true);
  Agent a(spec, cfg, 3);
  Gen gen(50);
  std::vector<std::vector<Transition>> seqs(2);
  const Tensor obs = gen.tensor({3, 3}, 0, 1);
  for (auto& s : seqs)
    for (int k = 0; k < 3; ++k) s.push_back(Transition{obs, gen.index(0, 3), 0.0, obs, false});
  a.sync_target();
  double prev = a.train_step_recurrent(seqs);
  const double first = prev;
  for (int u = 0; u < 200; ++u) {
    a.sync_target();
    prev = a.train_step_recurrent(seqs);
  }
  EXPECT_LT(prev, 0.05 * first);
  EXPECT_LT(prev, 1e-4);
}

TEST(ActAndRecord, SingleRepeatIsOneStep) {
  Agent a = Agent(mlp_preset({2}, 2, false), small_config(AgentKind::dqn), 1);
  ConstantEnv env(-1.0);
  Rng rng = make_rng(1, 1);
  Recorder sink;
  ActingState st = begin_episode(a, env, rng);
  const auto t = act_and_record(a, env, st, sink, rng);
  EXPECT_EQ(env.steps(), 1u);
  EXPECT_EQ(t.reward, -1.0);
  EXPECT_EQ(a.step(), 1u);
  EXPECT_EQ(sink.items.size(), 1u);
}

TEST(ActAndRecord, RepeatSumsRewards) {
  auto cfg = small_config(AgentKind::dqn);
  cfg.action_repeat = 4;
  Agent a(mlp_preset({2}, 2, false), cfg, 1);
  ConstantEnv env(0.5);
  Rng rng = make_rng(1, 1);
  Recorder sink;
  ActingState st = begin_episode(a, env, rng);
  const auto t = act_and_record(a, env, st, sink, rng);
  EXPECT_EQ(env.steps(), 4u);
  EXPECT_EQ(t.reward, 2.0);
  EXPECT_FALSE(t.terminal);
}

TEST(ActAndRecord, TerminalCutsRepeatShort) {
  auto cfg = small_config(AgentKind::dqn);
  cfg.action_repeat = 4;
  Agent a(mlp_preset({2}, 2, false), cfg, 1);
  ConstantEnv env(1.0, 2);
  Rng rng = make_rng(1, 1);
  Recorder sink;
  ActingState st = begin_episode(a, env, rng);
  const auto t = act_and_record(a, env, st, sink, rng);
  EXPECT_TRUE(t.terminal);
  EXPECT_EQ(env.steps(), 2u);
  EXPECT_EQ(t.reward, 2.0);
  EXPECT_THROW(act_and_record(a, env, st, sink, rng), ContractViolation);
}

TEST(ActAndRecord, ExplorationDoesNotAdvanceStep) {
  Agent a(mlp_preset({2}, 2, true), small_config(AgentKind::drqn), 1);
  ConstantEnv env(0.0);
  Rng rng = make_rng(1, 1);
  Recorder sink;
  ActingState st = begin_episode(a, env, rng);
  ASSERT_TRUE(st.memory.has_value());
  for (double v : st.memory->hidden.data()) EXPECT_EQ(v, 0.0);
  for (int i = 0; i < 5; ++i) explore_and_record(a, env, st, sink, rng);
  EXPECT_EQ(a.step(), 0u);
  EXPECT_EQ(sink.items.size(), 5u);
  for (const auto& t : sink.items) EXPECT_LT(t.action, 2u);
}
