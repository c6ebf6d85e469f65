#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "drdqn/agents.hpp"
#include "drdqn/envs.hpp"

namespace drdqn {

class NonEnumerableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MdpOutcome {
  std::size_t next_state = 0;
  double reward = 0.0;
  bool terminal = false;
};

/// Deterministic finite MDP as a dense (state, action) -> outcome table.
class TabularMdp {
 public:
  TabularMdp(std::size_t states, std::size_t actions, std::vector<MdpOutcome> table, std::size_t start_state = 0);

  std::size_t state_count() const { return states_; }
  std::size_t action_count() const { return actions_; }
  std::size_t start_state() const { return start_; }
  const MdpOutcome& outcome(std::size_t state, std::size_t action) const { return table_[state * actions_ + action]; }
  std::size_t transition_count() const { return table_.size(); }

 private:
  std::size_t states_, actions_, start_;
  std::vector<MdpOutcome> table_;
};

class QTable {
 public:
  QTable(std::size_t states, std::size_t actions, double fill = 0.0);

  std::size_t state_count() const { return states_; }
  std::size_t action_count() const { return actions_; }
  double& at(std::size_t s, std::size_t a) { return values_[s * actions_ + a]; }
  double at(std::size_t s, std::size_t a) const { return values_[s * actions_ + a]; }
  std::span<const double> row(std::size_t s) const { return {values_.data() + s * actions_, actions_}; }
  std::span<const double> values() const { return values_; }
  double state_value(std::size_t s) const;
  bool all_finite() const;

 private:
  std::size_t states_, actions_;
  std::vector<double> values_;
};

/// Exhaustive table of a GridWorld's movement rule. The goal is absorbing:
/// every action there is terminal with zero reward. The step budget is not modelled.
TabularMdp enumerate_mdp(const GridWorld& env);

/// Dispatches on the dynamic type; only plain grids are enumerable.
TabularMdp enumerate_mdp(const Environment& env);

/// Synchronous sweeps of Q(s,a) <- r + gamma * max_a' Q(s',a') (no bootstrap
/// past terminal outcomes) until the sup-norm change drops below `tol`.
QTable value_iteration(const TabularMdp& mdp, double gamma, double tol = 1e-10, std::size_t max_sweeps = 10'000);

/// max over (s, a) of |Q(s,a) - (r + gamma * max Q(s', .))|.
double bellman_residual(const TabularMdp& mdp, const QTable& q, double gamma);

struct ReturnStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> returns;
};

/// Undiscounted return of the lowest-index greedy policy read off `q`.
ReturnStats greedy_returns(const QTable& q, GridWorld env, std::size_t episodes, Rng& rng);
double greedy_return(const QTable& q, const GridWorld& env, std::size_t episodes, Rng& rng);

/// Greedy (epsilon 0) rollout of the agent's online network, honouring its action repeat.
ReturnStats greedy_returns(const Agent& agent, const Environment& env, std::size_t episodes, Rng& rng);
double greedy_return(const Agent& agent, const Environment& env, std::size_t episodes, Rng& rng);

struct BiasResult {
  double max_estimator_bias = 0.0;
  double double_estimator_bias = 0.0;
  double max_estimator_stderr = 0.0;
  double double_estimator_stderr = 0.0;
};

/// Start state -> (reward 0) -> decision state with `actions` actions whose
/// rewards are N(0, noise_std^2) observations of a true mean of zero, so the
/// true start value is 0. Each run draws two independent samples per action
/// and estimates the start value as gamma * max(A) (single estimator) and
/// gamma * B[argmax A] (double estimator). Returns the mean estimate minus 0.
BiasResult bias_experiment(std::size_t runs, double noise_std, double gamma, Rng& rng, std::size_t actions = 8);

}  // namespace drdqn
