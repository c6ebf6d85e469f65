#include "drdqn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drdqn {

TabularMdp::TabularMdp(std::size_t states, std::size_t actions, std::vector<MdpOutcome> table, std::size_t start_state)
    : states_(states), actions_(actions), start_(start_state), table_(std::move(table)) {
  if (states == 0 || actions == 0) throw std::invalid_argument("mdp needs at least one state and one action");
  if (table_.size() != states * actions) {
    throw std::invalid_argument("mdp table has " + std::to_string(table_.size()) + " outcomes, expected " +
                                std::to_string(states * actions));
  }
  if (start_ >= states) throw std::invalid_argument("mdp start state out of range");
  for (const auto& o : table_) {
    if (o.next_state >= states) throw std::invalid_argument("mdp transition leaves the state list");
  }
}

QTable::QTable(std::size_t states, std::size_t actions, double fill)
    : states_(states), actions_(actions), values_(states * actions, fill) {
  if (states == 0 || actions == 0) throw std::invalid_argument("q-table dimensions must be positive");
}

double QTable::state_value(std::size_t s) const { return max_value(row(s)); }

bool QTable::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

TabularMdp enumerate_mdp(const GridWorld& env) {
  const std::size_t S = env.state_count(), A = env.action_count();
  const std::size_t goal = env.state_index(env.options().goal);
  std::vector<MdpOutcome> table(S * A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      if (s == goal) {
        table[s * A + a] = {goal, 0.0, true};
        continue;
      }
      const auto m = env.move(env.position_of(s), a);
      table[s * A + a] = {env.state_index(m.next), m.reward, m.reached_goal};
    }
  }
  return TabularMdp(S, A, std::move(table), env.state_index(env.options().start));
}

TabularMdp enumerate_mdp(const Environment& env) {
  if (const auto* grid = dynamic_cast<const GridWorld*>(&env)) return enumerate_mdp(*grid);
  throw NonEnumerableError("environment '" + env.name() + "' has no enumerable state space");
}

namespace {

double backup(const TabularMdp& mdp, const QTable& q, std::size_t s, std::size_t a, double gamma) {
  const auto& o = mdp.outcome(s, a);
  if (o.terminal) return o.reward;
  return o.reward + gamma * q.state_value(o.next_state);
}

}  // namespace

QTable value_iteration(const TabularMdp& mdp, double gamma, double tol, std::size_t max_sweeps) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("value_iteration: gamma must lie in [0, 1]");
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
  QTable q(mdp.state_count(), mdp.action_count(), 0.0);
  QTable next = q;
  double change = 0.0;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    change = 0.0;
    for (std::size_t s = 0; s < mdp.state_count(); ++s) {
      for (std::size_t a = 0; a < mdp.action_count(); ++a) {
        const double v = backup(mdp, q, s, a, gamma);
        change = std::max(change, std::abs(v - q.at(s, a)));
        next.at(s, a) = v;
      }
    }
    std::swap(q, next);
    if (change < tol) return q;
  }
  throw ConvergenceError("value_iteration: sup-norm change " + std::to_string(change) + " still above tol " +
                         std::to_string(tol) + " after " + std::to_string(max_sweeps) + " sweeps");
}

double bellman_residual(const TabularMdp& mdp, const QTable& q, double gamma) {
  double worst = 0.0;
  for (std::size_t s = 0; s < mdp.state_count(); ++s) {
    for (std::size_t a = 0; a < mdp.action_count(); ++a) {
      worst = std::max(worst, std::abs(q.at(s, a) - backup(mdp, q, s, a, gamma)));
    }
  }
  return worst;
}

namespace {

ReturnStats summarize(std::vector<double> returns) {
  ReturnStats st;
  st.mean = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
  st.min = *std::min_element(returns.begin(), returns.end());
  st.max = *std::max_element(returns.begin(), returns.end());
  st.returns = std::move(returns);
  return st;
}

}  // namespace

ReturnStats greedy_returns(const QTable& q, GridWorld env, std::size_t episodes, Rng& rng) {
  if (episodes == 0) throw std::invalid_argument("greedy_return: episodes must be at least 1");
  if (q.state_count() != env.state_count() || q.action_count() != env.action_count()) {
    throw DimensionError("greedy_return: q-table does not match the grid");
  }
  std::vector<double> returns;
  for (std::size_t e = 0; e < episodes; ++e) {
    env.reset(rng);
    double total = 0.0;
    while (!env.terminal()) {
      total += env.step(argmax(q.row(env.state_index(env.position())))).reward;
    }
    returns.push_back(total);
  }
  return summarize(std::move(returns));
}

double greedy_return(const QTable& q, const GridWorld& env, std::size_t episodes, Rng& rng) {
  return greedy_returns(q, env, episodes, rng).mean;
}

ReturnStats greedy_returns(const Agent& agent, const Environment& prototype, std::size_t episodes, Rng& rng) {
  if (episodes == 0) throw std::invalid_argument("greedy_return: episodes must be at least 1");
  if (prototype.observation_shape() != agent.spec().input_shape) {
    throw DimensionError("greedy_return: environment observation " + shape_string(prototype.observation_shape()) +
                         " does not match network input " + shape_string(agent.spec().input_shape));
  }
  if (prototype.action_count() != agent.spec().output_size()) {
    throw DimensionError("greedy_return: environment has " + std::to_string(prototype.action_count()) +
                         " actions, network outputs " + std::to_string(agent.spec().output_size()));
  }
  auto env = prototype.clone();
  std::vector<double> returns;
  for (std::size_t e = 0; e < episodes; ++e) {
    Tensor obs = preprocess(env->reset(rng));
    auto memory = agent.initial_state();
    double total = 0.0;
    while (!env->terminal()) {
      auto out = agent.act_values(obs, memory);
      memory = std::move(out.state);
      const std::size_t action = argmax(out.q.data());
      Tensor last;
      for (std::size_t r = 0; r < agent.config().action_repeat && !env->terminal(); ++r) {
        EnvStep s = env->step(action);
        total += s.reward;
        last = std::move(s.observation);
      }
      obs = preprocess(last);
    }
    returns.push_back(total);
  }
  return summarize(std::move(returns));
}

double greedy_return(const Agent& agent, const Environment& env, std::size_t episodes, Rng& rng) {
  return greedy_returns(agent, env, episodes, rng).mean;
}

BiasResult bias_experiment(std::size_t runs, double noise_std, double gamma, Rng& rng, std::size_t actions) {
  if (runs == 0) throw std::invalid_argument("bias_experiment: runs must be at least 1");
  if (actions == 0) throw std::invalid_argument("bias_experiment: need at least one action");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("bias_experiment: noise_std must be non-negative");
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> a(actions), b(actions);
  double sum_max = 0.0, sum_max_sq = 0.0, sum_dbl = 0.0, sum_dbl_sq = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    for (auto& v : a) v = noise_std * noise(rng);
    for (auto& v : b) v = noise_std * noise(rng);
    const double single = gamma * max_value(a);
    const double dbl = gamma * b[argmax(a)];
    sum_max += single;
    sum_max_sq += single * single;
    sum_dbl += dbl;
    sum_dbl_sq += dbl * dbl;
  }
  const double n = static_cast<double>(runs);
  auto stderr_of = [n](double sum, double sum_sq) {
    if (n < 2.0) return 0.0;
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
  };
  return {sum_max / n, sum_dbl / n, stderr_of(sum_max, sum_max_sq), stderr_of(sum_dbl, sum_dbl_sq)};
}

}  // namespace drdqn
