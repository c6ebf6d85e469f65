#include "drdqn/optim.hpp"

#include <cmath>

namespace drdqn {

TdLoss td_loss(const Tensor& q, std::size_t action, double target, const LossSpec& spec) {
  if (action >= q.size()) {
    throw std::out_of_range("td_loss: action " + std::to_string(action) + " out of range for " +
                            std::to_string(q.size()) + " actions");
  }
  TdLoss out{0.0, Tensor(q.shape(), 0.0)};
  const double residual = q[action] - target;
  switch (spec.kind) {
    case LossKind::mse:
      out.loss = 0.5 * residual * residual;
      out.dq[action] = residual;
      break;
    case LossKind::huber: {
      const double a = std::abs(residual);
      if (a <= spec.delta) {
        out.loss = 0.5 * residual * residual;
        out.dq[action] = residual;
      } else {
        out.loss = spec.delta * (a - 0.5 * spec.delta);
        out.dq[action] = residual > 0.0 ? spec.delta : -spec.delta;
      }
      break;
    }
  }
  return out;
}

std::string optimizer_name(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "rmsprop"; }

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "rmsprop") return OptimizerKind::rmsprop;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (expected rmsprop or adam)");
}

std::string loss_name(LossKind kind) { return kind == LossKind::mse ? "mse" : "huber"; }

LossKind parse_loss(std::string_view name) {
  if (name == "mse") return LossKind::mse;
  if (name == "huber") return LossKind::huber;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "' (expected mse or huber)");
}

void rmsprop_update(ParamSet& params, const ParamSet& grads, ParamSet& cache, double lr, double decay,
                    double eps) {
  params.require_same_layout(grads, "rmsprop gradients");
  params.require_same_layout(cache, "rmsprop cache");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params.entry(i).value.data();
    auto g = grads.entry(i).value.data();
    auto c = cache.entry(i).value.data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      c[k] = decay * c[k] + (1.0 - decay) * g[k] * g[k];
      p[k] -= lr * g[k] / std::sqrt(c[k] + eps);
    }
  }
  params.set_step_count(params.step_count() + 1);
}

void adam_update(ParamSet& params, const ParamSet& grads, ParamSet& first_moment, ParamSet& second_moment,
                 double lr, double beta1, double beta2, double eps) {
  params.require_same_layout(grads, "adam gradients");
  params.require_same_layout(first_moment, "adam first moment");
  params.require_same_layout(second_moment, "adam second moment");
  const auto t = params.step_count() + 1;
  params.set_step_count(t);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params.entry(i).value.data();
    auto g = grads.entry(i).value.data();
    auto m = first_moment.entry(i).value.data();
    auto v = second_moment.entry(i).value.data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
      p[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }
}

Optimizer::Optimizer(OptimizerOptions options, const ParamSet& layout)
    : options_(options), first_(layout.zeros_like()), second_(layout.zeros_like()) {}

void Optimizer::step(ParamSet& params, const ParamSet& grads) {
  if (options_.kind == OptimizerKind::adam) {
    adam_update(params, grads, first_, second_, options_.learning_rate, options_.adam_beta1, options_.adam_beta2,
                options_.adam_eps);
  } else {
    rmsprop_update(params, grads, first_, options_.learning_rate, options_.rmsprop_decay, options_.rmsprop_eps);
  }
}

ParamSet Optimizer::export_state() const {
  ParamSet out;
  const bool adam = options_.kind == OptimizerKind::adam;
  for (const auto& e : first_) out.add((adam ? "opt/m/" : "opt/cache/") + e.name, e.value);
  if (adam) {
    for (const auto& e : second_) out.add("opt/v/" + e.name, e.value);
  }
  return out;
}

void Optimizer::import_state(const ParamSet& state) {
  const bool adam = options_.kind == OptimizerKind::adam;
  const ParamSet layout = first_.zeros_like();
  try {
  for (auto& e : first_) e.value = state.at((adam ? "opt/m/" : "opt/cache/") + e.name);
  if (adam) {
    for (auto& e : second_) e.value = state.at("opt/v/" + e.name);
  }
  } catch (const std::out_of_range& e) {
    throw DimensionError(std::string("optimizer state is missing an entry: ") + e.what());
  }
  layout.require_same_layout(first_, "optimizer state");
  layout.require_same_layout(second_, "optimizer state");
}

}  // namespace drdqn
