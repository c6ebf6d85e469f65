#pragma once

#include <string>
#include <string_view>

#include "drdqn/param_set.hpp"
#include "drdqn/tensor.hpp"

namespace drdqn {

enum class LossKind { mse, huber };

struct LossSpec {
  LossKind kind = LossKind::huber;
  double delta = 1.0;
};

struct TdLoss {
  double loss = 0.0;
  Tensor dq;
};

/// Loss on the chosen action's value only; every other entry of `dq` is zero.
TdLoss td_loss(const Tensor& q, std::size_t action, double target, const LossSpec& spec = {});

enum class OptimizerKind { rmsprop, adam };

std::string optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);
std::string loss_name(LossKind kind);
LossKind parse_loss(std::string_view name);

/// c <- decay*c + (1-decay)*g^2 ; p <- p - lr*g/sqrt(c+eps). Increments the step count.
void rmsprop_update(ParamSet& params, const ParamSet& grads, ParamSet& cache, double lr, double decay,
                    double eps);

/// Bias-corrected Adam. Increments the step count before correcting.
void adam_update(ParamSet& params, const ParamSet& grads, ParamSet& first_moment, ParamSet& second_moment,
                 double lr, double beta1, double beta2, double eps);

struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::rmsprop;
  double learning_rate = 0.00025;
  double rmsprop_decay = 0.95;
  double rmsprop_eps = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

/// Owns the per-parameter caches of one optimizer.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerOptions options, const ParamSet& layout);

  void step(ParamSet& params, const ParamSet& grads);

  const OptimizerOptions& options() const { return options_; }

  /// Caches flattened under `opt/<slot>/<param>` names for checkpointing.
  ParamSet export_state() const;
  void import_state(const ParamSet& state);

  bool operator==(const Optimizer& other) const {
    return first_ == other.first_ && second_ == other.second_;
  }

 private:
  OptimizerOptions options_;
  ParamSet first_;   // rmsprop cache or adam first moment
  ParamSet second_;  // adam second moment (unused by rmsprop)
};

}  // namespace drdqn
