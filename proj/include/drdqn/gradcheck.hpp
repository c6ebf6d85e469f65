#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drdqn/network.hpp"

namespace drdqn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  /// Worst relative error per parameter tensor, in parameter order.
  std::vector<std::pair<std::string, double>> per_parameter;
  std::size_t entries_checked = 0;
};

/// Compares backward_sequence against central differences of the scalar
/// objective sum_t w_t . q_t, with w_t drawn from `seed`. Relative error per
/// entry is |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport finite_diff_check(const NetworkSpec& spec, const ParamSet& params,
                                  std::span<const Tensor> inputs,
                                  const std::optional<RecurrentState>& state, double eps,
                                  std::uint64_t seed = 17);

/// Convenience form: parameters initialized from `seed`, single input.
GradCheckReport finite_diff_check(const NetworkSpec& spec, const Tensor& input,
                                  const std::optional<RecurrentState>& state, double eps,
                                  std::uint64_t seed = 17);

struct GradCheckCase {
  std::string name;
  std::size_t unroll = 1;
  GradCheckReport report;
};

/// Runs finite_diff_check over the built-in check networks `dense` (tanh and
/// relu hidden layers), `conv` (two convolutions and a dense head) and
/// `lstm-unroll4` (dense, lstm, dense over four steps from a random state).
std::vector<GradCheckCase> run_gradcheck_suite(double eps = 1e-5, std::uint64_t seed = 17);

}  // namespace drdqn
