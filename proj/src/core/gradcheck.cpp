#include "drdqn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace drdqn {

namespace {

double objective(const NetworkSpec& spec, const ParamSet& params, std::span<const Tensor> inputs,
                 const std::optional<RecurrentState>& state, const std::vector<Tensor>& weights) {
  const auto trace = forward_sequence(spec, params, inputs, state);
  double total = 0.0;
  for (std::size_t t = 0; t < trace.outputs.size(); ++t) {
    for (std::size_t k = 0; k < weights[t].size(); ++k) total += weights[t][k] * trace.outputs[t][k];
  }
  return total;
}

}  // namespace

GradCheckReport finite_diff_check(const NetworkSpec& spec, const ParamSet& params, std::span<const Tensor> inputs,
                                  const std::optional<RecurrentState>& state, double eps, std::uint64_t seed) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_check: eps must be positive");
  Rng rng = make_rng(seed, 1);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const std::size_t out = spec.output_size();
  std::vector<Tensor> weights;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    Tensor w({out});
    for (auto& v : w.data()) v = dist(rng);
    weights.push_back(std::move(w));
  }

  const auto trace = forward_sequence(spec, params, inputs, state);
  const ParamSet analytic = backward_sequence(spec, params, trace, weights);

  GradCheckReport report;
  ParamSet probe = params;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    double worst = 0.0;
    auto values = probe.entry(i).value.data();
    const auto grad = analytic.entry(i).value.data();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + eps;
      const double up = objective(spec, probe, inputs, state, weights);
      values[k] = saved - eps;
      const double down = objective(spec, probe, inputs, state, weights);
      values[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double denom = std::max({std::abs(grad[k]), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(grad[k] - numeric) / denom);
      ++report.entries_checked;
    }
    report.per_parameter.emplace_back(probe.entry(i).name, worst);
    report.max_rel_error = std::max(report.max_rel_error, worst);
  }
  return report;
}

GradCheckReport finite_diff_check(const NetworkSpec& spec, const Tensor& input,
                                  const std::optional<RecurrentState>& state, double eps, std::uint64_t seed) {
  const ParamSet params = init_params(spec, seed);
  return finite_diff_check(spec, params, std::span<const Tensor>(&input, 1), state, eps, seed);
}

namespace {

std::vector<Tensor> random_inputs(const Shape& shape, std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < count; ++i) {
    Tensor t(shape);
    for (auto& v : t.data()) v = dist(rng);
    out.push_back(std::move(t));
  }
  return out;
}

GradCheckCase check_case(std::string name, const NetworkSpec& spec, std::size_t unroll, double eps,
                         std::uint64_t seed) {
  Rng rng = make_rng(seed, 2);
  const auto inputs = random_inputs(spec.input_shape, unroll, rng);
  std::optional<RecurrentState> state;
  if (spec.recurrent()) {
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    state = RecurrentState::zeros(spec.lstm_hidden());
    for (auto& v : state->hidden.data()) v = dist(rng);
    for (auto& v : state->cell.data()) v = dist(rng);
  }
  const ParamSet params = init_params(spec, seed);
  return {std::move(name), unroll, finite_diff_check(spec, params, inputs, state, eps, seed)};
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(double eps, std::uint64_t seed) {
  std::vector<GradCheckCase> out;
  out.push_back(check_case("dense",
                           NetworkSpec{{6},
                                       {DenseLayer{6, 8, Activation::tanh}, DenseLayer{8, 5, Activation::relu},
                                        DenseLayer{5, 3, Activation::linear}}},
                           1, eps, seed));
  out.push_back(check_case("conv",
                           NetworkSpec{{10, 10},
                                       {Conv2dLayer{1, 3, 3, 1, Activation::relu}, Conv2dLayer{3, 4, 3, 2, Activation::tanh},
                                        DenseLayer{36, 8, Activation::relu}, DenseLayer{8, 3, Activation::linear}}},
                           1, eps, seed));
  out.push_back(check_case("lstm-unroll4",
                           NetworkSpec{{5},
                                       {DenseLayer{5, 6, Activation::tanh}, LstmLayer{6, 4},
                                        DenseLayer{4, 3, Activation::linear}}},
                           4, eps, seed));
  return out;
}

}  // namespace drdqn
