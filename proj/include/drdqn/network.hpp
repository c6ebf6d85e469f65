#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "drdqn/param_set.hpp"
#include "drdqn/tensor.hpp"

namespace drdqn {

enum class Activation { relu, tanh, linear };

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::linear;
  bool operator==(const DenseLayer&) const = default;
};

/// Valid-padding cross-correlation with square kernels.
struct Conv2dLayer {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  Activation activation = Activation::relu;
  bool operator==(const Conv2dLayer&) const = default;
};

struct LstmLayer {
  std::size_t in = 0;
  std::size_t hidden = 0;
  bool operator==(const LstmLayer&) const = default;
};

using Layer = std::variant<DenseLayer, Conv2dLayer, LstmLayer>;

/// Layer stack plus the observation shape it consumes.
///
/// Input shapes are `{n}` (vector), `{h, w}` (single-channel image) or
/// `{c, h, w}`. Convolutions must come first; dense and lstm layers consume
/// the flattened output of whatever precedes them.
struct NetworkSpec {
  Shape input_shape;
  std::vector<Layer> layers;

  /// Throws DimensionError on incompatible neighbours or a second lstm layer.
  void validate() const;

  /// Shape produced by every layer, in order (entry i is the output of layer i).
  std::vector<Shape> layer_output_shapes() const;

  std::size_t output_size() const;
  bool recurrent() const;
  std::optional<std::size_t> lstm_index() const;
  std::size_t lstm_hidden() const;

  bool operator==(const NetworkSpec&) const = default;
};

std::string activation_name(Activation a);
Activation parse_activation(std::string_view name);

/// One-line description of a layer, e.g. `dense 25 64 relu`.
std::string describe_layer(const Layer& layer);
Layer parse_layer(std::string_view text);

struct RecurrentState {
  Tensor hidden;
  Tensor cell;

  static RecurrentState zeros(std::size_t hidden_size);
  bool operator==(const RecurrentState&) const = default;
};

/// Parameter names for layer `i`.
std::string weight_name(std::size_t layer);
std::string bias_name(std::size_t layer);
std::string input_weight_name(std::size_t layer);
std::string hidden_weight_name(std::size_t layer);

/// Zero-valued parameters with the layout `spec` expects.
ParamSet zero_params(const NetworkSpec& spec);

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.
ParamSet init_params(const NetworkSpec& spec, Rng& rng);
ParamSet init_params(const NetworkSpec& spec, std::uint64_t seed);

struct ForwardResult {
  Tensor q;
  std::optional<RecurrentState> state;
};

/// Evaluates the network on one observation. `state` must be present iff the
/// spec contains an lstm layer.
ForwardResult forward(const NetworkSpec& spec, const ParamSet& params, const Tensor& input,
                      const std::optional<RecurrentState>& state = std::nullopt);

/// Cached activations of an unrolled evaluation, consumed by backward_sequence.
struct SequenceTrace {
  struct LayerCache {
    std::vector<double> input;
    std::vector<double> output;
    // lstm only
    std::vector<double> hidden_prev;
    std::vector<double> cell_prev;
    std::vector<double> gates;  // i, f, g, o after their nonlinearities
    std::vector<double> cell;
    std::vector<double> cell_tanh;
  };
  std::vector<std::vector<LayerCache>> steps;
  std::vector<Tensor> outputs;
  std::optional<RecurrentState> final_state;
};

/// Unrolls the network over `inputs`, carrying the recurrent state between steps.
SequenceTrace forward_sequence(const NetworkSpec& spec, const ParamSet& params,
                               std::span<const Tensor> inputs,
                               const std::optional<RecurrentState>& initial = std::nullopt);

/// Backpropagation through time. `output_grads[t]` is dL/dq_t; the initial
/// state is treated as a constant. Gradients accumulate over all steps.
ParamSet backward_sequence(const NetworkSpec& spec, const ParamSet& params,
                           const SequenceTrace& trace, std::span<const Tensor> output_grads);

/// Same as backward_sequence but adds into an existing gradient set.
void accumulate_backward(const NetworkSpec& spec, const ParamSet& params, const SequenceTrace& trace,
                         std::span<const Tensor> output_grads, ParamSet& grads);

/// Single-step gradient of `dq . q` with respect to every parameter.
ParamSet backward(const NetworkSpec& spec, const ParamSet& params, const Tensor& input,
                  const std::optional<RecurrentState>& state, const Tensor& dq);

/// Bare cross-correlation, no bias or activation. `input` is `{h, w}` or
/// `{c, h, w}`; `kernels` is `{out, c, k, k}` (or `{k, k}` for one
/// single-channel filter). Output is `{out, oh, ow}` or `{oh, ow}`.
Tensor conv2d(const Tensor& input, const Tensor& kernels, std::size_t stride);

/// One LSTM cell update using the parameters of layer `layer` in `params`.
/// Gate order in the stacked weights is input, forget, candidate, output.
RecurrentState lstm_step(const ParamSet& params, std::size_t layer, const Tensor& input,
                         const RecurrentState& state);

}  // namespace drdqn
