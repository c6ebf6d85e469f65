#include "drdqn/presets.hpp"

namespace drdqn {

namespace {

std::size_t channels_of(const Shape& s) { return s.size() == 3 ? s[0] : 1; }

NetworkSpec finish_head(NetworkSpec spec, std::size_t actions, bool recurrent, std::size_t lstm_hidden) {
  std::size_t width = spec.layer_output_shapes().back()[0];
  if (recurrent) {
    spec.layers.push_back(LstmLayer{width, lstm_hidden});
    width = lstm_hidden;
  }
  spec.layers.push_back(DenseLayer{width, actions, Activation::linear});
  spec.validate();
  return spec;
}

}  // namespace

NetworkSpec mlp_preset(const Shape& input_shape, std::size_t actions, bool recurrent) {
  NetworkSpec spec{input_shape, {}};
  spec.layers.push_back(DenseLayer{shape_size(input_shape), 64, Activation::relu});
  spec.layers.push_back(DenseLayer{64, 64, Activation::relu});
  return finish_head(std::move(spec), actions, recurrent, 64);
}

NetworkSpec small_atari_preset(const Shape& input_shape, std::size_t actions, bool recurrent) {
  NetworkSpec spec{input_shape, {}};
  spec.layers.push_back(Conv2dLayer{channels_of(input_shape), 16, 8, 4, Activation::relu});
  spec.layers.push_back(Conv2dLayer{16, 32, 4, 2, Activation::relu});
  spec.layers.push_back(Conv2dLayer{32, 32, 3, 1, Activation::relu});
  const auto flat = shape_size(spec.layer_output_shapes().back());
  spec.layers.push_back(DenseLayer{flat, 512, Activation::relu});
  spec.layers.push_back(DenseLayer{512, 128, Activation::relu});
  return finish_head(std::move(spec), actions, recurrent, 128);
}

NetworkSpec compact_conv_preset(const Shape& input_shape, std::size_t actions, bool recurrent) {
  NetworkSpec spec{input_shape, {}};
  spec.layers.push_back(Conv2dLayer{channels_of(input_shape), 8, 4, 2, Activation::relu});
  spec.layers.push_back(Conv2dLayer{8, 16, 3, 1, Activation::relu});
  spec.layers.push_back(Conv2dLayer{16, 16, 3, 1, Activation::relu});
  const auto flat = shape_size(spec.layer_output_shapes().back());
  spec.layers.push_back(DenseLayer{flat, 128, Activation::relu});
  return finish_head(std::move(spec), actions, recurrent, 64);
}

NetworkSpec make_preset(std::string_view name, const Shape& input_shape, std::size_t actions, bool recurrent) {
  if (name == "mlp") return mlp_preset(input_shape, actions, recurrent);
  if (name == "small-atari") return small_atari_preset(input_shape, actions, recurrent);
  if (name == "compact-conv") return compact_conv_preset(input_shape, actions, recurrent);
  throw std::invalid_argument("unknown network preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"mlp", "small-atari", "compact-conv"}; }

}  // namespace drdqn
