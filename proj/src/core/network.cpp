#include "drdqn/network.hpp"

#include <cmath>
#include <sstream>

namespace drdqn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void activate(std::vector<double>& v, Activation a) {
  switch (a) {
    case Activation::relu:
      for (auto& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Activation::tanh:
      for (auto& x : v) x = std::tanh(x);
      break;
    case Activation::linear:
      break;
  }
}

// Turns dL/d(output) into dL/d(pre-activation) using the stored output.
void activation_backward(std::vector<double>& grad, const std::vector<double>& output, Activation a) {
  switch (a) {
    case Activation::relu:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (output[i] <= 0.0) grad[i] = 0.0;
      }
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - output[i] * output[i];
      break;
    case Activation::linear:
      break;
  }
}

struct ConvGeometry {
  std::size_t channels, height, width, out_height, out_width;
};

ConvGeometry conv_geometry(const Shape& in, const Conv2dLayer& c) {
  ConvGeometry g{};
  if (in.size() == 2) {
    g.channels = 1;
    g.height = in[0];
    g.width = in[1];
  } else if (in.size() == 3) {
    g.channels = in[0];
    g.height = in[1];
    g.width = in[2];
  } else {
    throw DimensionError("conv2d needs a {h, w} or {c, h, w} input, got " + shape_string(in));
  }
  if (g.channels != c.in_channels) {
    throw DimensionError("conv2d expects " + std::to_string(c.in_channels) + " input channels, got " +
                         std::to_string(g.channels));
  }
  if (c.stride == 0) throw DimensionError("conv2d stride must be positive");
  if (c.kernel == 0 || c.kernel > g.height || c.kernel > g.width) {
    throw DimensionError("conv2d kernel " + std::to_string(c.kernel) + " does not fit input " +
                         shape_string(in));
  }
  g.out_height = (g.height - c.kernel) / c.stride + 1;
  g.out_width = (g.width - c.kernel) / c.stride + 1;
  return g;
}

// Parameter tensors of one layer, resolved once per call.
struct LayerParams {
  const Tensor* weight = nullptr;
  const Tensor* bias = nullptr;
  const Tensor* hidden_weight = nullptr;
};

struct LayerGrads {
  Tensor* weight = nullptr;
  Tensor* bias = nullptr;
  Tensor* hidden_weight = nullptr;
};

const Tensor& require(const ParamSet& params, const std::string& name, const Shape& shape) {
  auto i = params.index_of(name);
  if (!i) throw DimensionError("missing parameter '" + name + "'");
  const Tensor& t = params.entry(*i).value;
  if (t.shape() != shape) {
    throw DimensionError("parameter '" + name + "' has shape " + shape_string(t.shape()) + ", expected " +
                         shape_string(shape));
  }
  return t;
}

Tensor& require(ParamSet& params, const std::string& name) {
  auto i = params.index_of(name);
  if (!i) throw DimensionError("missing parameter '" + name + "'");
  return params.entry(*i).value;
}

std::vector<std::pair<std::string, Shape>> param_layout(const NetworkSpec& spec) {
  std::vector<std::pair<std::string, Shape>> out;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    std::visit(overloaded{
                   [&](const DenseLayer& d) {
                     out.emplace_back(weight_name(i), Shape{d.out, d.in});
                     out.emplace_back(bias_name(i), Shape{d.out});
                   },
                   [&](const Conv2dLayer& c) {
                     out.emplace_back(weight_name(i), Shape{c.out_channels, c.in_channels, c.kernel, c.kernel});
                     out.emplace_back(bias_name(i), Shape{c.out_channels});
                   },
                   [&](const LstmLayer& l) {
                     out.emplace_back(input_weight_name(i), Shape{4 * l.hidden, l.in});
                     out.emplace_back(hidden_weight_name(i), Shape{4 * l.hidden, l.hidden});
                     out.emplace_back(bias_name(i), Shape{4 * l.hidden});
                   },
               },
               spec.layers[i]);
  }
  return out;
}

std::vector<LayerParams> resolve(const NetworkSpec& spec, const ParamSet& params) {
  std::vector<LayerParams> out(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    std::visit(overloaded{
                   [&](const DenseLayer& d) {
                     out[i].weight = &require(params, weight_name(i), {d.out, d.in});
                     out[i].bias = &require(params, bias_name(i), {d.out});
                   },
                   [&](const Conv2dLayer& c) {
                     out[i].weight =
                         &require(params, weight_name(i), {c.out_channels, c.in_channels, c.kernel, c.kernel});
                     out[i].bias = &require(params, bias_name(i), {c.out_channels});
                   },
                   [&](const LstmLayer& l) {
                     out[i].weight = &require(params, input_weight_name(i), {4 * l.hidden, l.in});
                     out[i].hidden_weight = &require(params, hidden_weight_name(i), {4 * l.hidden, l.hidden});
                     out[i].bias = &require(params, bias_name(i), {4 * l.hidden});
                   },
               },
               spec.layers[i]);
  }
  return out;
}

void dense_forward(const DenseLayer& d, const LayerParams& p, const std::vector<double>& x,
                   std::vector<double>& y) {
  const double* w = p.weight->data().data();
  const double* b = p.bias->data().data();
  y.assign(d.out, 0.0);
  for (std::size_t o = 0; o < d.out; ++o) {
    const double* row = w + o * d.in;
    double acc = b[o];
    for (std::size_t k = 0; k < d.in; ++k) acc += row[k] * x[k];
    y[o] = acc;
  }
  activate(y, d.activation);
}

void conv_forward(const Conv2dLayer& c, const ConvGeometry& g, const double* w, const double* b,
                  const std::vector<double>& x, std::vector<double>& y) {
  const std::size_t oh = g.out_height, ow = g.out_width, k = c.kernel, s = c.stride;
  y.assign(c.out_channels * oh * ow, 0.0);
  for (std::size_t o = 0; o < c.out_channels; ++o) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t col = 0; col < ow; ++col) {
        double acc = b ? b[o] : 0.0;
        for (std::size_t ch = 0; ch < g.channels; ++ch) {
          const double* kern = w + ((o * g.channels + ch) * k) * k;
          const double* plane = x.data() + ch * g.height * g.width;
          for (std::size_t ki = 0; ki < k; ++ki) {
            const double* in_row = plane + (r * s + ki) * g.width + col * s;
            const double* k_row = kern + ki * k;
            for (std::size_t kj = 0; kj < k; ++kj) acc += k_row[kj] * in_row[kj];
          }
        }
        y[(o * oh + r) * ow + col] = acc;
      }
    }
  }
}

void lstm_forward(const LstmLayer& l, const LayerParams& p, const std::vector<double>& x,
                  const std::vector<double>& h_prev, const std::vector<double>& c_prev,
                  SequenceTrace::LayerCache& cache) {
  const std::size_t H = l.hidden;
  const double* wi = p.weight->data().data();
  const double* wh = p.hidden_weight->data().data();
  const double* b = p.bias->data().data();
  auto& z = cache.gates;
  z.assign(4 * H, 0.0);
  for (std::size_t r = 0; r < 4 * H; ++r) {
    double acc = b[r];
    const double* wir = wi + r * l.in;
    for (std::size_t k = 0; k < l.in; ++k) acc += wir[k] * x[k];
    const double* whr = wh + r * H;
    for (std::size_t k = 0; k < H; ++k) acc += whr[k] * h_prev[k];
    z[r] = acc;
  }
  for (std::size_t j = 0; j < H; ++j) {
    z[j] = sigmoid(z[j]);
    z[H + j] = sigmoid(z[H + j]);
    z[2 * H + j] = std::tanh(z[2 * H + j]);
    z[3 * H + j] = sigmoid(z[3 * H + j]);
  }
  cache.cell.assign(H, 0.0);
  cache.cell_tanh.assign(H, 0.0);
  cache.output.assign(H, 0.0);
  for (std::size_t j = 0; j < H; ++j) {
    const double c = z[H + j] * c_prev[j] + z[j] * z[2 * H + j];
    cache.cell[j] = c;
    cache.cell_tanh[j] = std::tanh(c);
    cache.output[j] = z[3 * H + j] * cache.cell_tanh[j];
  }
}

// Runs one time step through every layer, filling `caches`. Updates `state` in place.
void step_forward(const NetworkSpec& spec, const std::vector<LayerParams>& params,
                  const std::vector<Shape>& shapes, const Tensor& input, std::optional<RecurrentState>& state,
                  std::vector<SequenceTrace::LayerCache>& caches) {
  caches.resize(spec.layers.size());
  const std::vector<double>* x = &input.values();
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    auto& cache = caches[i];
    cache.input = *x;
    const Shape& in_shape = i == 0 ? spec.input_shape : shapes[i - 1];
    std::visit(overloaded{
                   [&](const DenseLayer& d) { dense_forward(d, params[i], cache.input, cache.output); },
                   [&](const Conv2dLayer& c) {
                     auto g = conv_geometry(in_shape, c);
                     conv_forward(c, g, params[i].weight->data().data(), params[i].bias->data().data(),
                                  cache.input, cache.output);
                     activate(cache.output, c.activation);
                   },
                   [&](const LstmLayer& l) {
                     cache.hidden_prev = state->hidden.values();
                     cache.cell_prev = state->cell.values();
                     lstm_forward(l, params[i], cache.input, cache.hidden_prev, cache.cell_prev, cache);
                     state->hidden = Tensor({l.hidden}, cache.output);
                     state->cell = Tensor({l.hidden}, cache.cell);
                   },
               },
               spec.layers[i]);
    x = &cache.output;
  }
}

void check_state(const NetworkSpec& spec, const std::optional<RecurrentState>& state) {
  if (spec.recurrent()) {
    if (!state) throw DimensionError("network has an lstm layer; a recurrent state is required");
    const Shape want{spec.lstm_hidden()};
    if (state->hidden.shape() != want || state->cell.shape() != want) {
      throw DimensionError("recurrent state shape does not match lstm hidden size " +
                           std::to_string(spec.lstm_hidden()));
    }
  } else if (state) {
    throw DimensionError("network has no lstm layer; recurrent state must be absent");
  }
}

void check_input(const NetworkSpec& spec, const Tensor& input) {
  if (input.shape() != spec.input_shape) {
    throw DimensionError("input shape " + shape_string(input.shape()) + " does not match network input " +
                         shape_string(spec.input_shape));
  }
}

}  // namespace

std::string weight_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".weight"; }
std::string bias_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".bias"; }
std::string input_weight_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".w_input"; }
std::string hidden_weight_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".w_hidden"; }

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::linear:
      return "linear";
  }
  return "linear";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "linear") return Activation::linear;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string describe_layer(const Layer& layer) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const DenseLayer& d) { os << "dense " << d.in << ' ' << d.out << ' ' << activation_name(d.activation); },
                 [&](const Conv2dLayer& c) {
                   os << "conv2d " << c.in_channels << ' ' << c.out_channels << ' ' << c.kernel << ' ' << c.stride
                      << ' ' << activation_name(c.activation);
                 },
                 [&](const LstmLayer& l) { os << "lstm " << l.in << ' ' << l.hidden; },
             },
             layer);
  return os.str();
}

Layer parse_layer(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string kind;
  is >> kind;
  auto fail = [&]() -> Layer { throw std::invalid_argument("malformed layer '" + std::string(text) + "'"); };
  if (kind == "dense") {
    DenseLayer d;
    std::string act;
    if (!(is >> d.in >> d.out >> act)) return fail();
    d.activation = parse_activation(act);
    return d;
  }
  if (kind == "conv2d") {
    Conv2dLayer c;
    std::string act;
    if (!(is >> c.in_channels >> c.out_channels >> c.kernel >> c.stride >> act)) return fail();
    c.activation = parse_activation(act);
    return c;
  }
  if (kind == "lstm") {
    LstmLayer l;
    if (!(is >> l.in >> l.hidden)) return fail();
    return l;
  }
  return fail();
}

std::vector<Shape> NetworkSpec::layer_output_shapes() const {
  if (input_shape.empty() || input_shape.size() > 3) {
    throw DimensionError("network input must have rank 1, 2 or 3, got " + shape_string(input_shape));
  }
  for (auto d : input_shape) {
    if (d == 0) throw DimensionError("network input shape has a zero dimension");
  }
  if (layers.empty()) throw DimensionError("network has no layers");
  std::vector<Shape> shapes;
  Shape current = input_shape;
  bool seen_flat = false;
  int lstm_count = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i) + " (" + describe_layer(layers[i]) + "): ";
    std::visit(overloaded{
                   [&](const DenseLayer& d) {
                     if (d.in != shape_size(current)) {
                       throw DimensionError(where + "expects " + std::to_string(d.in) + " inputs, previous output is " +
                                            shape_string(current));
                     }
                     if (d.out == 0) throw DimensionError(where + "zero width");
                     current = {d.out};
                     seen_flat = true;
                   },
                   [&](const Conv2dLayer& c) {
                     if (seen_flat || current.size() < 2) {
                       throw DimensionError(where + "convolution must precede dense and lstm layers");
                     }
                     if (c.out_channels == 0) throw DimensionError(where + "zero output channels");
                     ConvGeometry g;
                     try {
                       g = conv_geometry(current, c);
                     } catch (const DimensionError& e) {
                       throw DimensionError(where + e.what());
                     }
                     current = {c.out_channels, g.out_height, g.out_width};
                   },
                   [&](const LstmLayer& l) {
                     if (++lstm_count > 1) throw DimensionError(where + "at most one lstm layer is supported");
                     if (l.in != shape_size(current)) {
                       throw DimensionError(where + "expects " + std::to_string(l.in) + " inputs, previous output is " +
                                            shape_string(current));
                     }
                     if (l.hidden == 0) throw DimensionError(where + "zero hidden size");
                     current = {l.hidden};
                     seen_flat = true;
                   },
               },
               layers[i]);
    shapes.push_back(current);
  }
  return shapes;
}

void NetworkSpec::validate() const { (void)layer_output_shapes(); }

std::size_t NetworkSpec::output_size() const { return shape_size(layer_output_shapes().back()); }

bool NetworkSpec::recurrent() const { return lstm_index().has_value(); }

std::optional<std::size_t> NetworkSpec::lstm_index() const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (std::holds_alternative<LstmLayer>(layers[i])) return i;
  }
  return std::nullopt;
}

std::size_t NetworkSpec::lstm_hidden() const {
  auto i = lstm_index();
  return i ? std::get<LstmLayer>(layers[*i]).hidden : 0;
}

RecurrentState RecurrentState::zeros(std::size_t hidden_size) {
  return {Tensor({hidden_size}, 0.0), Tensor({hidden_size}, 0.0)};
}

ParamSet zero_params(const NetworkSpec& spec) {
  spec.validate();
  ParamSet params;
  for (auto& [name, shape] : param_layout(spec)) params.add(name, Tensor(shape, 0.0));
  return params;
}

ParamSet init_params(const NetworkSpec& spec, Rng& rng) {
  ParamSet params = zero_params(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const std::size_t fan_in = std::visit(overloaded{
                                              [](const DenseLayer& d) { return d.in; },
                                              [](const Conv2dLayer& c) { return c.in_channels * c.kernel * c.kernel; },
                                              [](const LstmLayer& l) { return l.in + l.hidden; },
                                          },
                                          spec.layers[i]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::string prefix = "layer" + std::to_string(i) + ".";
    for (auto& e : params) {
      if (e.name.rfind(prefix, 0) != 0) continue;
      for (auto& v : e.value.data()) v = dist(rng);
    }
  }
  return params;
}

ParamSet init_params(const NetworkSpec& spec, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  return init_params(spec, rng);
}

SequenceTrace forward_sequence(const NetworkSpec& spec, const ParamSet& params, std::span<const Tensor> inputs,
                               const std::optional<RecurrentState>& initial) {
  const auto shapes = spec.layer_output_shapes();
  check_state(spec, initial);
  const auto resolved = resolve(spec, params);
  SequenceTrace trace;
  trace.steps.resize(inputs.size());
  trace.outputs.reserve(inputs.size());
  std::optional<RecurrentState> state = initial;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    check_input(spec, inputs[t]);
    step_forward(spec, resolved, shapes, inputs[t], state, trace.steps[t]);
    trace.outputs.emplace_back(Shape{trace.steps[t].back().output.size()}, trace.steps[t].back().output);
  }
  trace.final_state = std::move(state);
  return trace;
}

ForwardResult forward(const NetworkSpec& spec, const ParamSet& params, const Tensor& input,
                      const std::optional<RecurrentState>& state) {
  auto trace = forward_sequence(spec, params, std::span<const Tensor>(&input, 1), state);
  return {std::move(trace.outputs.front()), std::move(trace.final_state)};
}

void accumulate_backward(const NetworkSpec& spec, const ParamSet& params, const SequenceTrace& trace,
                         std::span<const Tensor> output_grads, ParamSet& grads) {
  const auto shapes = spec.layer_output_shapes();
  const auto p = resolve(spec, params);
  params.require_same_layout(grads, "gradient accumulator");
  if (output_grads.size() != trace.steps.size()) {
    throw DimensionError("backward: " + std::to_string(output_grads.size()) + " output gradients for " +
                         std::to_string(trace.steps.size()) + " steps");
  }
  std::vector<LayerGrads> g(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (std::holds_alternative<LstmLayer>(spec.layers[i])) {
      g[i].weight = &require(grads, input_weight_name(i));
      g[i].hidden_weight = &require(grads, hidden_weight_name(i));
    } else {
      g[i].weight = &require(grads, weight_name(i));
    }
    g[i].bias = &require(grads, bias_name(i));
  }
  const std::size_t out_size = shape_size(shapes.back());
  const std::size_t H = spec.lstm_hidden();
  std::vector<double> dh_carry(H, 0.0), dc_carry(H, 0.0);
  std::vector<double> grad, next_grad;

  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    if (output_grads[t].size() != out_size) {
      throw DimensionError("backward: output gradient has " + std::to_string(output_grads[t].size()) +
                           " entries, network output has " + std::to_string(out_size));
    }
    const auto& caches = trace.steps[t];
    grad = output_grads[t].values();
    for (std::size_t i = spec.layers.size(); i-- > 0;) {
      const auto& cache = caches[i];
      const bool need_input_grad = i > 0;
      const Shape& in_shape = i == 0 ? spec.input_shape : shapes[i - 1];
      std::visit(
          overloaded{
              [&](const DenseLayer& d) {
                activation_backward(grad, cache.output, d.activation);
                double* dw = g[i].weight->data().data();
                double* db = g[i].bias->data().data();
                const double* w = p[i].weight->data().data();
                for (std::size_t o = 0; o < d.out; ++o) {
                  const double go = grad[o];
                  db[o] += go;
                  if (go == 0.0) continue;
                  double* row = dw + o * d.in;
                  for (std::size_t k = 0; k < d.in; ++k) row[k] += go * cache.input[k];
                }
                if (need_input_grad) {
                  next_grad.assign(d.in, 0.0);
                  for (std::size_t o = 0; o < d.out; ++o) {
                    const double go = grad[o];
                    if (go == 0.0) continue;
                    const double* row = w + o * d.in;
                    for (std::size_t k = 0; k < d.in; ++k) next_grad[k] += go * row[k];
                  }
                }
              },
              [&](const Conv2dLayer& c) {
                activation_backward(grad, cache.output, c.activation);
                const auto geo = conv_geometry(in_shape, c);
                const std::size_t oh = geo.out_height, ow = geo.out_width, k = c.kernel, s = c.stride;
                double* dw = g[i].weight->data().data();
                double* db = g[i].bias->data().data();
                const double* w = p[i].weight->data().data();
                if (need_input_grad) next_grad.assign(cache.input.size(), 0.0);
                for (std::size_t o = 0; o < c.out_channels; ++o) {
                  for (std::size_t r = 0; r < oh; ++r) {
                    for (std::size_t col = 0; col < ow; ++col) {
                      const double go = grad[(o * oh + r) * ow + col];
                      if (go == 0.0) continue;
                      db[o] += go;
                      for (std::size_t ch = 0; ch < geo.channels; ++ch) {
                        const std::size_t kbase = ((o * geo.channels + ch) * k) * k;
                        const std::size_t pbase = ch * geo.height * geo.width;
                        for (std::size_t ki = 0; ki < k; ++ki) {
                          const std::size_t in_off = pbase + (r * s + ki) * geo.width + col * s;
                          for (std::size_t kj = 0; kj < k; ++kj) {
                            dw[kbase + ki * k + kj] += go * cache.input[in_off + kj];
                            if (need_input_grad) next_grad[in_off + kj] += go * w[kbase + ki * k + kj];
                          }
                        }
                      }
                    }
                  }
                }
              },
              [&](const LstmLayer& l) {
                const auto& z = cache.gates;
                std::vector<double> dz(4 * H);
                for (std::size_t j = 0; j < H; ++j) {
                  const double dh = grad[j] + dh_carry[j];
                  const double ig = z[j], fg = z[H + j], gg = z[2 * H + j], og = z[3 * H + j];
                  const double tc = cache.cell_tanh[j];
                  const double dc = dc_carry[j] + dh * og * (1.0 - tc * tc);
                  dz[j] = dc * gg * ig * (1.0 - ig);
                  dz[H + j] = dc * cache.cell_prev[j] * fg * (1.0 - fg);
                  dz[2 * H + j] = dc * ig * (1.0 - gg * gg);
                  dz[3 * H + j] = dh * tc * og * (1.0 - og);
                  dc_carry[j] = dc * fg;
                }
                double* dwi = g[i].weight->data().data();
                double* dwh = g[i].hidden_weight->data().data();
                double* db = g[i].bias->data().data();
                const double* wi = p[i].weight->data().data();
                const double* wh = p[i].hidden_weight->data().data();
                std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
                if (need_input_grad) next_grad.assign(l.in, 0.0);
                for (std::size_t r = 0; r < 4 * H; ++r) {
                  const double gr = dz[r];
                  db[r] += gr;
                  if (gr == 0.0) continue;
                  double* dwir = dwi + r * l.in;
                  const double* wir = wi + r * l.in;
                  for (std::size_t k = 0; k < l.in; ++k) dwir[k] += gr * cache.input[k];
                  if (need_input_grad) {
                    for (std::size_t k = 0; k < l.in; ++k) next_grad[k] += gr * wir[k];
                  }
                  double* dwhr = dwh + r * H;
                  const double* whr = wh + r * H;
                  for (std::size_t k = 0; k < H; ++k) {
                    dwhr[k] += gr * cache.hidden_prev[k];
                    dh_carry[k] += gr * whr[k];
                  }
                }
              },
          },
          spec.layers[i]);
      if (need_input_grad) std::swap(grad, next_grad);
    }
  }
}

ParamSet backward_sequence(const NetworkSpec& spec, const ParamSet& params, const SequenceTrace& trace,
                           std::span<const Tensor> output_grads) {
  ParamSet grads = params.zeros_like();
  accumulate_backward(spec, params, trace, output_grads, grads);
  return grads;
}

ParamSet backward(const NetworkSpec& spec, const ParamSet& params, const Tensor& input,
                  const std::optional<RecurrentState>& state, const Tensor& dq) {
  auto trace = forward_sequence(spec, params, std::span<const Tensor>(&input, 1), state);
  return backward_sequence(spec, params, trace, std::span<const Tensor>(&dq, 1));
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, std::size_t stride) {
  Shape kshape = kernels.shape();
  const bool single = kshape.size() == 2;
  if (single) kshape = {1, 1, kshape[0], kshape[1]};
  if (kshape.size() != 4 || kshape[2] != kshape[3]) {
    throw DimensionError("conv2d kernels must be {k, k} or {out, c, k, k} with square k, got " +
                         shape_string(kernels.shape()));
  }
  Conv2dLayer layer{kshape[1], kshape[0], kshape[2], stride, Activation::linear};
  const auto g = conv_geometry(input.shape(), layer);
  std::vector<double> out;
  conv_forward(layer, g, kernels.data().data(), nullptr, input.values(), out);
  if (single && input.rank() == 2) return Tensor({g.out_height, g.out_width}, std::move(out));
  return Tensor({layer.out_channels, g.out_height, g.out_width}, std::move(out));
}

RecurrentState lstm_step(const ParamSet& params, std::size_t layer, const Tensor& input,
                         const RecurrentState& state) {
  const std::size_t H = state.hidden.size();
  if (state.cell.size() != H) throw DimensionError("lstm_step: hidden and cell sizes differ");
  const std::size_t in = input.size();
  LstmLayer l{in, H};
  LayerParams p;
  p.weight = &require(params, input_weight_name(layer), {4 * H, in});
  p.hidden_weight = &require(params, hidden_weight_name(layer), {4 * H, H});
  p.bias = &require(params, bias_name(layer), {4 * H});
  SequenceTrace::LayerCache cache;
  lstm_forward(l, p, input.values(), state.hidden.values(), state.cell.values(), cache);
  return {Tensor({H}, cache.output), Tensor({H}, cache.cell)};
}

}  // namespace drdqn
