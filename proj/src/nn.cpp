#include "gradsign/nn.hpp"

#include <cmath>
#include <string>

#include "gradsign/errors.hpp"
#include "gradsign/kernels.hpp"

namespace gradsign::nn {

LayerSpec LayerSpec::conv2d(std::size_t in_channels, std::size_t out_channels) {
    LayerSpec s;
    s.kind = LayerKind::Conv2d;
    s.in_channels = in_channels;
    s.out_channels = out_channels;
    return s;
}

LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = LayerKind::Relu;
    return s;
}

LayerSpec LayerSpec::maxpool2x2() {
    LayerSpec s;
    s.kind = LayerKind::MaxPool2x2;
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::Flatten;
    return s;
}

LayerSpec LayerSpec::dense(std::size_t in_width, std::size_t out_width) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.in_width = in_width;
    s.out_width = out_width;
    return s;
}

namespace {

// Shape of the data flowing between layers: spatial (c,h,w) until flatten,
// flat width afterwards.
struct FlowShape {
    bool flat = false;
    std::size_t c = 0, h = 0, w = 0;
    std::size_t width = 0;

    std::vector<std::size_t> as_shape() const {
        if (flat) return {width};
        return {c, h, w};
    }
};

FlowShape apply_layer_shape(const LayerSpec& spec, const FlowShape& in, std::size_t layer_idx) {
    const std::string at = "layer " + std::to_string(layer_idx);
    FlowShape out = in;
    switch (spec.kind) {
        case LayerKind::Conv2d:
            if (in.flat) throw ConfigError(at + ": conv2d after flatten");
            if (spec.kernel != 3 || spec.pad != 1)
                throw ConfigError(at + ": only 3x3 conv with pad 1 is supported");
            if (spec.in_channels != in.c)
                throw ConfigError(at + ": conv2d expects " + std::to_string(spec.in_channels) +
                                  " channels, input has " + std::to_string(in.c));
            out.c = spec.out_channels;
            break;
        case LayerKind::Relu:
            break;
        case LayerKind::MaxPool2x2:
            if (in.flat) throw ConfigError(at + ": maxpool after flatten");
            if (in.h % 2 != 0 || in.w % 2 != 0)
                throw ConfigError(at + ": maxpool needs even spatial dims, got " +
                                  std::to_string(in.h) + "x" + std::to_string(in.w));
            out.h = in.h / 2;
            out.w = in.w / 2;
            break;
        case LayerKind::Flatten:
            if (in.flat) throw ConfigError(at + ": flatten applied twice");
            out.flat = true;
            out.width = in.c * in.h * in.w;
            break;
        case LayerKind::Dense:
            if (!in.flat) throw ConfigError(at + ": dense before flatten");
            if (spec.in_width != in.width)
                throw ConfigError(at + ": dense expects width " + std::to_string(spec.in_width) +
                                  ", input has " + std::to_string(in.width));
            out.width = spec.out_width;
            break;
    }
    return out;
}

std::vector<FlowShape> flow_shapes(const ModelParams& model) {
    FlowShape cur;
    cur.c = model.input_channels;
    cur.h = model.input_side;
    cur.w = model.input_side;
    std::vector<FlowShape> shapes;
    shapes.reserve(model.layers.size() + 1);
    shapes.push_back(cur);
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        cur = apply_layer_shape(model.layers[i], cur, i);
        shapes.push_back(cur);
    }
    return shapes;
}

void require_param_shapes(const ModelParams& model) {
    if (model.params.size() != model.layers.size())
        throw ConfigError("model: params list not aligned with layers");
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& spec = model.layers[i];
        const LayerParams& p = model.params[i];
        if (spec.kind == LayerKind::Conv2d) {
            std::vector<std::size_t> want_w = {spec.out_channels, spec.in_channels, 3, 3};
            if (p.weight.shape != want_w || p.bias.shape != std::vector<std::size_t>{spec.out_channels})
                throw ConfigError("layer " + std::to_string(i) + ": conv2d parameter shapes wrong");
        } else if (spec.kind == LayerKind::Dense) {
            std::vector<std::size_t> want_w = {spec.out_width, spec.in_width};
            if (p.weight.shape != want_w || p.bias.shape != std::vector<std::size_t>{spec.out_width})
                throw ConfigError("layer " + std::to_string(i) + ": dense parameter shapes wrong");
        } else if (p.weight.size() != 0 || p.bias.size() != 0) {
            throw ConfigError("layer " + std::to_string(i) + ": unexpected parameters");
        }
    }
}

int checked_label(int label, std::size_t num_classes, const char* who) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes)
        throw LabelError(std::string(who) + ": label " + std::to_string(label) +
                         " out of range [0, " + std::to_string(num_classes) + ")");
    return label;
}

}  // namespace

void validate_model(const ModelParams& model) {
    if (model.layers.empty()) throw ConfigError("model: no layers");
    if (model.input_side == 0 || model.input_channels == 0)
        throw ConfigError("model: input shape unset");
    auto shapes = flow_shapes(model);
    const FlowShape& out = shapes.back();
    if (!out.flat || out.width != model.num_classes)
        throw ConfigError("model: final layer width " +
                          std::to_string(out.flat ? out.width : 0) + " != num_classes " +
                          std::to_string(model.num_classes));
    require_param_shapes(model);
}

ModelParams make_model(std::vector<LayerSpec> layers, std::size_t input_channels,
                       std::size_t input_side, std::size_t num_classes, RngState& rng) {
    ModelParams model;
    model.layers = std::move(layers);
    model.input_channels = input_channels;
    model.input_side = input_side;
    model.num_classes = num_classes;
    model.params.resize(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& spec = model.layers[i];
        if (spec.kind == LayerKind::Conv2d) {
            const double stddev = std::sqrt(2.0 / static_cast<double>(spec.in_channels * 9));
            model.params[i].weight =
                normal_tensor(rng, {spec.out_channels, spec.in_channels, 3, 3}, 0.0, stddev);
            model.params[i].bias = Tensor::zeros({spec.out_channels});
        } else if (spec.kind == LayerKind::Dense) {
            const double stddev = std::sqrt(2.0 / static_cast<double>(spec.in_width));
            model.params[i].weight =
                normal_tensor(rng, {spec.out_width, spec.in_width}, 0.0, stddev);
            model.params[i].bias = Tensor::zeros({spec.out_width});
        }
    }
    validate_model(model);
    return model;
}

ModelParams build_model(std::size_t input_side, std::size_t num_classes,
                        std::size_t hidden_width, RngState& rng) {
    if (input_side == 0 || input_side % 8 != 0)
        throw ConfigError("build_model: input_side " + std::to_string(input_side) +
                          " not divisible by 8");
    if (num_classes < 2)
        throw ConfigError("build_model: num_classes must be at least 2");
    if (hidden_width == 0) throw ConfigError("build_model: hidden_width must be positive");

    const std::size_t side8 = input_side / 8;
    const std::size_t flat_width = side8 * side8 * 128;
    std::vector<LayerSpec> layers = {
        LayerSpec::conv2d(3, 32),   LayerSpec::relu(), LayerSpec::maxpool2x2(),
        LayerSpec::conv2d(32, 64),  LayerSpec::relu(), LayerSpec::maxpool2x2(),
        LayerSpec::conv2d(64, 128), LayerSpec::relu(), LayerSpec::maxpool2x2(),
        LayerSpec::flatten(),
        LayerSpec::dense(flat_width, hidden_width), LayerSpec::relu(),
        LayerSpec::dense(hidden_width, num_classes),
    };
    return make_model(std::move(layers), 3, input_side, num_classes, rng);
}

std::pair<Tensor, ForwardTrace> forward(const ModelParams& model, const Tensor& x) {
    const std::vector<std::size_t> want = {model.input_channels, model.input_side,
                                           model.input_side};
    if (x.shape != want)
        throw ShapeError("forward: input shape " + shape_to_string(x.shape) + " != model input " +
                         shape_to_string(want));

    ForwardTrace trace;
    trace.layer_inputs.reserve(model.layers.size());
    trace.pool_argmax.resize(model.layers.size());

    FlowShape cur_shape;
    cur_shape.c = model.input_channels;
    cur_shape.h = model.input_side;
    cur_shape.w = model.input_side;
    Tensor cur = x;

    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& spec = model.layers[i];
        const LayerParams& p = model.params[i];
        FlowShape next_shape = apply_layer_shape(spec, cur_shape, i);
        Tensor next;
        switch (spec.kind) {
            case LayerKind::Conv2d: {
                next = Tensor::zeros(next_shape.as_shape());
                kernels::conv2d_forward(cur.data(), p.weight.data(), p.bias.data(), next.data(),
                                        spec.in_channels, spec.out_channels, cur_shape.h,
                                        cur_shape.w);
                break;
            }
            case LayerKind::Relu: {
                next = Tensor::zeros(next_shape.as_shape());
                kernels::relu_forward(cur.data(), next.data(), cur.size());
                break;
            }
            case LayerKind::MaxPool2x2: {
                next = Tensor::zeros(next_shape.as_shape());
                trace.pool_argmax[i].resize(next.size());
                kernels::maxpool2x2_forward(cur.data(), next.data(), trace.pool_argmax[i].data(),
                                            cur_shape.c, cur_shape.h, cur_shape.w);
                break;
            }
            case LayerKind::Flatten: {
                next = cur;
                next.shape = next_shape.as_shape();
                break;
            }
            case LayerKind::Dense: {
                next = Tensor::zeros(next_shape.as_shape());
                kernels::dense_forward(cur.data(), p.weight.data(), p.bias.data(), next.data(),
                                       spec.in_width, spec.out_width);
                break;
            }
        }
        trace.layer_inputs.push_back(std::move(cur));
        cur = std::move(next);
        cur_shape = next_shape;
    }

    trace.logits = cur;
    return {std::move(cur), std::move(trace)};
}

Tensor softmax(const Tensor& logits) {
    Tensor out = logits;
    double m = out.values[0];
    for (double v : out.values) m = std::max(m, v);
    double sum = 0.0;
    for (double& v : out.values) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : out.values) v /= sum;
    return out;
}

double loss(const Tensor& logits, int label) {
    checked_label(label, logits.size(), "loss");
    double m = logits.values[0];
    for (double v : logits.values) m = std::max(m, v);
    double sum = 0.0;
    for (double v : logits.values) sum += std::exp(v - m);
    return m + std::log(sum) - logits.values[static_cast<std::size_t>(label)];
}

namespace {

void check_trace(const ModelParams& model, const ForwardTrace& trace,
                 const std::vector<FlowShape>& shapes) {
    if (trace.layer_inputs.size() != model.layers.size() ||
        trace.pool_argmax.size() != model.layers.size())
        throw TraceError("backward: trace layer count " +
                         std::to_string(trace.layer_inputs.size()) + " != model layer count " +
                         std::to_string(model.layers.size()));
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (trace.layer_inputs[i].shape != shapes[i].as_shape())
            throw TraceError("backward: trace activation " + std::to_string(i) +
                             " has shape " + shape_to_string(trace.layer_inputs[i].shape) +
                             ", model expects " + shape_to_string(shapes[i].as_shape()));
        if (model.layers[i].kind == LayerKind::MaxPool2x2 &&
            trace.pool_argmax[i].size() != shape_product(shapes[i + 1].as_shape()))
            throw TraceError("backward: trace pool indices missing at layer " + std::to_string(i));
    }
    if (trace.logits.shape != shapes.back().as_shape())
        throw TraceError("backward: trace logits shape mismatch");
}

// Shared reverse walk; param_grads may be null when only the input gradient
// is wanted (the attack loop), which skips the weight-gradient kernels.
Tensor backward_walk(const ModelParams& model, const ForwardTrace& trace, int label,
                     std::vector<LayerParams>* param_grads) {
    auto shapes = flow_shapes(model);
    check_trace(model, trace, shapes);
    checked_label(label, model.num_classes, "backward");

    // Fused softmax + cross-entropy gradient.
    Tensor dcur = softmax(trace.logits);
    dcur.values[static_cast<std::size_t>(label)] -= 1.0;

    if (param_grads) param_grads->resize(model.layers.size());

    for (std::size_t n = model.layers.size(); n-- > 0;) {
        const LayerSpec& spec = model.layers[n];
        const Tensor& input = trace.layer_inputs[n];
        const FlowShape& in_shape = shapes[n];
        switch (spec.kind) {
            case LayerKind::Conv2d: {
                if (param_grads) {
                    LayerParams& g = (*param_grads)[n];
                    g.weight = Tensor::zeros({spec.out_channels, spec.in_channels, 3, 3});
                    g.bias = Tensor::zeros({spec.out_channels});
                    kernels::conv2d_backward_params(dcur.data(), input.data(), g.weight.data(),
                                                    g.bias.data(), spec.in_channels,
                                                    spec.out_channels, in_shape.h, in_shape.w);
                }
                Tensor dx = Tensor::zeros(in_shape.as_shape());
                kernels::conv2d_backward_input(dcur.data(), model.params[n].weight.data(),
                                               dx.data(), spec.in_channels, spec.out_channels,
                                               in_shape.h, in_shape.w);
                dcur = std::move(dx);
                break;
            }
            case LayerKind::Relu: {
                Tensor dx = Tensor::zeros(in_shape.as_shape());
                kernels::relu_backward(input.data(), dcur.data(), dx.data(), input.size());
                dcur = std::move(dx);
                break;
            }
            case LayerKind::MaxPool2x2: {
                Tensor dx = Tensor::zeros(in_shape.as_shape());
                kernels::maxpool2x2_backward(dcur.data(), trace.pool_argmax[n].data(), dx.data(),
                                             in_shape.c, in_shape.h, in_shape.w);
                dcur = std::move(dx);
                break;
            }
            case LayerKind::Flatten: {
                dcur.shape = in_shape.as_shape();
                break;
            }
            case LayerKind::Dense: {
                if (param_grads) {
                    LayerParams& g = (*param_grads)[n];
                    g.weight = Tensor::zeros({spec.out_width, spec.in_width});
                    g.bias = Tensor::zeros({spec.out_width});
                    kernels::dense_backward_params(dcur.data(), input.data(), g.weight.data(),
                                                   g.bias.data(), spec.in_width, spec.out_width);
                }
                Tensor dx = Tensor::zeros(in_shape.as_shape());
                kernels::dense_backward_input(dcur.data(), model.params[n].weight.data(),
                                              dx.data(), spec.in_width, spec.out_width);
                dcur = std::move(dx);
                break;
            }
        }
    }
    return dcur;
}

}  // namespace

Gradients backward(const ModelParams& model, const ForwardTrace& trace, int label) {
    Gradients g;
    g.input_grad = backward_walk(model, trace, label, &g.param_grads);
    return g;
}

Tensor input_gradient(const ModelParams& model, const ForwardTrace& trace, int label) {
    return backward_walk(model, trace, label, nullptr);
}

int argmax(const Tensor& logits) {
    int best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
        if (logits.values[i] > logits.values[static_cast<std::size_t>(best)])
            best = static_cast<int>(i);
    }
    return best;
}

int predict(const ModelParams& model, const Tensor& x) {
    return argmax(forward(model, x).first);
}

std::vector<const Tensor*> parameter_list(const ModelParams& model) {
    std::vector<const Tensor*> out;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (model.layers[i].has_params()) {
            out.push_back(&model.params[i].weight);
            out.push_back(&model.params[i].bias);
        }
    }
    return out;
}

std::vector<Tensor*> parameter_list(ModelParams& model) {
    std::vector<Tensor*> out;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (model.layers[i].has_params()) {
            out.push_back(&model.params[i].weight);
            out.push_back(&model.params[i].bias);
        }
    }
    return out;
}

}  // namespace gradsign::nn
