#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gradsign/rng.hpp"
#include "gradsign/tensor.hpp"

namespace gradsign::nn {

enum class LayerKind : std::uint32_t {
    Conv2d = 0,
    Relu = 1,
    MaxPool2x2 = 2,
    Flatten = 3,
    Dense = 4,
};

struct LayerSpec {
    LayerKind kind = LayerKind::Relu;
    // conv2d
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel = 3;
    std::size_t pad = 1;
    // dense
    std::size_t in_width = 0;
    std::size_t out_width = 0;

    static LayerSpec conv2d(std::size_t in_channels, std::size_t out_channels);
    static LayerSpec relu();
    static LayerSpec maxpool2x2();
    static LayerSpec flatten();
    static LayerSpec dense(std::size_t in_width, std::size_t out_width);

    bool has_params() const noexcept {
        return kind == LayerKind::Conv2d || kind == LayerKind::Dense;
    }
};

// Weight and bias for a parametric layer; both empty otherwise.
struct LayerParams {
    Tensor weight;
    Tensor bias;
};

struct ModelParams {
    std::vector<LayerSpec> layers;
    std::vector<LayerParams> params;  // aligned with layers
    std::size_t input_channels = 3;
    std::size_t input_side = 0;
    std::size_t num_classes = 0;
};

// Activations cached by forward() for the backward pass: the input of every
// layer, pool argmax indices, and the final logits.
struct ForwardTrace {
    std::vector<Tensor> layer_inputs;
    std::vector<std::vector<std::uint32_t>> pool_argmax;  // empty unless maxpool
    Tensor logits;
};

// Checks layer-to-layer shape compatibility and parameter tensor shapes.
void validate_model(const ModelParams& model);

// Assembles a model from an explicit layer stack and He-normal initializes
// the parametric layers (stddev sqrt(2 / fan_in), biases zero).
ModelParams make_model(std::vector<LayerSpec> layers, std::size_t input_channels,
                       std::size_t input_side, std::size_t num_classes, RngState& rng);

// The reference classifier: three 3x3 conv+relu+pool stages with 32/64/128
// filters, then dense(hidden_width)+relu and a dense classification head.
// input_side must be divisible by 8.
ModelParams build_model(std::size_t input_side, std::size_t num_classes,
                        std::size_t hidden_width, RngState& rng);

std::pair<Tensor, ForwardTrace> forward(const ModelParams& model, const Tensor& x);

// Numerically stabilized softmax (probabilities) and cross-entropy loss.
Tensor softmax(const Tensor& logits);
double loss(const Tensor& logits, int label);

struct Gradients {
    std::vector<LayerParams> param_grads;  // aligned with model.layers
    Tensor input_grad;
};

Gradients backward(const ModelParams& model, const ForwardTrace& trace, int label);

// Same input gradient as backward(), skipping the parameter gradients.
Tensor input_gradient(const ModelParams& model, const ForwardTrace& trace, int label);

// Smallest index achieving the maximum logit.
int argmax(const Tensor& logits);
int predict(const ModelParams& model, const Tensor& x);

// Pointers to the parameter tensors in layer order (weight before bias).
std::vector<const Tensor*> parameter_list(const ModelParams& model);
std::vector<Tensor*> parameter_list(ModelParams& model);

}  // namespace gradsign::nn
