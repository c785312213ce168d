#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gradsign/data.hpp"
#include "gradsign/nn.hpp"
#include "gradsign/tensor.hpp"

namespace gradsign::train {

struct TrainConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    std::uint64_t seed = 42;
};

void validate_config(const TrainConfig& cfg);

// First/second moment estimates per parameter tensor plus the step counter.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::uint64_t t = 0;

    static AdamState init(const std::vector<Tensor>& params);
};

// One Adam update; pure in (params, grads, state). Returns the updated
// parameters and state.
std::pair<std::vector<Tensor>, AdamState> adam_step(const std::vector<Tensor>& params,
                                                    const std::vector<Tensor>& grads,
                                                    const AdamState& state,
                                                    const TrainConfig& cfg);

struct EpochStats {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double accuracy_percent = 0.0;
};

struct TrainResult {
    nn::ModelParams model;
    std::vector<EpochStats> log;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Mini-batch training over the dataset: seeded per-epoch shuffle, gradients
// averaged over the actual batch size, Adam updates. Deterministic in
// (model, dataset, cfg). on_epoch, when set, observes each completed epoch.
TrainResult train(nn::ModelParams model, const data::Dataset& dataset, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Checkpoint container, little-endian throughout:
//   magic "GSGN" | u32 version (=1)
//   u32 input_channels | u32 input_side | u32 num_classes | u32 num_layers
//   per layer: u32 kind, then conv2d: u32 in_ch, out_ch, kernel, pad
//                         dense:  u32 in_width, out_width
//   per parametric layer, weight then bias:
//     u32 rank | u64 dims[rank] | f64 values (raw IEEE-754 bits)
std::vector<std::uint8_t> serialize_model(const nn::ModelParams& model);
nn::ModelParams deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const nn::ModelParams& model, const std::filesystem::path& path);
nn::ModelParams load_checkpoint(const std::filesystem::path& path);

// FNV-1a 64 over the serialized checkpoint bytes, as 16 hex digits.
std::string model_digest(const nn::ModelParams& model);
std::string digest_bytes(const std::vector<std::uint8_t>& bytes);

}  // namespace gradsign::train
