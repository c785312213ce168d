#include "gradsign/train.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gradsign/errors.hpp"

namespace gradsign::train {

void validate_config(const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0)) throw ConfigError("train: beta1 outside [0, 1)");
    if (!(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) throw ConfigError("train: beta2 outside [0, 1)");
    if (!(cfg.eps_hat > 0.0)) throw ConfigError("train: eps_hat must be positive");
    if (cfg.epochs < 1) throw ConfigError("train: epochs must be at least 1");
    if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
}

AdamState AdamState::init(const std::vector<Tensor>& params) {
    AdamState st;
    st.m.reserve(params.size());
    st.v.reserve(params.size());
    for (const Tensor& p : params) {
        st.m.push_back(Tensor::zeros(p.shape));
        st.v.push_back(Tensor::zeros(p.shape));
    }
    return st;
}

std::pair<std::vector<Tensor>, AdamState> adam_step(const std::vector<Tensor>& params,
                                                    const std::vector<Tensor>& grads,
                                                    const AdamState& state,
                                                    const TrainConfig& cfg) {
    validate_config(cfg);
    if (grads.size() != params.size() || state.m.size() != params.size() ||
        state.v.size() != params.size())
        throw ShapeError("adam_step: parameter/gradient/state tensor counts differ");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].same_shape(grads[i]) || !params[i].same_shape(state.m[i]) ||
            !params[i].same_shape(state.v[i]))
            throw ShapeError("adam_step: shape mismatch at parameter tensor " + std::to_string(i));
    }

    std::vector<Tensor> out = params;
    AdamState st = state;
    st.t = state.t + 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));

    for (std::size_t i = 0; i < out.size(); ++i) {
        double* p = out[i].data();
        const double* g = grads[i].data();
        double* m = st.m[i].data();
        double* v = st.v[i].data();
        const std::size_t n = out[i].size();
        for (std::size_t j = 0; j < n; ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            p[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps_hat);
        }
    }
    return {std::move(out), std::move(st)};
}

TrainResult train(nn::ModelParams model, const data::Dataset& dataset, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    validate_config(cfg);
    nn::validate_model(model);
    if (dataset.empty()) throw DataError("train: dataset is empty");
    for (const data::Example& ex : dataset.examples) {
        if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= model.num_classes)
            throw LabelError("train: label " + std::to_string(ex.label) +
                             " out of range for " + std::to_string(model.num_classes) + " classes");
        if (ex.image.height != model.input_side || ex.image.width != model.input_side)
            throw ShapeError("train: image " + std::to_string(ex.image.width) + "x" +
                             std::to_string(ex.image.height) + " does not match model input side " +
                             std::to_string(model.input_side));
    }

    const std::size_t n = dataset.size();
    std::vector<Tensor> inputs;
    inputs.reserve(n);
    for (const data::Example& ex : dataset.examples) inputs.push_back(data::normalize(ex.image));

    auto param_ptrs = nn::parameter_list(model);
    std::vector<Tensor> params;
    params.reserve(param_ptrs.size());
    for (Tensor* p : param_ptrs) params.push_back(*p);
    AdamState st = AdamState::init(params);

    // parameter_list order is (weight, bias) per parametric layer; map each
    // slot back to its layer for gradient accumulation.
    std::vector<std::size_t> slot_layer;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (model.layers[i].has_params()) {
            slot_layer.push_back(i);
            slot_layer.push_back(i);
        }
    }

    TrainResult result;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        RngState shuffle_rng(RngState::derive(cfg.seed, epoch, 0));
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % (i + 1));
            std::swap(perm[i], perm[j]);
        }

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            const double batch_n = static_cast<double>(end - start);

            std::vector<Tensor> grad_sum;
            grad_sum.reserve(params.size());
            for (const Tensor& p : params) grad_sum.push_back(Tensor::zeros(p.shape));

            for (std::size_t k = start; k < end; ++k) {
                const std::size_t idx = perm[k];
                const int label = dataset.examples[idx].label;
                auto [logits, trace] = nn::forward(model, inputs[idx]);
                loss_sum += nn::loss(logits, label);
                if (nn::argmax(logits) == label) ++correct;

                nn::Gradients g = nn::backward(model, trace, label);
                std::size_t slot = 0;
                for (std::size_t li = 0; li < model.layers.size(); ++li) {
                    if (!model.layers[li].has_params()) continue;
                    const Tensor& dw = g.param_grads[li].weight;
                    const Tensor& db = g.param_grads[li].bias;
                    double* aw = grad_sum[slot].data();
                    for (std::size_t j = 0; j < dw.size(); ++j) aw[j] += dw.values[j];
                    double* ab = grad_sum[slot + 1].data();
                    for (std::size_t j = 0; j < db.size(); ++j) ab[j] += db.values[j];
                    slot += 2;
                }
            }
            for (Tensor& g : grad_sum) {
                for (double& x : g.values) x /= batch_n;
            }

            auto stepped = adam_step(params, grad_sum, st, cfg);
            params = std::move(stepped.first);
            st = std::move(stepped.second);
            for (std::size_t i = 0; i < params.size(); ++i) *param_ptrs[i] = params[i];
        }

        result.log.push_back({epoch + 1, loss_sum / static_cast<double>(n),
                              100.0 * static_cast<double>(correct) / static_cast<double>(n)});
        if (on_epoch) on_epoch(result.log.back());
    }

    result.model = std::move(model);
    return result;
}

namespace {

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void append_f64(std::vector<std::uint8_t>& out, double d) {
    append_u64(out, std::bit_cast<std::uint64_t>(d));
}

struct Cursor {
    const std::vector<std::uint8_t>& data;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) const {
        if (data.size() - pos < n)
            throw FormatError(std::string("checkpoint: truncated reading ") + what, pos);
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
};

void append_tensor(std::vector<std::uint8_t>& out, const Tensor& t) {
    append_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) append_u64(out, static_cast<std::uint64_t>(d));
    for (double v : t.values) append_f64(out, v);
}

Tensor read_tensor(Cursor& c) {
    const std::uint32_t rank = c.u32("tensor rank");
    if (rank > 8) throw FormatError("checkpoint: implausible tensor rank", c.pos - 4);
    std::vector<std::size_t> shape(rank);
    std::size_t total = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        shape[i] = static_cast<std::size_t>(c.u64("tensor dims"));
        if (shape[i] == 0 || total > (1u << 28) / std::max<std::size_t>(shape[i], 1))
            throw FormatError("checkpoint: implausible tensor dims", c.pos - 8);
        total *= shape[i];
    }
    std::vector<double> values(total);
    for (std::size_t i = 0; i < total; ++i) values[i] = c.f64("tensor values");
    return Tensor(std::move(shape), std::move(values));
}

constexpr std::uint32_t kVersion = 1;

}  // namespace

std::vector<std::uint8_t> serialize_model(const nn::ModelParams& model) {
    std::vector<std::uint8_t> out = {'G', 'S', 'G', 'N'};
    append_u32(out, kVersion);
    append_u32(out, static_cast<std::uint32_t>(model.input_channels));
    append_u32(out, static_cast<std::uint32_t>(model.input_side));
    append_u32(out, static_cast<std::uint32_t>(model.num_classes));
    append_u32(out, static_cast<std::uint32_t>(model.layers.size()));
    for (const nn::LayerSpec& spec : model.layers) {
        append_u32(out, static_cast<std::uint32_t>(spec.kind));
        if (spec.kind == nn::LayerKind::Conv2d) {
            append_u32(out, static_cast<std::uint32_t>(spec.in_channels));
            append_u32(out, static_cast<std::uint32_t>(spec.out_channels));
            append_u32(out, static_cast<std::uint32_t>(spec.kernel));
            append_u32(out, static_cast<std::uint32_t>(spec.pad));
        } else if (spec.kind == nn::LayerKind::Dense) {
            append_u32(out, static_cast<std::uint32_t>(spec.in_width));
            append_u32(out, static_cast<std::uint32_t>(spec.out_width));
        }
    }
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (!model.layers[i].has_params()) continue;
        append_tensor(out, model.params[i].weight);
        append_tensor(out, model.params[i].bias);
    }
    return out;
}

nn::ModelParams deserialize_model(const std::vector<std::uint8_t>& bytes) {
    Cursor c{bytes};
    c.need(4, "magic");
    if (bytes[0] != 'G' || bytes[1] != 'S' || bytes[2] != 'G' || bytes[3] != 'N')
        throw FormatError("checkpoint: bad magic, expected GSGN", 0);
    c.pos = 4;
    const std::uint32_t version = c.u32("version");
    if (version != kVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version), 4);

    nn::ModelParams model;
    model.input_channels = c.u32("input_channels");
    model.input_side = c.u32("input_side");
    model.num_classes = c.u32("num_classes");
    const std::uint32_t num_layers = c.u32("num_layers");
    if (num_layers > 256) throw FormatError("checkpoint: implausible layer count", c.pos - 4);

    for (std::uint32_t i = 0; i < num_layers; ++i) {
        const std::size_t kind_pos = c.pos;
        const std::uint32_t kind = c.u32("layer kind");
        nn::LayerSpec spec;
        switch (kind) {
            case static_cast<std::uint32_t>(nn::LayerKind::Conv2d): {
                const std::uint32_t in_c = c.u32("conv in_channels");
                const std::uint32_t out_c = c.u32("conv out_channels");
                spec = nn::LayerSpec::conv2d(in_c, out_c);
                spec.kernel = c.u32("conv kernel");
                spec.pad = c.u32("conv pad");
                break;
            }
            case static_cast<std::uint32_t>(nn::LayerKind::Relu):
                spec = nn::LayerSpec::relu();
                break;
            case static_cast<std::uint32_t>(nn::LayerKind::MaxPool2x2):
                spec = nn::LayerSpec::maxpool2x2();
                break;
            case static_cast<std::uint32_t>(nn::LayerKind::Flatten):
                spec = nn::LayerSpec::flatten();
                break;
            case static_cast<std::uint32_t>(nn::LayerKind::Dense): {
                const std::uint32_t in_w = c.u32("dense in_width");
                const std::uint32_t out_w = c.u32("dense out_width");
                spec = nn::LayerSpec::dense(in_w, out_w);
                break;
            }
            default:
                throw FormatError("checkpoint: unknown layer kind " + std::to_string(kind),
                                  kind_pos);
        }
        model.layers.push_back(spec);
    }

    model.params.resize(model.layers.size());
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        if (!model.layers[i].has_params()) continue;
        model.params[i].weight = read_tensor(c);
        model.params[i].bias = read_tensor(c);
    }
    if (c.pos != bytes.size())
        throw FormatError("checkpoint: trailing bytes after parameters", c.pos);

    nn::validate_model(model);
    return model;
}

void save_checkpoint(const nn::ModelParams& model, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

nn::ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

std::string digest_bytes(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string model_digest(const nn::ModelParams& model) {
    return digest_bytes(serialize_model(model));
}

}  // namespace gradsign::train
