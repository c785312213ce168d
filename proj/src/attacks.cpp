#include "gradsign/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "gradsign/errors.hpp"

namespace gradsign::attacks {

const char* attack_name(AttackKind kind) {
    return kind == AttackKind::Fgsm ? "fgsm" : "pgd";
}

AttackKind attack_from_name(const std::string& name) {
    if (name == "fgsm") return AttackKind::Fgsm;
    if (name == "pgd") return AttackKind::Pgd;
    throw ConfigError("unknown attack '" + name + "', expected fgsm or pgd");
}

void validate_config(const AttackConfig& cfg) {
    if (!(cfg.epsilon >= 0.0)) throw ConfigError("attack: epsilon must be >= 0");
    if (!(cfg.alpha > 0.0)) throw ConfigError("attack: alpha must be > 0");
    if (cfg.steps < 1) throw ConfigError("attack: steps must be >= 1");
}

Tensor project_linf(const Tensor& candidate, const Tensor& center, double epsilon) {
    if (!candidate.same_shape(center))
        throw ShapeError("project_linf: shape mismatch " + shape_to_string(candidate.shape) +
                         " vs " + shape_to_string(center.shape));
    if (!(epsilon >= 0.0)) throw ConfigError("project_linf: epsilon must be >= 0");
    Tensor out = candidate;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double lo = center.values[i] - epsilon;
        const double hi = center.values[i] + epsilon;
        out.values[i] = std::min(std::max(out.values[i], lo), hi);
    }
    return out;
}

namespace {

void check_input_range(const Tensor& x, const char* who) {
    for (double v : x.values) {
        if (!(v >= -1.0 && v <= 1.0))
            throw ValueError(std::string(who) + ": input value " + std::to_string(v) +
                             " outside normalized range [-1, 1]");
    }
}

}  // namespace

LossOracle make_oracle(const nn::ModelParams& model, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= model.num_classes)
        throw LabelError("attack: label " + std::to_string(label) + " out of range");
    LossOracle oracle;
    oracle.loss_and_grad = [&model, label](const Tensor& x) {
        auto [logits, trace] = nn::forward(model, x);
        return std::make_pair(nn::loss(logits, label), nn::input_gradient(model, trace, label));
    };
    oracle.loss_and_predict = [&model, label](const Tensor& x) {
        Tensor logits = nn::forward(model, x).first;
        return std::make_pair(nn::loss(logits, label), nn::argmax(logits));
    };
    return oracle;
}

AdvExample fgsm_core(const LossOracle& oracle, const Tensor& x, double epsilon) {
    if (!(epsilon >= 0.0)) throw ConfigError("fgsm: epsilon must be >= 0");
    check_input_range(x, "fgsm");

    AdvExample adv;
    auto [loss0, grad] = oracle.loss_and_grad(x);
    adv.loss_before = loss0;
    // epsilon == 0 collapses the ball: return the input bit for bit.
    adv.x_adv = (epsilon == 0.0) ? x : clamp(add(x, scale(sign(grad), epsilon)), -1.0, 1.0);
    adv.perturbation = sub(adv.x_adv, x);
    auto [loss1, pred] = oracle.loss_and_predict(adv.x_adv);
    adv.loss_after = loss1;
    adv.predicted_label = pred;
    return adv;
}

AdvExample pgd_core(const LossOracle& oracle, const Tensor& x, const AttackConfig& cfg) {
    validate_config(cfg);
    check_input_range(x, "pgd");

    AdvExample adv;
    Tensor xt = x;
    bool have_loss_before = false;
    if (cfg.random_start && cfg.epsilon > 0.0) {
        RngState rng(cfg.seed);
        Tensor noise = uniform_tensor(rng, x.shape, -cfg.epsilon, cfg.epsilon);
        xt = clamp(project_linf(add(x, noise), x, cfg.epsilon), -1.0, 1.0);
        adv.loss_before = oracle.loss_and_predict(x).first;
        have_loss_before = true;
    }

    for (std::size_t t = 0; t < cfg.steps; ++t) {
        auto [l, grad] = oracle.loss_and_grad(xt);
        if (!have_loss_before) {
            adv.loss_before = l;  // first step starts at the clean input
            have_loss_before = true;
        }
        if (cfg.epsilon > 0.0) {
            xt = clamp(project_linf(add(xt, scale(sign(grad), cfg.alpha)), x, cfg.epsilon),
                       -1.0, 1.0);
        }
    }

    adv.x_adv = (cfg.epsilon == 0.0) ? x : std::move(xt);
    adv.perturbation = sub(adv.x_adv, x);
    auto [loss1, pred] = oracle.loss_and_predict(adv.x_adv);
    adv.loss_after = loss1;
    adv.predicted_label = pred;
    return adv;
}

AdvExample fgsm(const nn::ModelParams& model, const Tensor& x, int y, double epsilon) {
    AdvExample adv = fgsm_core(make_oracle(model, y), x, epsilon);
    adv.original_label = y;
    return adv;
}

AdvExample pgd(const nn::ModelParams& model, const Tensor& x, int y, const AttackConfig& cfg) {
    AdvExample adv = pgd_core(make_oracle(model, y), x, cfg);
    adv.original_label = y;
    return adv;
}

}  // namespace gradsign::attacks
