#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "gradsign/nn.hpp"
#include "gradsign/tensor.hpp"

namespace gradsign::attacks {

enum class AttackKind { Fgsm, Pgd };

const char* attack_name(AttackKind kind);
AttackKind attack_from_name(const std::string& name);

// Attacks operate in normalized input space: epsilon and alpha are measured
// in [-1, 1] units and outputs are clamped to that range.
struct AttackConfig {
    double epsilon = 0.0;
    double alpha = 0.02;
    std::size_t steps = 10;
    bool random_start = true;
    std::uint64_t seed = 0;
};

void validate_config(const AttackConfig& cfg);

struct AdvExample {
    Tensor x_adv;
    Tensor perturbation;  // x_adv - x
    int original_label = -1;
    int predicted_label = -1;
    double loss_before = 0.0;  // loss at the clean input
    double loss_after = 0.0;   // loss at x_adv
};

// Per-coordinate clip of candidate into the epsilon-ball around center.
Tensor project_linf(const Tensor& candidate, const Tensor& center, double epsilon);

// Model evaluations an attack needs, injected so tests can count gradient
// evaluations and substitute closed-form models.
struct LossOracle {
    // loss and input gradient at a point (one forward + backward)
    std::function<std::pair<double, Tensor>(const Tensor&)> loss_and_grad;
    // loss and predicted class at a point (one forward)
    std::function<std::pair<double, int>(const Tensor&)> loss_and_predict;
};

LossOracle make_oracle(const nn::ModelParams& model, int label);

AdvExample fgsm_core(const LossOracle& oracle, const Tensor& x, double epsilon);
AdvExample pgd_core(const LossOracle& oracle, const Tensor& x, const AttackConfig& cfg);

// Single gradient step of size epsilon along sign(input gradient).
AdvExample fgsm(const nn::ModelParams& model, const Tensor& x, int y, double epsilon);

// cfg.steps signed steps of size cfg.alpha, each projected back into the
// epsilon-ball and clamped to [-1, 1]; optional uniform random start.
AdvExample pgd(const nn::ModelParams& model, const Tensor& x, int y, const AttackConfig& cfg);

}  // namespace gradsign::attacks
