#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gradsign/attacks.hpp"
#include "gradsign/data.hpp"
#include "gradsign/nn.hpp"

namespace gradsign::eval {

struct EvalRow {
    double epsilon = 0.0;
    double accuracy_percent = 0.0;
    std::size_t n_examples = 0;
};

struct EvalReport {
    std::string attack_name;
    std::vector<EvalRow> rows;     // strictly increasing epsilon, row 0 is clean
    std::string model_id;          // checkpoint digest
    attacks::AttackConfig config;  // alpha / steps / random_start / seed used
};

// Percentage of examples whose predicted class matches the label.
double accuracy(const nn::ModelParams& model, const data::Dataset& ds);

// Attacks every example at every epsilon and measures adversarial accuracy.
// eps_list must be strictly increasing, non-negative, and contain 0; the
// epsilon = 0 row equals clean accuracy exactly. Per-example seeds derive
// from (cfg.seed, epsilon index, example index), so parallel evaluation
// matches sequential evaluation bit for bit.
EvalReport epsilon_sweep(const nn::ModelParams& model, const data::Dataset& ds,
                         attacks::AttackKind kind, const std::vector<double>& eps_list,
                         const attacks::AttackConfig& cfg);

// Two-row figure: adversarial images on top, perturbation visualizations
// below, one column per epsilon.
struct ImageGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<data::Image> cells;  // row-major
    std::vector<std::string> captions;
};

// Top cell per epsilon: denormalize(x_adv). Bottom cell: the perturbation
// mapped affinely from [-eps, eps] to [0, 1] (mid-gray for epsilon 0).
ImageGrid render_attack_grid(const nn::ModelParams& model, const data::Image& img, int label,
                             attacks::AttackKind kind, const std::vector<double>& eps_list,
                             const attacks::AttackConfig& cfg);

// CSV schema: header "epsilon,accuracy_percent,n_examples", fixed 2-decimal
// formatting for epsilon and accuracy.
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
std::vector<EvalRow> read_report_rows(const std::filesystem::path& path);

// Cells composited into one image with 2-pixel white separators.
void write_grid_ppm(const ImageGrid& grid, const std::filesystem::path& path);

}  // namespace gradsign::eval
