#include "gradsign/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gradsign/errors.hpp"
#include "gradsign/train.hpp"

namespace gradsign::eval {

namespace {

using idx = std::ptrdiff_t;

void check_dataset(const nn::ModelParams& model, const data::Dataset& ds) {
    if (ds.empty()) throw DataError("eval: dataset is empty");
    for (const data::Example& ex : ds.examples) {
        if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= model.num_classes)
            throw LabelError("eval: label " + std::to_string(ex.label) + " out of range");
    }
}

std::vector<Tensor> normalized_inputs(const data::Dataset& ds) {
    std::vector<Tensor> inputs;
    inputs.reserve(ds.size());
    for (const data::Example& ex : ds.examples) inputs.push_back(data::normalize(ex.image));
    return inputs;
}

std::size_t count_correct(const nn::ModelParams& model, const data::Dataset& ds,
                          const std::vector<Tensor>& inputs) {
    const idx n = static_cast<idx>(ds.size());
    std::size_t correct = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : correct)
    for (idx i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (nn::predict(model, inputs[ui]) == ds.examples[ui].label) ++correct;
    }
    return correct;
}

}  // namespace

double accuracy(const nn::ModelParams& model, const data::Dataset& ds) {
    check_dataset(model, ds);
    const auto inputs = normalized_inputs(ds);
    return 100.0 * static_cast<double>(count_correct(model, ds, inputs)) /
           static_cast<double>(ds.size());
}

EvalReport epsilon_sweep(const nn::ModelParams& model, const data::Dataset& ds,
                         attacks::AttackKind kind, const std::vector<double>& eps_list,
                         const attacks::AttackConfig& cfg) {
    check_dataset(model, ds);
    attacks::AttackConfig probe = cfg;
    probe.epsilon = 0.0;
    attacks::validate_config(probe);
    if (eps_list.empty()) throw ConfigError("epsilon_sweep: empty epsilon list");
    bool has_zero = false;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] >= 0.0))
            throw ConfigError("epsilon_sweep: negative epsilon " + std::to_string(eps_list[i]));
        if (i > 0 && !(eps_list[i] > eps_list[i - 1]))
            throw ConfigError("epsilon_sweep: epsilon list must be strictly increasing");
        if (eps_list[i] == 0.0) has_zero = true;
    }
    if (!has_zero) throw ConfigError("epsilon_sweep: epsilon list must contain 0");

    const auto inputs = normalized_inputs(ds);
    const std::size_t n = ds.size();
    const std::size_t clean_correct = count_correct(model, ds, inputs);

    EvalReport report;
    report.attack_name = attacks::attack_name(kind);
    report.model_id = train::model_digest(model);
    report.config = cfg;

    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        const double eps = eps_list[k];
        std::size_t correct;
        if (eps == 0.0) {
            // Both attacks are the identity at epsilon 0.
            correct = clean_correct;
        } else {
            correct = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : correct)
            for (idx i = 0; i < static_cast<idx>(n); ++i) {
                const auto ui = static_cast<std::size_t>(i);
                const int label = ds.examples[ui].label;
                attacks::AdvExample adv;
                if (kind == attacks::AttackKind::Fgsm) {
                    adv = attacks::fgsm(model, inputs[ui], label, eps);
                } else {
                    attacks::AttackConfig c = cfg;
                    c.epsilon = eps;
                    c.seed = RngState::derive(cfg.seed, k, ui);
                    adv = attacks::pgd(model, inputs[ui], label, c);
                }
                if (adv.predicted_label == label) ++correct;
            }
        }
        report.rows.push_back(
            {eps, 100.0 * static_cast<double>(correct) / static_cast<double>(n), n});
    }
    return report;
}

ImageGrid render_attack_grid(const nn::ModelParams& model, const data::Image& img, int label,
                             attacks::AttackKind kind, const std::vector<double>& eps_list,
                             const attacks::AttackConfig& cfg) {
    if (eps_list.empty()) throw ConfigError("render_attack_grid: empty epsilon list");
    if (img.height != model.input_side || img.width != model.input_side)
        throw ShapeError("render_attack_grid: image " + std::to_string(img.width) + "x" +
                         std::to_string(img.height) + " does not match model input side " +
                         std::to_string(model.input_side));

    const Tensor x = data::normalize(img);
    ImageGrid grid;
    grid.rows = 2;
    grid.cols = eps_list.size();
    grid.cells.resize(2 * eps_list.size());

    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        const double eps = eps_list[k];
        char cap[32];
        std::snprintf(cap, sizeof(cap), "%.2f", eps);
        grid.captions.emplace_back(cap);

        if (eps == 0.0) {
            // Identity attack: the source image itself and a flat mid-gray map.
            grid.cells[k] = img;
            grid.cells[eps_list.size() + k] =
                data::Image::filled(img.height, img.width, 0.5, 0.5, 0.5);
            continue;
        }

        attacks::AdvExample adv;
        if (kind == attacks::AttackKind::Fgsm) {
            adv = attacks::fgsm(model, x, label, eps);
        } else {
            attacks::AttackConfig c = cfg;
            c.epsilon = eps;
            c.seed = RngState::derive(cfg.seed, k, 0);
            adv = attacks::pgd(model, x, label, c);
        }
        grid.cells[k] = data::denormalize(adv.x_adv);

        data::Image pert;
        pert.height = img.height;
        pert.width = img.width;
        pert.pixels.resize(img.pixels.size());
        const std::size_t plane = img.height * img.width;
        for (std::size_t i = 0; i < plane; ++i) {
            for (std::size_t c2 = 0; c2 < 3; ++c2) {
                const double v = (adv.perturbation.values[c2 * plane + i] + eps) / (2.0 * eps);
                pert.pixels[i * 3 + c2] = std::min(std::max(v, 0.0), 1.0);
            }
        }
        grid.cells[eps_list.size() + k] = std::move(pert);
    }
    return grid;
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "epsilon,accuracy_percent,n_examples\n";
    for (const EvalRow& row : report.rows) {
        char line[96];
        std::snprintf(line, sizeof(line), "%.2f,%.2f,%zu\n", row.epsilon, row.accuracy_percent,
                      row.n_examples);
        out << line;
    }
    if (!out) throw IoError("short write to " + path.string());
}

std::vector<EvalRow> read_report_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "epsilon,accuracy_percent,n_examples")
        throw FormatError("report: bad CSV header in " + path.string(), 0);
    std::vector<EvalRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        EvalRow row;
        char trailing;
        if (std::sscanf(line.c_str(), "%lf,%lf,%zu%c", &row.epsilon, &row.accuracy_percent,
                        &row.n_examples, &trailing) != 3)
            throw FormatError("report: bad CSV row '" + line + "'", 0);
        rows.push_back(row);
    }
    return rows;
}

void write_grid_ppm(const ImageGrid& grid, const std::filesystem::path& path) {
    if (grid.cells.empty()) throw ConfigError("write_grid_ppm: empty grid");
    const std::size_t cell_h = grid.cells[0].height;
    const std::size_t cell_w = grid.cells[0].width;
    for (const data::Image& cell : grid.cells) {
        if (cell.height != cell_h || cell.width != cell_w)
            throw ShapeError("write_grid_ppm: cells differ in size");
    }

    constexpr std::size_t sep = 2;
    const std::size_t out_h = grid.rows * cell_h + (grid.rows - 1) * sep;
    const std::size_t out_w = grid.cols * cell_w + (grid.cols - 1) * sep;
    data::Image out = data::Image::filled(out_h, out_w, 1.0, 1.0, 1.0);

    for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const data::Image& cell = grid.cells[r * grid.cols + c];
            const std::size_t y0 = r * (cell_h + sep);
            const std::size_t x0 = c * (cell_w + sep);
            for (std::size_t y = 0; y < cell_h; ++y) {
                for (std::size_t x = 0; x < cell_w; ++x) {
                    for (std::size_t ch = 0; ch < 3; ++ch) {
                        out.at(y0 + y, x0 + x, ch) = cell.at(y, x, ch);
                    }
                }
            }
        }
    }
    data::write_ppm_file(out, path);
}

}  // namespace gradsign::eval
