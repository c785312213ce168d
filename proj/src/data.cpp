#include "gradsign/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "gradsign/errors.hpp"
#include "gradsign/rng.hpp"

namespace gradsign::data {

namespace fs = std::filesystem;

Dataset load_directory(const fs::path& root, std::size_t target_side) {
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        throw IoError("dataset root " + root.string() + " is not a directory");

    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    }
    if (class_dirs.empty())
        throw DataError("dataset root " + root.string() + " contains no class directories");
    // Class ids follow byte order of the names, independent of enumeration order.
    std::sort(class_dirs.begin(), class_dirs.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

    Dataset ds;
    for (int label = 0; label < static_cast<int>(class_dirs.size()); ++label) {
        const fs::path& dir = class_dirs[static_cast<std::size_t>(label)];
        ds.class_names.push_back(dir.filename().string());

        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end(),
                  [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
        if (files.empty()) {
            std::cerr << "warning: class directory " << dir.string() << " is empty\n";
            continue;
        }
        for (const fs::path& file : files) {
            try {
                Image img = read_ppm_file(file);
                ds.examples.push_back({resize_bilinear(img, target_side), label});
            } catch (const Error& e) {
                throw IngestionError("cannot ingest " + file.string() + ": " + e.what());
            }
        }
    }
    return ds;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("stratified_split: test_fraction " + std::to_string(test_fraction) +
                          " outside (0, 1)");

    std::vector<std::vector<std::size_t>> by_class(ds.class_names.size());
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
        const int label = ds.examples[i].label;
        if (label < 0 || static_cast<std::size_t>(label) >= ds.class_names.size())
            throw LabelError("stratified_split: label " + std::to_string(label) + " out of range");
        by_class[static_cast<std::size_t>(label)].push_back(i);
    }

    std::vector<bool> is_test(ds.examples.size(), false);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& idx = by_class[c];
        const std::size_t n = idx.size();
        if (n == 0) continue;
        if (n == 1) {
            std::cerr << "warning: class " << ds.class_names[c]
                      << " has a single example; keeping it in the training split\n";
            continue;
        }
        std::size_t n_test = static_cast<std::size_t>(
            std::llround(static_cast<double>(n) * test_fraction));
        n_test = std::max<std::size_t>(n_test, 1);

        RngState rng(RngState::derive(seed, c, 1));
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
            std::swap(idx[i], idx[j]);
        }
        for (std::size_t k = 0; k < n_test && k < n; ++k) is_test[idx[k]] = true;
    }

    Dataset tr, te;
    tr.class_names = ds.class_names;
    te.class_names = ds.class_names;
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
        (is_test[i] ? te : tr).examples.push_back(ds.examples[i]);
    }
    return {std::move(tr), std::move(te)};
}

namespace {

// Each class is a shape plus a signed RGB offset painted over the shared
// background distribution. The offset amplitude kContrast bounds how far
// apart classes sit in pixel space: examples of different classes can come
// within ~2*kContrast of each other in L-inf, so perturbations of that
// order contest the label while the clean task stays separable.
struct Template {
    const char* name;
    double r, g, b;  // color offset direction, each in [-1, 1]
    bool (*member)(double u, double v);
};

constexpr double kContrast = 0.1;
constexpr double kRingInner2 = 0.55 * 0.55;

const Template kTemplates[] = {
    {"00_octagon", 1.0, 1.0, 1.0,
     [](double u, double v) { return std::max(std::fabs(u), std::fabs(v)) <= 1.0 &&
                                     std::fabs(u) + std::fabs(v) <= 1.3; }},
    {"01_triangle", -1.0, -1.0, -1.0,
     [](double u, double v) { return v >= -1.0 && v <= 1.0 && std::fabs(u) <= 0.45 * (v + 1.0); }},
    {"02_circle", 1.0, -1.0, 0.0,
     [](double u, double v) { return u * u + v * v <= 1.0; }},
    {"03_rectangle", -1.0, 1.0, 0.0,
     [](double u, double v) { return std::fabs(u) <= 1.0 && std::fabs(v) <= 0.62; }},
    {"04_diamond", 0.0, 1.0, -1.0,
     [](double u, double v) { return std::fabs(u) + std::fabs(v) <= 1.0; }},
    {"05_triangle_down", 0.0, -1.0, 1.0,
     [](double u, double v) { return v >= -1.0 && v <= 1.0 && std::fabs(u) <= 0.45 * (1.0 - v); }},
    {"06_plus", 1.0, 0.0, -1.0,
     [](double u, double v) { return std::max(std::fabs(u), std::fabs(v)) <= 1.0 &&
                                     (std::fabs(u) <= 0.35 || std::fabs(v) <= 0.35); }},
    {"07_ring", -1.0, 0.0, 1.0,
     [](double u, double v) {
         const double d2 = u * u + v * v;
         return d2 >= kRingInner2 && d2 <= 1.0;
     }},
    {"08_hbar", 1.0, 1.0, -1.0,
     [](double u, double v) { return std::fabs(u) <= 1.0 && std::fabs(v) <= 0.32; }},
    {"09_vbar", -1.0, -1.0, 1.0,
     [](double u, double v) { return std::fabs(u) <= 0.32 && std::fabs(v) <= 1.0; }},
    {"10_hexagon", 1.0, -1.0, 1.0,
     [](double u, double v) { return std::fabs(v) <= 0.87 &&
                                     0.87 * std::fabs(u) + 0.5 * std::fabs(v) <= 0.87; }},
    {"11_star", -1.0, 1.0, -1.0,
     [](double u, double v) { return std::fabs(u) + std::fabs(v) <= 1.0 &&
                                     std::fabs(u * v) <= 0.08; }},
};

double quantize8(double v) {
    const double c = std::min(std::max(v, 0.0), 1.0);
    return static_cast<double>(std::llround(c * 255.0)) / 255.0;
}

}  // namespace

std::size_t synth_template_count() {
    return sizeof(kTemplates) / sizeof(kTemplates[0]);
}

Dataset synth_signs(std::size_t classes, std::size_t per_class, std::size_t side,
                    std::uint64_t seed) {
    if (classes < 2) throw ConfigError("synth_signs: need at least 2 classes");
    if (classes > synth_template_count())
        throw ConfigError("synth_signs: " + std::to_string(classes) +
                          " classes exceeds template catalog of " +
                          std::to_string(synth_template_count()));
    if (per_class < 1) throw ConfigError("synth_signs: per_class must be positive");
    if (side < 16) throw ConfigError("synth_signs: side must be at least 16");

    Dataset ds;
    for (std::size_t c = 0; c < classes; ++c) ds.class_names.push_back(kTemplates[c].name);

    for (std::size_t c = 0; c < classes; ++c) {
        const Template& tpl = kTemplates[c];
        for (std::size_t j = 0; j < per_class; ++j) {
            RngState rng(RngState::derive(seed, c, j));
            const double bg_r = rng.uniform(0.2, 0.8);
            const double bg_g = rng.uniform(0.2, 0.8);
            const double bg_b = rng.uniform(0.2, 0.8);
            const double brightness = rng.uniform(0.8, 1.2);
            const double jx = rng.uniform(-0.1, 0.1);
            const double jy = rng.uniform(-0.1, 0.1);

            const double cx = (0.5 + jx) * static_cast<double>(side);
            const double cy = (0.5 + jy) * static_cast<double>(side);
            const double radius = 0.34 * static_cast<double>(side);
            const double amp = kContrast * brightness;

            Image img;
            img.height = side;
            img.width = side;
            img.pixels.resize(side * side * 3);
            for (std::size_t y = 0; y < side; ++y) {
                for (std::size_t x = 0; x < side; ++x) {
                    const double u = (static_cast<double>(x) + 0.5 - cx) / radius;
                    const double v = (static_cast<double>(y) + 0.5 - cy) / radius;
                    double pr = bg_r, pg = bg_g, pb = bg_b;
                    if (tpl.member(u, v)) {
                        pr += amp * tpl.r;
                        pg += amp * tpl.g;
                        pb += amp * tpl.b;
                    }
                    img.at(y, x, 0) = quantize8(pr + rng.normal(0.0, 0.02));
                    img.at(y, x, 1) = quantize8(pg + rng.normal(0.0, 0.02));
                    img.at(y, x, 2) = quantize8(pb + rng.normal(0.0, 0.02));
                }
            }
            ds.examples.push_back({std::move(img), static_cast<int>(c)});
        }
    }
    return ds;
}

void write_dataset(const Dataset& ds, const fs::path& root) {
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

    std::vector<std::size_t> counter(ds.class_names.size(), 0);
    for (const std::string& name : ds.class_names) {
        fs::create_directories(root / name, ec);
        if (ec) throw IoError("cannot create class directory " + (root / name).string());
    }
    for (const Example& ex : ds.examples) {
        const auto label = static_cast<std::size_t>(ex.label);
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.ppm", counter[label]++);
        write_ppm_file(ex.image, root / ds.class_names[label] / name);
    }
}

}  // namespace gradsign::data
