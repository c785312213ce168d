#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gradsign/image.hpp"

namespace gradsign::data {

struct Example {
    Image image;
    int label = 0;
};

struct Dataset {
    std::vector<Example> examples;
    std::vector<std::string> class_names;

    std::size_t size() const noexcept { return examples.size(); }
    bool empty() const noexcept { return examples.empty(); }
};

// Ingests a <root>/<class_name>/<image files> tree. Class ids follow the
// byte-lexicographic order of the class directory names; files within a
// class are visited in byte-lexicographic order. Every image is resized to
// target_side x target_side. Empty class directories warn on stderr but are
// retained in class_names.
Dataset load_directory(const std::filesystem::path& root, std::size_t target_side);

// Per class with n examples, the test side receives round(n * test_fraction)
// examples (at least 1 when n >= 2), chosen by a seeded in-class shuffle.
// A singleton class goes entirely to train with a warning.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

// Number of distinct shape templates synth_signs can draw.
std::size_t synth_template_count();

// Synthetic sign-like dataset: one colored geometric template per class on a
// seeded random background, with translation jitter (+-10% of side),
// brightness jitter (+-20%) and additive noise (sigma 0.02). Pixels are
// quantized to the 8-bit grid so writing to PPM and reloading round-trips
// exactly. Deterministic in the seed.
Dataset synth_signs(std::size_t classes, std::size_t per_class, std::size_t side,
                    std::uint64_t seed);

// Materializes a dataset to the class-per-directory layout (PPM files).
void write_dataset(const Dataset& ds, const std::filesystem::path& root);

}  // namespace gradsign::data
