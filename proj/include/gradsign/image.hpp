#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gradsign/tensor.hpp"

namespace gradsign::data {

// RGB image, channel-interleaved row-major, values in [0, 1].
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels;  // height * width * 3

    static Image filled(std::size_t height, std::size_t width, double r, double g, double b);

    double& at(std::size_t y, std::size_t x, std::size_t c) {
        return pixels[(y * width + x) * 3 + c];
    }
    double at(std::size_t y, std::size_t x, std::size_t c) const {
        return pixels[(y * width + x) * 3 + c];
    }
};

// Binary PPM (P6), maxval 255. decode accepts whitespace and '#' comments in
// the header; encode emits the canonical "P6\n<w> <h>\n255\n" form, so
// encode(decode(bytes)) == bytes for canonically formatted input.
Image decode_ppm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_ppm(const Image& img);

Image read_ppm_file(const std::filesystem::path& path);
void write_ppm_file(const Image& img, const std::filesystem::path& path);

// Bilinear resize to side x side, half-pixel-center convention with edge
// clamping. Identity (pixels untouched) when the image is already that size.
Image resize_bilinear(const Image& img, std::size_t side);

// (p - 0.5) / 0.5 per channel, producing a planar 3xHxW tensor in [-1, 1].
Tensor normalize(const Image& img);

// Exact inverse of normalize; input values must lie in [-1, 1].
Image denormalize(const Tensor& t);

}  // namespace gradsign::data
