#include "gradsign/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "gradsign/errors.hpp"

namespace gradsign::data {

Image Image::filled(std::size_t height, std::size_t width, double r, double g, double b) {
    Image img;
    img.height = height;
    img.width = width;
    img.pixels.resize(height * width * 3);
    for (std::size_t i = 0; i < height * width; ++i) {
        img.pixels[i * 3 + 0] = r;
        img.pixels[i * 3 + 1] = g;
        img.pixels[i * 3 + 2] = b;
    }
    return img;
}

namespace {

struct ByteReader {
    const std::vector<std::uint8_t>& data;
    std::size_t pos = 0;

    bool eof() const { return pos >= data.size(); }
    std::uint8_t peek() const { return data[pos]; }

    static bool is_space(std::uint8_t c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
    }

    void skip_space_and_comments() {
        while (!eof()) {
            if (is_space(peek())) {
                ++pos;
            } else if (peek() == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    std::size_t read_uint(const char* what) {
        skip_space_and_comments();
        if (eof() || peek() < '0' || peek() > '9')
            throw FormatError(std::string("ppm: expected ") + what, pos);
        std::size_t v = 0;
        while (!eof() && peek() >= '0' && peek() <= '9') {
            v = v * 10 + (peek() - '0');
            if (v > 1u << 24) throw FormatError(std::string("ppm: ") + what + " too large", pos);
            ++pos;
        }
        return v;
    }
};

}  // namespace

Image decode_ppm(const std::vector<std::uint8_t>& bytes) {
    ByteReader r{bytes};
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
        throw FormatError("ppm: bad magic, expected P6", 0);
    r.pos = 2;

    const std::size_t width = r.read_uint("width");
    const std::size_t height = r.read_uint("height");
    const std::size_t maxval_pos = r.pos;
    const std::size_t maxval = r.read_uint("maxval");
    if (maxval != 255) throw FormatError("ppm: unsupported maxval " + std::to_string(maxval), maxval_pos);
    if (r.eof() || !ByteReader::is_space(r.peek()))
        throw FormatError("ppm: expected whitespace after maxval", r.pos);
    ++r.pos;  // exactly one whitespace byte before the raster

    if (width == 0 || height == 0) throw FormatError("ppm: zero dimension", r.pos);
    const std::size_t need = width * height * 3;
    if (bytes.size() - r.pos < need)
        throw FormatError("ppm: pixel payload truncated, need " + std::to_string(need) +
                              " bytes, have " + std::to_string(bytes.size() - r.pos),
                          bytes.size());

    Image img;
    img.height = height;
    img.width = width;
    img.pixels.resize(need);
    for (std::size_t i = 0; i < need; ++i) {
        img.pixels[i] = static_cast<double>(bytes[r.pos + i]) / 255.0;
    }
    return img;
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
    char header[64];
    const int n = std::snprintf(header, sizeof(header), "P6\n%zu %zu\n255\n", img.width, img.height);
    std::vector<std::uint8_t> out(header, header + n);
    out.reserve(out.size() + img.pixels.size());
    for (double p : img.pixels) {
        const double c = std::min(std::max(p, 0.0), 1.0);
        out.push_back(static_cast<std::uint8_t>(std::llround(c * 255.0)));
    }
    return out;
}

Image read_ppm_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_ppm(bytes);
}

void write_ppm_file(const Image& img, const std::filesystem::path& path) {
    const auto bytes = encode_ppm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

Image resize_bilinear(const Image& img, std::size_t side) {
    if (side == 0) throw ValueError("resize: target side must be positive");
    if (img.height == side && img.width == side) return img;

    Image out;
    out.height = side;
    out.width = side;
    out.pixels.resize(side * side * 3);

    const double sy_scale = static_cast<double>(img.height) / static_cast<double>(side);
    const double sx_scale = static_cast<double>(img.width) / static_cast<double>(side);
    const auto clampi = [](std::ptrdiff_t v, std::ptrdiff_t hi) {
        return std::min(std::max<std::ptrdiff_t>(v, 0), hi);
    };

    for (std::size_t dy = 0; dy < side; ++dy) {
        const double sy = (static_cast<double>(dy) + 0.5) * sy_scale - 0.5;
        const double fy = sy - std::floor(sy);
        const std::ptrdiff_t y0 = clampi(static_cast<std::ptrdiff_t>(std::floor(sy)),
                                         static_cast<std::ptrdiff_t>(img.height) - 1);
        const std::ptrdiff_t y1 = clampi(static_cast<std::ptrdiff_t>(std::floor(sy)) + 1,
                                         static_cast<std::ptrdiff_t>(img.height) - 1);
        for (std::size_t dx = 0; dx < side; ++dx) {
            const double sx = (static_cast<double>(dx) + 0.5) * sx_scale - 0.5;
            const double fx = sx - std::floor(sx);
            const std::ptrdiff_t x0 = clampi(static_cast<std::ptrdiff_t>(std::floor(sx)),
                                             static_cast<std::ptrdiff_t>(img.width) - 1);
            const std::ptrdiff_t x1 = clampi(static_cast<std::ptrdiff_t>(std::floor(sx)) + 1,
                                             static_cast<std::ptrdiff_t>(img.width) - 1);
            for (std::size_t c = 0; c < 3; ++c) {
                const double top = (1.0 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c);
                const double bot = (1.0 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c);
                const double v = (1.0 - fy) * top + fy * bot;
                out.at(dy, dx, c) = std::min(std::max(v, 0.0), 1.0);
            }
        }
    }
    return out;
}

Tensor normalize(const Image& img) {
    Tensor t = Tensor::zeros({3, img.height, img.width});
    const std::size_t plane = img.height * img.width;
    for (std::size_t i = 0; i < plane; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            t.values[c * plane + i] = (img.pixels[i * 3 + c] - 0.5) / 0.5;
        }
    }
    return t;
}

Image denormalize(const Tensor& t) {
    if (t.shape.size() != 3 || t.shape[0] != 3)
        throw ShapeError("denormalize: expected 3xHxW tensor, got " + shape_to_string(t.shape));
    Image img;
    img.height = t.shape[1];
    img.width = t.shape[2];
    img.pixels.resize(img.height * img.width * 3);
    const std::size_t plane = img.height * img.width;
    for (std::size_t i = 0; i < plane; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            const double v = t.values[c * plane + i];
            if (v < -1.0 || v > 1.0 || std::isnan(v))
                throw ValueError("denormalize: value " + std::to_string(v) +
                                 " outside [-1, 1]");
            img.pixels[i * 3 + c] = v * 0.5 + 0.5;
        }
    }
    return img;
}

}  // namespace gradsign::data
