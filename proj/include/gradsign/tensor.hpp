#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gradsign/rng.hpp"

namespace gradsign {

// Dense n-dimensional array of doubles, row-major flat storage. No views or
// strides; every operation returns a fresh value.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shape_, std::vector<double> values_);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double value);

    std::size_t size() const noexcept { return values.size(); }
    double* data() noexcept { return values.data(); }
    const double* data() const noexcept { return values.data(); }

    bool same_shape(const Tensor& other) const noexcept { return shape == other.shape; }
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

// Elementwise: -1 / 0 / +1 by strict sign.
Tensor sign(const Tensor& t);

// Elementwise clip to [lo, hi]; lo > hi is a ValueError.
Tensor clamp(const Tensor& t, double lo, double hi);

// max_i |a_i - b_i|; shapes must match.
double linf_distance(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& t, double factor);

// Rank-2 only: (m x k) * (k x n) -> (m x n).
Tensor matmul(const Tensor& a, const Tensor& b);

// Seeded sampling; consumes the stream in row-major element order.
Tensor uniform_tensor(RngState& rng, std::vector<std::size_t> shape, double lo, double hi);
Tensor normal_tensor(RngState& rng, std::vector<std::size_t> shape, double mean, double stddev);

}  // namespace gradsign
