#include "gradsign/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gradsign/errors.hpp"

namespace gradsign {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape) +
                         " vs " + shape_to_string(b.shape));
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> values_)
    : shape(std::move(shape_)), values(std::move(values_)) {
    if (shape_product(shape) != values.size()) {
        throw ShapeError("tensor: " + std::to_string(values.size()) +
                         " values do not fill shape " + shape_to_string(shape));
    }
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("tensor: zero dimension in shape " + shape_to_string(shape));
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    return full(std::move(shape), 0.0);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    std::size_t n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor sign(const Tensor& t) {
    Tensor out = t;
    for (double& v : out.values) {
        v = (v > 0.0) ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    return out;
}

Tensor clamp(const Tensor& t, double lo, double hi) {
    if (lo > hi) {
        throw ValueError("clamp: lo " + std::to_string(lo) + " > hi " + std::to_string(hi));
    }
    Tensor out = t;
    for (double& v : out.values) {
        v = std::min(std::max(v, lo), hi);
    }
    return out;
}

double linf_distance(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "linf_distance");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        m = std::max(m, std::fabs(a.values[i] - b.values[i]));
    }
    return m;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
    return out;
}

Tensor scale(const Tensor& t, double factor) {
    Tensor out = t;
    for (double& v : out.values) v *= factor;
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape.size() != 2 || b.shape.size() != 2) {
        throw ShapeError("matmul: expects rank-2 operands, got " + shape_to_string(a.shape) +
                         " and " + shape_to_string(b.shape));
    }
    if (a.shape[1] != b.shape[0]) {
        throw ShapeError("matmul: inner dimensions differ, " + shape_to_string(a.shape) +
                         " vs " + shape_to_string(b.shape));
    }
    const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
    Tensor out = Tensor::zeros({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a.values[i * k + p];
            for (std::size_t j = 0; j < n; ++j) {
                out.values[i * n + j] += av * b.values[p * n + j];
            }
        }
    }
    return out;
}

Tensor uniform_tensor(RngState& rng, std::vector<std::size_t> shape, double lo, double hi) {
    std::size_t n = shape_product(shape);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return Tensor(std::move(shape), std::move(v));
}

Tensor normal_tensor(RngState& rng, std::vector<std::size_t> shape, double mean, double stddev) {
    std::size_t n = shape_product(shape);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal(mean, stddev);
    return Tensor(std::move(shape), std::move(v));
}

}  // namespace gradsign
