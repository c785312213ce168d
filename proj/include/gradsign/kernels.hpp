#pragma once

#include <cstddef>
#include <cstdint>

// Low-level layer kernels on raw row-major buffers. The functions in
// gradsign::kernels are the production implementations (OpenMP parallel
// loops); gradsign::kernels::ref holds a plainly-written serial reference
// with identical semantics, kept for testing and benchmarking.
//
// Both families accumulate each output element in the same pinned order, so
// results are bitwise identical between the two and across thread counts:
//   conv2d_forward / conv2d_backward_input : (in/out channel, kh, kw) ascending
//   conv2d_backward_params                 : (oh, ow) ascending
//   dense kernels                          : input/output index ascending
// Convolutions are 3x3 cross-correlations, stride 1, zero padding 1.
// Max-pooling is 2x2, stride 2; ties resolve to the first element in
// row-major order.

namespace gradsign::kernels {

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    std::size_t in_c, std::size_t out_c, std::size_t h, std::size_t wd);

void conv2d_backward_input(const double* dy, const double* w, double* dx,
                           std::size_t in_c, std::size_t out_c, std::size_t h, std::size_t wd);

void conv2d_backward_params(const double* dy, const double* x, double* dw, double* db,
                            std::size_t in_c, std::size_t out_c, std::size_t h, std::size_t wd);

void dense_forward(const double* x, const double* w, const double* b, double* y,
                   std::size_t in_w, std::size_t out_w);

void dense_backward_input(const double* dy, const double* w, double* dx,
                          std::size_t in_w, std::size_t out_w);

void dense_backward_params(const double* dy, const double* x, double* dw, double* db,
                           std::size_t in_w, std::size_t out_w);

void relu_forward(const double* x, double* y, std::size_t n);

// x is the pre-activation input that was fed to relu_forward.
void relu_backward(const double* x, const double* dy, double* dx, std::size_t n);

// h and wd are input dimensions (must be even); outputs are h/2 x wd/2.
// argmax records, per output element, the flat input index that won.
void maxpool2x2_forward(const double* x, double* y, std::uint32_t* argmax,
                        std::size_t c, std::size_t h, std::size_t wd);

void maxpool2x2_backward(const double* dy, const std::uint32_t* argmax, double* dx,
                         std::size_t c, std::size_t h, std::size_t wd);

namespace ref {

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    std::size_t in_c, std::size_t out_c, std::size_t h, std::size_t wd);

void conv2d_backward_input(const double* dy, const double* w, double* dx,
                           std::size_t in_c, std::size_t out_c, std::size_t h, std::size_t wd);

void conv2d_backward_params(const double* dy, const double* x, double* dw, double* db,
                            std::size_t in_c, std::size_t out_c, std::size_t h, std::size_t wd);

void dense_forward(const double* x, const double* w, const double* b, double* y,
                   std::size_t in_w, std::size_t out_w);

void dense_backward_input(const double* dy, const double* w, double* dx,
                          std::size_t in_w, std::size_t out_w);

void dense_backward_params(const double* dy, const double* x, double* dw, double* db,
                           std::size_t in_w, std::size_t out_w);

void relu_forward(const double* x, double* y, std::size_t n);

void relu_backward(const double* x, const double* dy, double* dx, std::size_t n);

void maxpool2x2_forward(const double* x, double* y, std::uint32_t* argmax,
                        std::size_t c, std::size_t h, std::size_t wd);

void maxpool2x2_backward(const double* dy, const std::uint32_t* argmax, double* dx,
                         std::size_t c, std::size_t h, std::size_t wd);

}  // namespace ref

}  // namespace gradsign::kernels
