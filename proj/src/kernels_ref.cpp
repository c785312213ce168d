// Serial reference kernels: textbook per-output-element loops, no threading.
// Kept as the comparison baseline for tests and the kernel benchmark. Each
// element accumulates in the same pinned order as the parallel kernels
// (see kernels.hpp), so outputs must match them bit for bit.

#include "gradsign/kernels.hpp"

namespace gradsign::kernels::ref {

namespace {

using idx = std::ptrdiff_t;

inline idx widx(idx oc, idx ic, idx kh, idx kw, idx in_c) {
    return ((oc * in_c + ic) * 3 + kh) * 3 + kw;
}

}  // namespace

void conv2d_forward(const double* x, const double* w, const double* b, double* y,
                    std::size_t in_c_, std::size_t out_c_, std::size_t h_, std::size_t wd_) {
    const idx in_c = static_cast<idx>(in_c_), out_c = static_cast<idx>(out_c_);
    const idx h = static_cast<idx>(h_), wd = static_cast<idx>(wd_);
    for (idx oc = 0; oc < out_c; ++oc) {
        for (idx oh = 0; oh < h; ++oh) {
            for (idx ow = 0; ow < wd; ++ow) {
                double acc = b[oc];
                for (idx ic = 0; ic < in_c; ++ic) {
                    for (idx kh = 0; kh < 3; ++kh) {
                        for (idx kw = 0; kw < 3; ++kw) {
                            const idx ih = oh + kh - 1;
                            const idx iw = ow + kw - 1;
                            if (ih < 0 || ih >= h || iw < 0 || iw >= wd) continue;
                            acc += w[widx(oc, ic, kh, kw, in_c)] * x[(ic * h + ih) * wd + iw];
                        }
                    }
                }
                y[(oc * h + oh) * wd + ow] = acc;
            }
        }
    }
}

void conv2d_backward_input(const double* dy, const double* w, double* dx,
                           std::size_t in_c_, std::size_t out_c_, std::size_t h_, std::size_t wd_) {
    const idx in_c = static_cast<idx>(in_c_), out_c = static_cast<idx>(out_c_);
    const idx h = static_cast<idx>(h_), wd = static_cast<idx>(wd_);
    for (idx ic = 0; ic < in_c; ++ic) {
        for (idx ih = 0; ih < h; ++ih) {
            for (idx iw = 0; iw < wd; ++iw) {
                double acc = 0.0;
                for (idx oc = 0; oc < out_c; ++oc) {
                    for (idx kh = 0; kh < 3; ++kh) {
                        for (idx kw = 0; kw < 3; ++kw) {
                            const idx oh = ih + 1 - kh;
                            const idx ow = iw + 1 - kw;
                            if (oh < 0 || oh >= h || ow < 0 || ow >= wd) continue;
                            acc += w[widx(oc, ic, kh, kw, in_c)] * dy[(oc * h + oh) * wd + ow];
                        }
                    }
                }
                dx[(ic * h + ih) * wd + iw] = acc;
            }
        }
    }
}

void conv2d_backward_params(const double* dy, const double* x, double* dw, double* db,
                            std::size_t in_c_, std::size_t out_c_, std::size_t h_, std::size_t wd_) {
    const idx in_c = static_cast<idx>(in_c_), out_c = static_cast<idx>(out_c_);
    const idx h = static_cast<idx>(h_), wd = static_cast<idx>(wd_);
    for (idx oc = 0; oc < out_c; ++oc) {
        for (idx ic = 0; ic < in_c; ++ic) {
            for (idx kh = 0; kh < 3; ++kh) {
                for (idx kw = 0; kw < 3; ++kw) {
                    double acc = 0.0;
                    for (idx oh = 0; oh < h; ++oh) {
                        for (idx ow = 0; ow < wd; ++ow) {
                            const idx ih = oh + kh - 1;
                            const idx iw = ow + kw - 1;
                            if (ih < 0 || ih >= h || iw < 0 || iw >= wd) continue;
                            acc += dy[(oc * h + oh) * wd + ow] * x[(ic * h + ih) * wd + iw];
                        }
                    }
                    dw[widx(oc, ic, kh, kw, in_c)] = acc;
                }
            }
        }
        double bacc = 0.0;
        for (idx i = 0; i < h * wd; ++i) bacc += dy[oc * h * wd + i];
        db[oc] = bacc;
    }
}

void dense_forward(const double* x, const double* w, const double* b, double* y,
                   std::size_t in_w_, std::size_t out_w_) {
    const idx in_w = static_cast<idx>(in_w_), out_w = static_cast<idx>(out_w_);
    for (idx o = 0; o < out_w; ++o) {
        double acc = b[o];
        for (idx i = 0; i < in_w; ++i) acc += w[o * in_w + i] * x[i];
        y[o] = acc;
    }
}

void dense_backward_input(const double* dy, const double* w, double* dx,
                          std::size_t in_w_, std::size_t out_w_) {
    const idx in_w = static_cast<idx>(in_w_), out_w = static_cast<idx>(out_w_);
    for (idx i = 0; i < in_w; ++i) {
        double acc = 0.0;
        for (idx o = 0; o < out_w; ++o) acc += dy[o] * w[o * in_w + i];
        dx[i] = acc;
    }
}

void dense_backward_params(const double* dy, const double* x, double* dw, double* db,
                           std::size_t in_w_, std::size_t out_w_) {
    const idx in_w = static_cast<idx>(in_w_), out_w = static_cast<idx>(out_w_);
    for (idx o = 0; o < out_w; ++o) {
        for (idx i = 0; i < in_w; ++i) dw[o * in_w + i] = dy[o] * x[i];
        db[o] = dy[o];
    }
}

void relu_forward(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* x, const double* dy, double* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void maxpool2x2_forward(const double* x, double* y, std::uint32_t* argmax,
                        std::size_t c_, std::size_t h_, std::size_t wd_) {
    const idx c = static_cast<idx>(c_), h = static_cast<idx>(h_), wd = static_cast<idx>(wd_);
    const idx oh = h / 2, ow = wd / 2;
    for (idx ch = 0; ch < c; ++ch) {
        for (idx r = 0; r < oh; ++r) {
            for (idx col = 0; col < ow; ++col) {
                double bv = -1.0;
                idx best = -1;
                for (idx dr = 0; dr < 2; ++dr) {
                    for (idx dc = 0; dc < 2; ++dc) {
                        const idx flat = (ch * h + 2 * r + dr) * wd + 2 * col + dc;
                        if (best < 0 || x[flat] > bv) {
                            bv = x[flat];
                            best = flat;
                        }
                    }
                }
                y[(ch * oh + r) * ow + col] = bv;
                argmax[(ch * oh + r) * ow + col] = static_cast<std::uint32_t>(best);
            }
        }
    }
}

void maxpool2x2_backward(const double* dy, const std::uint32_t* argmax, double* dx,
                         std::size_t c_, std::size_t h_, std::size_t wd_) {
    const idx c = static_cast<idx>(c_), h = static_cast<idx>(h_), wd = static_cast<idx>(wd_);
    const idx oh = h / 2, ow = wd / 2;
    for (idx i = 0; i < c * h * wd; ++i) dx[i] = 0.0;
    for (idx ch = 0; ch < c; ++ch) {
        for (idx r = 0; r < oh; ++r) {
            for (idx col = 0; col < ow; ++col) {
                const idx out = (ch * oh + r) * ow + col;
                dx[argmax[out]] = dy[out];
            }
        }
    }
}

}  // namespace gradsign::kernels::ref
