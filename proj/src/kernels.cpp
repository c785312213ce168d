#include "gradsign/kernels.hpp"

#include <algorithm>

namespace gradsign::kernels {

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
    const idx plane = h * wd;
    const bool par = out_c * plane * in_c * 9 > 32768;

#pragma omp parallel for schedule(static) if (par)
    for (idx oc = 0; oc < out_c; ++oc) {
        double* yp = y + oc * plane;
        std::fill(yp, yp + plane, b[oc]);
        for (idx ic = 0; ic < in_c; ++ic) {
            const double* xp = x + ic * plane;
            for (idx kh = 0; kh < 3; ++kh) {
                for (idx kw = 0; kw < 3; ++kw) {
                    const double wv = w[widx(oc, ic, kh, kw, in_c)];
                    const idx oh0 = std::max<idx>(0, 1 - kh);
                    const idx oh1 = std::min<idx>(h, h + 1 - kh);
                    const idx ow0 = std::max<idx>(0, 1 - kw);
                    const idx ow1 = std::min<idx>(wd, wd + 1 - kw);
                    for (idx oh = oh0; oh < oh1; ++oh) {
                        double* yrow = yp + oh * wd;
                        const double* xrow = xp + (oh + kh - 1) * wd + (kw - 1);
                        for (idx ow = ow0; ow < ow1; ++ow) {
                            yrow[ow] += wv * xrow[ow];
                        }
                    }
                }
            }
        }
    }
}

void conv2d_backward_input(const double* dy, const double* w, double* dx,
                           std::size_t in_c_, std::size_t out_c_, std::size_t h_, std::size_t wd_) {
    const idx in_c = static_cast<idx>(in_c_), out_c = static_cast<idx>(out_c_);
    const idx h = static_cast<idx>(h_), wd = static_cast<idx>(wd_);
    const idx plane = h * wd;
    const bool par = out_c * plane * in_c * 9 > 32768;

#pragma omp parallel for schedule(static) if (par)
    for (idx ic = 0; ic < in_c; ++ic) {
        double* dxp = dx + ic * plane;
        std::fill(dxp, dxp + plane, 0.0);
        for (idx oc = 0; oc < out_c; ++oc) {
            const double* dyp = dy + oc * plane;
            for (idx kh = 0; kh < 3; ++kh) {
                for (idx kw = 0; kw < 3; ++kw) {
                    const double wv = w[widx(oc, ic, kh, kw, in_c)];
                    // valid output rows/cols for this tap: oh = ih + 1 - kh
                    const idx ih0 = std::max<idx>(0, kh - 1);
                    const idx ih1 = std::min<idx>(h, h + kh - 1);
                    const idx iw0 = std::max<idx>(0, kw - 1);
                    const idx iw1 = std::min<idx>(wd, wd + kw - 1);
                    for (idx ih = ih0; ih < ih1; ++ih) {
                        double* dxrow = dxp + ih * wd;
                        const double* dyrow = dyp + (ih + 1 - kh) * wd + (1 - kw);
                        for (idx iw = iw0; iw < iw1; ++iw) {
                            dxrow[iw] += wv * dyrow[iw];
                        }
                    }
                }
            }
        }
    }
}

void conv2d_backward_params(const double* dy, const double* x, double* dw, double* db,
                            std::size_t in_c_, std::size_t out_c_, std::size_t h_, std::size_t wd_) {
    const idx in_c = static_cast<idx>(in_c_), out_c = static_cast<idx>(out_c_);
    const idx h = static_cast<idx>(h_), wd = static_cast<idx>(wd_);
    const idx plane = h * wd;
    const bool par = out_c * plane * in_c * 9 > 32768;

#pragma omp parallel for schedule(static) if (par)
    for (idx oc = 0; oc < out_c; ++oc) {
        const double* dyp = dy + oc * plane;
        for (idx ic = 0; ic < in_c; ++ic) {
            const double* xp = x + ic * plane;
            for (idx kh = 0; kh < 3; ++kh) {
                for (idx kw = 0; kw < 3; ++kw) {
                    const idx oh0 = std::max<idx>(0, 1 - kh);
                    const idx oh1 = std::min<idx>(h, h + 1 - kh);
                    const idx ow0 = std::max<idx>(0, 1 - kw);
                    const idx ow1 = std::min<idx>(wd, wd + 1 - kw);
                    double acc = 0.0;
                    for (idx oh = oh0; oh < oh1; ++oh) {
                        const double* dyrow = dyp + oh * wd;
                        const double* xrow = xp + (oh + kh - 1) * wd + (kw - 1);
                        for (idx ow = ow0; ow < ow1; ++ow) {
                            acc += dyrow[ow] * xrow[ow];
                        }
                    }
                    dw[widx(oc, ic, kh, kw, in_c)] = acc;
                }
            }
        }
        double bacc = 0.0;
        for (idx i = 0; i < plane; ++i) bacc += dyp[i];
        db[oc] = bacc;
    }
}

void dense_forward(const double* x, const double* w, const double* b, double* y,
                   std::size_t in_w_, std::size_t out_w_) {
    const idx in_w = static_cast<idx>(in_w_), out_w = static_cast<idx>(out_w_);
    const bool par = in_w * out_w > 32768;

#pragma omp parallel for schedule(static) if (par)
    for (idx o = 0; o < out_w; ++o) {
        const double* wrow = w + o * in_w;
        double acc = b[o];
        for (idx i = 0; i < in_w; ++i) acc += wrow[i] * x[i];
        y[o] = acc;
    }
}

void dense_backward_input(const double* dy, const double* w, double* dx,
                          std::size_t in_w_, std::size_t out_w_) {
    const idx in_w = static_cast<idx>(in_w_), out_w = static_cast<idx>(out_w_);
    // Blocked over the input range so each thread owns a contiguous slice of
    // dx and walks w row-major; per-element accumulation order stays o-ascending.
    const idx nblocks = std::min<idx>(in_w, 64);
    const idx block = (in_w + nblocks - 1) / nblocks;
    const bool par = in_w * out_w > 32768;

#pragma omp parallel for schedule(static) if (par)
    for (idx blk = 0; blk < nblocks; ++blk) {
        const idx i0 = blk * block;
        const idx i1 = std::min(in_w, i0 + block);
        if (i0 >= i1) continue;
        std::fill(dx + i0, dx + i1, 0.0);
        for (idx o = 0; o < out_w; ++o) {
            const double* wrow = w + o * in_w;
            const double dv = dy[o];
            for (idx i = i0; i < i1; ++i) dx[i] += dv * wrow[i];
        }
    }
}

void dense_backward_params(const double* dy, const double* x, double* dw, double* db,
                           std::size_t in_w_, std::size_t out_w_) {
    const idx in_w = static_cast<idx>(in_w_), out_w = static_cast<idx>(out_w_);
    const bool par = in_w * out_w > 32768;

#pragma omp parallel for schedule(static) if (par)
    for (idx o = 0; o < out_w; ++o) {
        double* dwrow = dw + o * in_w;
        const double dv = dy[o];
        for (idx i = 0; i < in_w; ++i) dwrow[i] = dv * x[i];
        db[o] = dv;
    }
}

void relu_forward(const double* x, double* y, std::size_t n_) {
    const idx n = static_cast<idx>(n_);
#pragma omp parallel for schedule(static) if (n > 65536)
    for (idx i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* x, const double* dy, double* dx, std::size_t n_) {
    const idx n = static_cast<idx>(n_);
#pragma omp parallel for schedule(static) if (n > 65536)
    for (idx i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void maxpool2x2_forward(const double* x, double* y, std::uint32_t* argmax,
                        std::size_t c_, std::size_t h_, std::size_t wd_) {
    const idx c = static_cast<idx>(c_), h = static_cast<idx>(h_), wd = static_cast<idx>(wd_);
    const idx oh = h / 2, ow = wd / 2;
    const bool par = c * h * wd > 65536;

#pragma omp parallel for schedule(static) if (par)
    for (idx ch = 0; ch < c; ++ch) {
        const double* xp = x + ch * h * wd;
        double* yp = y + ch * oh * ow;
        std::uint32_t* ap = argmax + ch * oh * ow;
        for (idx r = 0; r < oh; ++r) {
            for (idx col = 0; col < ow; ++col) {
                const idx base = (2 * r) * wd + 2 * col;
                idx best = base;
                double bv = xp[base];
                const idx cand[3] = {base + 1, base + wd, base + wd + 1};
                for (idx k = 0; k < 3; ++k) {
                    if (xp[cand[k]] > bv) {
                        bv = xp[cand[k]];
                        best = cand[k];
                    }
                }
                yp[r * ow + col] = bv;
                ap[r * ow + col] = static_cast<std::uint32_t>(ch * h * wd + best);
            }
        }
    }
}

void maxpool2x2_backward(const double* dy, const std::uint32_t* argmax, double* dx,
                         std::size_t c_, std::size_t h_, std::size_t wd_) {
    const idx c = static_cast<idx>(c_), h = static_cast<idx>(h_), wd = static_cast<idx>(wd_);
    const idx oh = h / 2, ow = wd / 2;
    const bool par = c * h * wd > 65536;

    // 2x2 stride-2 windows are disjoint, so each input cell belongs to exactly
    // one output; gather per input cell.
#pragma omp parallel for schedule(static) if (par)
    for (idx ch = 0; ch < c; ++ch) {
        double* dxp = dx + ch * h * wd;
        const double* dyp = dy + ch * oh * ow;
        const std::uint32_t* ap = argmax + ch * oh * ow;
        for (idx r = 0; r < h; ++r) {
            for (idx col = 0; col < wd; ++col) {
                const idx flat = ch * h * wd + r * wd + col;
                const idx out = (r / 2) * ow + (col / 2);
                dxp[r * wd + col] =
                    (ap[out] == static_cast<std::uint32_t>(flat)) ? dyp[out] : 0.0;
            }
        }
    }
}

}  // namespace gradsign::kernels
