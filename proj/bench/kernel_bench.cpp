// Compares the OpenMP kernels against the serial reference: wall time,
// speedup, and a bitwise equality check on every output buffer.
//
//   kernel_bench [side] [reps]    (defaults: side 64, reps 5)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "gradsign/kernels.hpp"
#include "gradsign/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using gradsign::RngState;
namespace k = gradsign::kernels;

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

std::vector<double> random_buf(RngState& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct Timing {
    double serial_ms;
    double parallel_ms;
    bool equal;
};

void report(const char* name, const Timing& t) {
    std::printf("%-24s serial %8.2f ms   openmp %8.2f ms   speedup %5.2fx   %s\n", name,
                t.serial_ms, t.parallel_ms, t.serial_ms / t.parallel_ms,
                t.equal ? "bitwise-equal" : "MISMATCH");
}

template <typename Serial, typename Parallel>
Timing time_pair(std::size_t reps, std::vector<double>& out_serial,
                 std::vector<double>& out_parallel, Serial serial, Parallel parallel) {
    Timing t{};
    double t0 = now_ms();
    for (std::size_t r = 0; r < reps; ++r) serial(out_serial.data());
    t.serial_ms = (now_ms() - t0) / static_cast<double>(reps);
    t0 = now_ms();
    for (std::size_t r = 0; r < reps; ++r) parallel(out_parallel.data());
    t.parallel_ms = (now_ms() - t0) / static_cast<double>(reps);
    t.equal = bitwise_equal(out_serial, out_parallel);
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t side = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 64;
    const std::size_t reps = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 5;
    const std::size_t in_c = 32, out_c = 64;

#ifdef _OPENMP
    std::printf("side %zu, %zu->%zu channels, %zu reps, %d threads\n\n", side, in_c, out_c, reps,
                omp_get_max_threads());
#else
    std::printf("side %zu, %zu->%zu channels, %zu reps, OpenMP disabled\n\n", side, in_c, out_c,
                reps);
#endif

    RngState rng(1234);
    const auto x = random_buf(rng, in_c * side * side);
    const auto w = random_buf(rng, out_c * in_c * 9);
    const auto b = random_buf(rng, out_c);
    const auto dy = random_buf(rng, out_c * side * side);

    bool all_equal = true;

    {
        std::vector<double> ys(out_c * side * side), yp(ys.size());
        auto t = time_pair(
            reps, ys, yp,
            [&](double* out) { k::ref::conv2d_forward(x.data(), w.data(), b.data(), out, in_c, out_c, side, side); },
            [&](double* out) { k::conv2d_forward(x.data(), w.data(), b.data(), out, in_c, out_c, side, side); });
        report("conv2d_forward", t);
        all_equal &= t.equal;
    }
    {
        std::vector<double> ds(in_c * side * side), dp(ds.size());
        auto t = time_pair(
            reps, ds, dp,
            [&](double* out) { k::ref::conv2d_backward_input(dy.data(), w.data(), out, in_c, out_c, side, side); },
            [&](double* out) { k::conv2d_backward_input(dy.data(), w.data(), out, in_c, out_c, side, side); });
        report("conv2d_backward_input", t);
        all_equal &= t.equal;
    }
    {
        std::vector<double> dws(out_c * in_c * 9), dwp(dws.size());
        std::vector<double> dbs(out_c), dbp(out_c);
        auto t = time_pair(
            reps, dws, dwp,
            [&](double* out) { k::ref::conv2d_backward_params(dy.data(), x.data(), out, dbs.data(), in_c, out_c, side, side); },
            [&](double* out) { k::conv2d_backward_params(dy.data(), x.data(), out, dbp.data(), in_c, out_c, side, side); });
        t.equal = t.equal && bitwise_equal(dbs, dbp);
        report("conv2d_backward_params", t);
        all_equal &= t.equal;
    }

    const std::size_t in_w = 8192, out_w = 256;
    const auto xv = random_buf(rng, in_w);
    const auto wv = random_buf(rng, out_w * in_w);
    const auto bv = random_buf(rng, out_w);
    const auto dyv = random_buf(rng, out_w);
    {
        std::vector<double> ys(out_w), yp(out_w);
        auto t = time_pair(
            reps, ys, yp,
            [&](double* out) { k::ref::dense_forward(xv.data(), wv.data(), bv.data(), out, in_w, out_w); },
            [&](double* out) { k::dense_forward(xv.data(), wv.data(), bv.data(), out, in_w, out_w); });
        report("dense_forward", t);
        all_equal &= t.equal;
    }
    {
        std::vector<double> ds(in_w), dp(in_w);
        auto t = time_pair(
            reps, ds, dp,
            [&](double* out) { k::ref::dense_backward_input(dyv.data(), wv.data(), out, in_w, out_w); },
            [&](double* out) { k::dense_backward_input(dyv.data(), wv.data(), out, in_w, out_w); });
        report("dense_backward_input", t);
        all_equal &= t.equal;
    }

    std::printf("\n%s\n", all_equal ? "all kernels bitwise-equal" : "BITWISE MISMATCH DETECTED");
    return all_equal ? 0 : 1;
}
