#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gradsign/errors.hpp"
#include "gradsign/tensor.hpp"
#include "test_helpers.hpp"

using namespace gradsign;
using testutil::bitwise_equal;
using testutil::random_tensor;

TEST_CASE("sign maps strict sign to -1/0/+1") {
    Tensor t({3}, {-0.5, 0.0, 2.0});
    Tensor s = sign(t);
    CHECK(s.values == std::vector<double>{-1.0, 0.0, 1.0});

    Tensor z = Tensor::zeros({2, 3});
    CHECK(sign(z).values == std::vector<double>(6, 0.0));
}

TEST_CASE("sign is idempotent and stays in {-1,0,1}") {
    RngState rng(7);
    for (int it = 0; it < 50; ++it) {
        Tensor t = random_tensor(rng, {4, 5}, -10.0, 10.0);
        if (it % 3 == 0) t.values[0] = 0.0;
        Tensor s = sign(t);
        CHECK(s.shape == t.shape);
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK((s.values[i] == -1.0 || s.values[i] == 0.0 || s.values[i] == 1.0));
            const double expect = t.values[i] > 0 ? 1.0 : (t.values[i] < 0 ? -1.0 : 0.0);
            CHECK(s.values[i] == expect);
        }
        CHECK(bitwise_equal(sign(s), s));
    }
}

TEST_CASE("clamp basics") {
    Tensor t({3}, {-2.0, 0.0, 2.0});
    CHECK(clamp(t, -1.0, 1.0).values == std::vector<double>{-1.0, 0.0, 1.0});
    // bounds spanning all values: identity
    CHECK(bitwise_equal(clamp(t, -100.0, 100.0), t));
    CHECK_THROWS_AS(clamp(t, 1.0, -1.0), ValueError);
}

TEST_CASE("clamp is idempotent on random tensors") {
    RngState rng(8);
    for (int it = 0; it < 50; ++it) {
        Tensor t = random_tensor(rng, {7}, -3.0, 3.0);
        Tensor c = clamp(t, -0.5, 1.25);
        CHECK(bitwise_equal(clamp(c, -0.5, 1.25), c));
        for (double v : c.values) CHECK((v >= -0.5 && v <= 1.25));
    }
}

TEST_CASE("linf_distance hand values and errors") {
    Tensor a({2}, {0.0, 0.0});
    Tensor b({2}, {0.1, -0.3});
    CHECK(linf_distance(a, b) == doctest::Approx(0.3));
    CHECK(linf_distance(a, a) == 0.0);
    Tensor c({3}, {0.0, 0.0, 0.0});
    CHECK_THROWS_AS(linf_distance(a, c), ShapeError);
}

TEST_CASE("linf_distance matches brute-force max-abs-diff") {
    RngState rng(9);
    for (int it = 0; it < 50; ++it) {
        Tensor a = random_tensor(rng, {3, 4}, -2.0, 2.0);
        Tensor b = random_tensor(rng, {3, 4}, -2.0, 2.0);
        double expect = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            expect = std::max(expect, std::fabs(a.values[i] - b.values[i]));
        CHECK(linf_distance(a, b) == expect);
    }
}

TEST_CASE("linf_distance is a metric") {
    RngState rng(10);
    for (int it = 0; it < 30; ++it) {
        Tensor a = random_tensor(rng, {6}, -1.0, 1.0);
        Tensor b = random_tensor(rng, {6}, -1.0, 1.0);
        Tensor c = random_tensor(rng, {6}, -1.0, 1.0);
        CHECK(linf_distance(a, b) == linf_distance(b, a));
        CHECK(linf_distance(a, a) == 0.0);
        if (!bitwise_equal(a, b)) CHECK(linf_distance(a, b) > 0.0);
        CHECK(linf_distance(a, c) <= linf_distance(a, b) + linf_distance(b, c) + 1e-15);
    }
}

TEST_CASE("elementwise arithmetic") {
    RngState rng(11);
    Tensor t = random_tensor(rng, {4, 4});
    CHECK(bitwise_equal(add(t, Tensor::zeros({4, 4})), t));
    CHECK(bitwise_equal(sub(t, Tensor::zeros({4, 4})), t));
    Tensor twice = add(t, t);
    CHECK(bitwise_equal(scale(t, 2.0), twice));
    CHECK_THROWS_AS(add(t, Tensor::zeros({4, 5})), ShapeError);
    CHECK_THROWS_AS(sub(t, Tensor::zeros({2})), ShapeError);
}

TEST_CASE("matmul identity and brute-force oracle") {
    Tensor eye({2, 2}, {1.0, 0.0, 0.0, 1.0});
    RngState rng(12);
    Tensor m = random_tensor(rng, {2, 5});
    CHECK(bitwise_equal(matmul(eye, m), m));

    Tensor a = random_tensor(rng, {5, 4});
    Tensor b = random_tensor(rng, {4, 3});
    Tensor got = matmul(a, b);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < 4; ++p) acc += a.values[i * 4 + p] * b.values[p * 3 + j];
            CHECK(got.values[i * 3 + j] == doctest::Approx(acc).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(matmul(a, Tensor::zeros({5, 3})), ShapeError);
    CHECK_THROWS_AS(matmul(a, Tensor::zeros({4})), ShapeError);
}

TEST_CASE("tensor construction checks shape") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), ShapeError);
    CHECK_THROWS_AS(Tensor({0}, {}), ShapeError);
}

TEST_CASE("rng streams are deterministic and seed-sensitive") {
    RngState a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    RngState a2(42);
    bool any_diff = false;
    for (int i = 0; i < 10; ++i) any_diff |= (a2.next_u64() != c.next_u64());
    CHECK(any_diff);
}

TEST_CASE("uniform sampling stays in range and is pure in the state") {
    RngState r1(5), r2(5);
    Tensor u1 = uniform_tensor(r1, {100}, -0.25, 0.75);
    Tensor u2 = uniform_tensor(r2, {100}, -0.25, 0.75);
    CHECK(bitwise_equal(u1, u2));
    for (double v : u1.values) CHECK((v >= -0.25 && v < 0.75));
}

TEST_CASE("normal sampling has roughly the requested moments") {
    RngState rng(6);
    Tensor n = normal_tensor(rng, {20000}, 1.5, 2.0);
    double mean = 0.0;
    for (double v : n.values) mean += v;
    mean /= static_cast<double>(n.size());
    double var = 0.0;
    for (double v : n.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n.size());
    CHECK(mean == doctest::Approx(1.5).epsilon(0.05));
    CHECK(std::sqrt(var) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("ops are deterministic on equal inputs") {
    RngState rng(13);
    Tensor a = random_tensor(rng, {3, 3});
    Tensor b = random_tensor(rng, {3, 3});
    CHECK(bitwise_equal(add(a, b), add(a, b)));
    CHECK(bitwise_equal(matmul(a, b), matmul(a, b)));
    CHECK(bitwise_equal(sign(a), sign(a)));
    CHECK(bitwise_equal(clamp(a, -0.5, 0.5), clamp(a, -0.5, 0.5)));
}
