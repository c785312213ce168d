#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gradsign/attacks.hpp"
#include "gradsign/errors.hpp"
#include "test_helpers.hpp"

using namespace gradsign;
using namespace gradsign::attacks;
using testutil::bitwise_equal;
using testutil::random_tensor;
using testutil::tiny_model;

TEST_CASE("project_linf basics") {
    Tensor center = Tensor::zeros({2});
    Tensor cand({2}, {0.5, -0.05});
    Tensor got = project_linf(cand, center, 0.1);
    CHECK(got.values == std::vector<double>{0.1, -0.05});

    // inside the ball: unchanged
    Tensor inside({2}, {0.05, -0.08});
    CHECK(bitwise_equal(project_linf(inside, center, 0.1), inside));

    CHECK_THROWS_AS(project_linf(cand, Tensor::zeros({3}), 0.1), ShapeError);
    CHECK_THROWS_AS(project_linf(cand, center, -0.5), ConfigError);
}

TEST_CASE("project_linf is the nearest point of the ball and idempotent") {
    RngState rng(40);
    for (int it = 0; it < 40; ++it) {
        Tensor center = random_tensor(rng, {6}, -1.0, 1.0);
        Tensor cand = random_tensor(rng, {6}, -2.0, 2.0);
        const double eps = rng.uniform(0.0, 0.5);
        Tensor proj = project_linf(cand, center, eps);

        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(std::fabs(proj.values[i] - center.values[i]) <= eps * (1 + 1e-15));
            // brute-force nearest point of the interval along a fine grid
            double best = center.values[i] - eps, best_d = std::fabs(cand.values[i] - best);
            for (int k = 0; k <= 1000; ++k) {
                const double p = center.values[i] - eps + (2 * eps) * k / 1000.0;
                const double d = std::fabs(cand.values[i] - p);
                if (d < best_d) {
                    best_d = d;
                    best = p;
                }
            }
            CHECK(std::fabs(cand.values[i] - proj.values[i]) <= best_d + 1e-9);
        }
        CHECK(bitwise_equal(project_linf(proj, center, eps), proj));
    }
}

TEST_CASE("fgsm at epsilon 0 returns the input bitwise") {
    RngState rng(41);
    nn::ModelParams m = tiny_model(rng);
    Tensor x = random_tensor(rng, {3, 8, 8});
    AdvExample adv = fgsm(m, x, 1, 0.0);
    CHECK(bitwise_equal(adv.x_adv, x));
    CHECK(adv.predicted_label == nn::predict(m, x));
    CHECK(adv.loss_before == adv.loss_after);
    for (double v : adv.perturbation.values) CHECK(v == 0.0);
}

TEST_CASE("fgsm interior coordinates move by exactly epsilon") {
    RngState rng(42);
    nn::ModelParams m = tiny_model(rng);
    // x on a dyadic grid away from the [-1, 1] walls: x + eps is exactly
    // representable, so the step must land exactly epsilon away
    Tensor x = random_tensor(rng, {3, 8, 8}, -0.5, 0.5);
    for (double& v : x.values) v = std::round(v * 64.0) / 64.0;
    const double eps = 0.125;
    AdvExample adv = fgsm(m, x, 0, eps);

    auto [logits, trace] = nn::forward(m, x);
    (void)logits;
    Tensor g = nn::input_gradient(m, trace, 0);
    std::size_t moved = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = adv.x_adv.values[i] - x.values[i];
        if (g.values[i] > 0.0) {
            CHECK(d == eps);
            ++moved;
        } else if (g.values[i] < 0.0) {
            CHECK(d == -eps);
            ++moved;
        } else {
            CHECK(d == 0.0);
        }
    }
    CHECK(moved > 0);
    CHECK(linf_distance(adv.x_adv, x) <= eps + 1e-9);
}

TEST_CASE("fgsm matches the closed form on a single dense layer") {
    // flatten . dense(W, b): input gradient is W^T (softmax(logits) - onehot)
    RngState rng(43);
    std::vector<nn::LayerSpec> layers = {nn::LayerSpec::flatten(), nn::LayerSpec::dense(12, 3)};
    nn::ModelParams m = nn::make_model(std::move(layers), 3, 2, 3, rng);
    // hand-set weights: deterministic ramp, zero bias
    for (std::size_t i = 0; i < m.params[1].weight.size(); ++i)
        m.params[1].weight.values[i] = 0.05 * static_cast<double>(i % 7) - 0.1;

    Tensor x = random_tensor(rng, {3, 2, 2}, -0.6, 0.6);
    const int label = 1;
    const double eps = 0.2;

    // independent closed-form oracle
    const Tensor& w = m.params[1].weight;
    std::vector<double> logits(3, 0.0);
    for (std::size_t o = 0; o < 3; ++o)
        for (std::size_t i = 0; i < 12; ++i) logits[o] += w.values[o * 12 + i] * x.values[i];
    double mx = std::max({logits[0], logits[1], logits[2]});
    double denom = 0.0;
    for (double l : logits) denom += std::exp(l - mx);
    std::vector<double> delta(3);
    for (std::size_t o = 0; o < 3; ++o) delta[o] = std::exp(logits[o] - mx) / denom;
    delta[label] -= 1.0;

    AdvExample adv = fgsm(m, x, label, eps);
    for (std::size_t i = 0; i < 12; ++i) {
        double gi = 0.0;
        for (std::size_t o = 0; o < 3; ++o) gi += delta[o] * w.values[o * 12 + i];
        const double want =
            std::min(std::max(x.values[i] + eps * (gi > 0 ? 1.0 : (gi < 0 ? -1.0 : 0.0)), -1.0), 1.0);
        CHECK(adv.x_adv.values[i] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("pgd at epsilon 0 returns the input bitwise") {
    RngState rng(44);
    nn::ModelParams m = tiny_model(rng);
    Tensor x = random_tensor(rng, {3, 8, 8});
    AttackConfig cfg;
    cfg.epsilon = 0.0;
    cfg.steps = 5;
    cfg.alpha = 0.1;
    cfg.random_start = true;
    cfg.seed = 9;
    AdvExample adv = pgd(m, x, 2, cfg);
    CHECK(bitwise_equal(adv.x_adv, x));
    CHECK(adv.predicted_label == nn::predict(m, x));
}

TEST_CASE("pgd reduces to fgsm for one clean-start step with alpha >= eps") {
    RngState rng(45);
    for (int it = 0; it < 10; ++it) {
        nn::ModelParams m = tiny_model(rng, 3, 2, 4);
        Tensor x = random_tensor(rng, {3, 8, 8});
        const double eps = 0.02 + 0.03 * it;

        AttackConfig cfg;
        cfg.epsilon = eps;
        cfg.alpha = eps * (1.0 + (it % 3));  // alpha >= eps
        cfg.steps = 1;
        cfg.random_start = false;
        cfg.seed = 123;

        AdvExample p = pgd(m, x, 0, cfg);
        AdvExample f = fgsm(m, x, 0, eps);
        CHECK(bitwise_equal(p.x_adv, f.x_adv));
        CHECK(bitwise_equal(p.perturbation, f.perturbation));
        CHECK(p.loss_before == f.loss_before);
        CHECK(p.loss_after == f.loss_after);
        CHECK(p.predicted_label == f.predicted_label);
    }
}

TEST_CASE("attack outputs respect the budget and stay in range") {
    RngState rng(46);
    for (int it = 0; it < 20; ++it) {
        nn::ModelParams m = tiny_model(rng, 3, 2, 4);
        Tensor x = random_tensor(rng, {3, 8, 8});
        const double eps = rng.uniform(0.0, 0.5);

        AdvExample f = fgsm(m, x, static_cast<int>(rng.next_u64() % 3), eps);
        CHECK(linf_distance(f.x_adv, x) <= eps + 1e-9);
        for (double v : f.x_adv.values) CHECK((v >= -1.0 && v <= 1.0));

        AttackConfig cfg;
        cfg.epsilon = eps;
        cfg.alpha = 0.02;
        cfg.steps = 1 + static_cast<std::size_t>(rng.next_u64() % 10);
        cfg.random_start = (rng.next_u64() % 2) == 0;
        cfg.seed = rng.next_u64();
        AdvExample p = pgd(m, x, static_cast<int>(rng.next_u64() % 3), cfg);
        CHECK(linf_distance(p.x_adv, x) <= eps + 1e-9);
        for (double v : p.x_adv.values) CHECK((v >= -1.0 && v <= 1.0));
    }
}

TEST_CASE("attacks are deterministic given equal inputs and seeds") {
    RngState rng(47);
    nn::ModelParams m = tiny_model(rng);
    Tensor x = random_tensor(rng, {3, 8, 8});
    AttackConfig cfg;
    cfg.epsilon = 0.1;
    cfg.seed = 77;
    AdvExample a = pgd(m, x, 1, cfg);
    AdvExample b = pgd(m, x, 1, cfg);
    CHECK(bitwise_equal(a.x_adv, b.x_adv));
    CHECK(a.predicted_label == b.predicted_label);
    CHECK(a.loss_after == b.loss_after);

    AdvExample fa = fgsm(m, x, 1, 0.1);
    AdvExample fb = fgsm(m, x, 1, 0.1);
    CHECK(bitwise_equal(fa.x_adv, fb.x_adv));
}

TEST_CASE("fgsm evaluates the gradient exactly once; pgd exactly steps times") {
    RngState rng(48);
    nn::ModelParams m = tiny_model(rng);
    Tensor x = random_tensor(rng, {3, 8, 8});

    int grad_calls = 0;
    LossOracle counted = make_oracle(m, 1);
    LossOracle probe;
    probe.loss_and_grad = [&](const Tensor& p) {
        ++grad_calls;
        return counted.loss_and_grad(p);
    };
    probe.loss_and_predict = counted.loss_and_predict;

    fgsm_core(probe, x, 0.1);
    CHECK(grad_calls == 1);

    for (std::size_t steps : {1u, 4u, 10u}) {
        grad_calls = 0;
        AttackConfig cfg;
        cfg.epsilon = 0.1;
        cfg.steps = steps;
        cfg.seed = 5;
        pgd_core(probe, x, cfg);
        CHECK(grad_calls == static_cast<int>(steps));
    }
}

TEST_CASE("multi-step pgd dominates fgsm on most examples") {
    RngState rng(49);
    nn::ModelParams m = tiny_model(rng, 3, 3, 6);
    const double eps = 0.1;

    int pgd_wins = 0, total = 0;
    for (int it = 0; it < 30; ++it) {
        Tensor x = random_tensor(rng, {3, 8, 8}, -0.9, 0.9);
        const int label = static_cast<int>(rng.next_u64() % 3);
        AdvExample f = fgsm(m, x, label, eps);
        AttackConfig cfg;
        cfg.epsilon = eps;
        cfg.alpha = 0.02;
        cfg.steps = 10;
        cfg.random_start = false;
        cfg.seed = 1000 + static_cast<std::uint64_t>(it);
        AdvExample p = pgd(m, x, label, cfg);
        ++total;
        if (p.loss_after >= f.loss_after - 1e-12) ++pgd_wins;
    }
    CHECK(pgd_wins * 10 >= total * 9);  // >= 90%
}

TEST_CASE("attack input validation") {
    RngState rng(50);
    nn::ModelParams m = tiny_model(rng);
    Tensor x = random_tensor(rng, {3, 8, 8});

    CHECK_THROWS_AS(fgsm(m, x, 99, 0.1), LabelError);
    CHECK_THROWS_AS(fgsm(m, x, 0, -0.1), ConfigError);

    Tensor out_of_range = x;
    out_of_range.values[0] = 1.5;
    CHECK_THROWS_AS(fgsm(m, out_of_range, 0, 0.1), ValueError);

    AttackConfig bad;
    bad.epsilon = 0.1;
    bad.steps = 0;
    CHECK_THROWS_AS(pgd(m, x, 0, bad), ConfigError);
    bad.steps = 1;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(pgd(m, x, 0, bad), ConfigError);
}
