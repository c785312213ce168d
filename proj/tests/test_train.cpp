#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gradsign/data.hpp"
#include "gradsign/errors.hpp"
#include "gradsign/eval.hpp"
#include "gradsign/train.hpp"
#include "test_helpers.hpp"

using namespace gradsign;
using namespace gradsign::train;
using testutil::bitwise_equal;
using testutil::random_tensor;
using testutil::tiny_model;
namespace fs = std::filesystem;

TEST_CASE("adam single-step scalar oracle") {
    // p = 1, g = 0.5, lr = 0.001: bias correction makes m_hat = g and
    // v_hat = g^2, so p' = 1 - 0.001 * 0.5 / (0.5 + 1e-8) ~= 0.999000
    std::vector<Tensor> params = {Tensor({1}, {1.0})};
    std::vector<Tensor> grads = {Tensor({1}, {0.5})};
    AdamState st = AdamState::init(params);
    TrainConfig cfg;

    auto [p1, st1] = adam_step(params, grads, st, cfg);
    CHECK(p1[0].values[0] == doctest::Approx(0.999000).epsilon(1e-6));
    CHECK(st1.t == 1);
    CHECK(st1.m[0].values[0] == doctest::Approx(0.05));
    CHECK(st1.v[0].values[0] == doctest::Approx(0.00025));
}

TEST_CASE("adam zero-gradient step is the exact identity") {
    RngState rng(30);
    std::vector<Tensor> params = {random_tensor(rng, {3, 4}), random_tensor(rng, {7})};
    std::vector<Tensor> zeros = {Tensor::zeros({3, 4}), Tensor::zeros({7})};
    AdamState st = AdamState::init(params);
    TrainConfig cfg;

    SUBCASE("fresh state") {
        auto [p1, st1] = adam_step(params, zeros, st, cfg);
        CHECK(bitwise_equal(p1[0], params[0]));
        CHECK(bitwise_equal(p1[1], params[1]));
        CHECK(st1.t == 1);
    }
    SUBCASE("zero-moment state at later t") {
        st.t = 17;
        auto [p1, st1] = adam_step(params, zeros, st, cfg);
        CHECK(bitwise_equal(p1[0], params[0]));
        CHECK(bitwise_equal(p1[1], params[1]));
        CHECK(st1.t == 18);
    }
}

TEST_CASE("adam preserves shapes and rejects mismatches") {
    RngState rng(31);
    std::vector<Tensor> params = {random_tensor(rng, {2, 3})};
    std::vector<Tensor> grads = {random_tensor(rng, {2, 3})};
    AdamState st = AdamState::init(params);
    TrainConfig cfg;

    auto cur = params;
    auto cur_st = st;
    for (int i = 0; i < 5; ++i) {
        auto [p, s] = adam_step(cur, grads, cur_st, cfg);
        cur = std::move(p);
        cur_st = std::move(s);
        CHECK(cur[0].shape == params[0].shape);
    }
    CHECK(cur_st.t == 5);

    std::vector<Tensor> bad = {random_tensor(rng, {3, 2})};
    CHECK_THROWS_AS(adam_step(params, bad, st, cfg), ShapeError);

    TrainConfig bad_cfg;
    bad_cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(adam_step(params, grads, st, bad_cfg), ConfigError);
}

TEST_CASE("adam is deterministic") {
    RngState rng(32);
    std::vector<Tensor> params = {random_tensor(rng, {5})};
    std::vector<Tensor> grads = {random_tensor(rng, {5})};
    AdamState st = AdamState::init(params);
    TrainConfig cfg;
    auto a = adam_step(params, grads, st, cfg);
    auto b = adam_step(params, grads, st, cfg);
    CHECK(bitwise_equal(a.first[0], b.first[0]));
    CHECK(bitwise_equal(a.second.m[0], b.second.m[0]));
    CHECK(bitwise_equal(a.second.v[0], b.second.v[0]));
}

namespace {

data::Dataset tiny_dataset(std::size_t per_class = 4) {
    return data::synth_signs(2, per_class, 16, 11);
}

nn::ModelParams tiny_trained_model(const data::Dataset& ds, std::size_t epochs, std::uint64_t seed) {
    RngState rng(seed);
    nn::ModelParams model = nn::build_model(16, ds.class_names.size(), 8, rng);
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = 4;
    cfg.seed = seed;
    return gradsign::train::train(std::move(model), ds, cfg).model;
}

}  // namespace

TEST_CASE("loss on a fixed batch decreases over the first adam steps") {
    data::Dataset ds = tiny_dataset();
    RngState rng(33);
    nn::ModelParams model = nn::build_model(16, 2, 8, rng);

    // full-batch training: one adam step per epoch, and the per-epoch mean
    // loss is the batch loss right before that step
    TrainConfig cfg;
    cfg.batch_size = ds.size();
    cfg.epochs = 6;
    cfg.seed = 1;
    TrainResult r = gradsign::train::train(std::move(model), ds, cfg);

    int non_decreasing = 0;
    for (std::size_t i = 1; i < r.log.size(); ++i)
        if (r.log[i].mean_loss >= r.log[i - 1].mean_loss) ++non_decreasing;
    CHECK(non_decreasing <= 1);
}

TEST_CASE("training overfits a single example") {
    data::Dataset ds = tiny_dataset(1);
    ds.examples.resize(1);  // one example of class 0

    RngState rng(34);
    nn::ModelParams model = nn::build_model(16, 2, 8, rng);
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.batch_size = 1;
    cfg.seed = 2;
    TrainResult r = gradsign::train::train(std::move(model), ds, cfg);
    CHECK(r.log.back().mean_loss < 0.01);
}

TEST_CASE("training is deterministic in the seed") {
    data::Dataset ds = tiny_dataset();
    nn::ModelParams a = tiny_trained_model(ds, 2, 5);
    nn::ModelParams b = tiny_trained_model(ds, 2, 5);
    auto pa = nn::parameter_list(a), pb = nn::parameter_list(b);
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(bitwise_equal(*pa[i], *pb[i]));
}

TEST_CASE("train validates inputs") {
    RngState rng(35);
    nn::ModelParams model = nn::build_model(16, 2, 8, rng);
    TrainConfig cfg;

    data::Dataset empty;
    CHECK_THROWS_AS(gradsign::train::train(model, empty, cfg), DataError);

    data::Dataset bad = tiny_dataset();
    bad.examples[0].label = 9;
    CHECK_THROWS_AS(gradsign::train::train(model, bad, cfg), LabelError);
}

TEST_CASE("checkpoint round trip is bit-exact") {
    RngState rng(36);
    nn::ModelParams model = tiny_model(rng, 3);
    fs::path path = fs::temp_directory_path() / "gradsign_test_ckpt.gsgn";

    save_checkpoint(model, path);
    nn::ModelParams back = load_checkpoint(path);

    CHECK(back.input_side == model.input_side);
    CHECK(back.num_classes == model.num_classes);
    REQUIRE(back.layers.size() == model.layers.size());
    auto pa = nn::parameter_list(model), pb = nn::parameter_list(back);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(bitwise_equal(*pa[i], *pb[i]));
    CHECK(serialize_model(back) == serialize_model(model));
    CHECK(model_digest(back) == model_digest(model));
    fs::remove(path);
}

TEST_CASE("checkpoint rejects corruption with offsets") {
    RngState rng(37);
    nn::ModelParams model = tiny_model(rng, 3);
    auto bytes = serialize_model(model);

    SUBCASE("corrupt magic") {
        auto bad = bytes;
        bad[0] = 'X';
        try {
            deserialize_model(bad);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset() == 0);
        }
    }
    SUBCASE("bad version") {
        auto bad = bytes;
        bad[4] = 9;
        try {
            deserialize_model(bad);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset() == 4);
        }
    }
    SUBCASE("truncation") {
        auto bad = bytes;
        bad.resize(bytes.size() / 2);
        CHECK_THROWS_AS(deserialize_model(bad), FormatError);
    }
    SUBCASE("trailing garbage") {
        auto bad = bytes;
        bad.push_back(0);
        CHECK_THROWS_AS(deserialize_model(bad), FormatError);
    }
}

TEST_CASE("checkpoint round trip preserves evaluation exactly") {
    data::Dataset ds = tiny_dataset();
    auto [tr, te] = data::stratified_split(ds, 0.25, 3);
    nn::ModelParams model = tiny_trained_model(tr, 2, 6);

    fs::path path = fs::temp_directory_path() / "gradsign_test_trained.gsgn";
    save_checkpoint(model, path);
    nn::ModelParams back = load_checkpoint(path);
    CHECK(eval::accuracy(back, te) == eval::accuracy(model, te));
    fs::remove(path);
}
