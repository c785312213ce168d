#include "gradsign/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "gradsign/attacks.hpp"
#include "gradsign/data.hpp"
#include "gradsign/errors.hpp"
#include "gradsign/eval.hpp"
#include "gradsign/nn.hpp"
#include "gradsign/train.hpp"
#include "gradsign/version.hpp"

namespace gradsign::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kFgsmEpsDefault = "0,0.1,0.2,0.3,0.4,0.5,0.6";
constexpr const char* kPgdEpsDefault = "0,0.05,0.1,0.15,0.2,0.3";

// Options shared by every command that needs a dataset.
struct DataOpts {
    std::string data_dir;
    bool synth = false;
    std::size_t classes = 4;
    std::size_t per_class = 200;
    std::size_t side = 32;
    double split = 0.8;  // train fraction
};

void add_data_options(CLI::App* cmd, DataOpts& opts, const char* synth_flag) {
    cmd->add_option("--data", opts.data_dir, "Dataset root (one directory per class)");
    cmd->add_flag(synth_flag, opts.synth, "Use the built-in synthetic sign dataset");
    cmd->add_option("--classes", opts.classes,
                    "Synthetic class count; with --data, asserts the class count")
        ->capture_default_str();
    cmd->add_option("--per-class", opts.per_class, "Synthetic examples per class")
        ->capture_default_str();
    cmd->add_option("--side", opts.side, "Image side length in pixels")
        ->capture_default_str();
    cmd->add_option("--split", opts.split, "Training fraction of the stratified split")
        ->capture_default_str();
}

// Loads or synthesizes the dataset named by opts, using seed for synthesis.
data::Dataset resolve_dataset(const DataOpts& opts, std::uint64_t seed, bool classes_given) {
    if (!opts.synth && opts.data_dir.empty())
        throw ConfigError("need a dataset: pass --data <dir> or the synthetic-data flag");
    if (opts.synth && !opts.data_dir.empty())
        throw ConfigError("--data and the synthetic-data flag are mutually exclusive");
    if (opts.synth) return data::synth_signs(opts.classes, opts.per_class, opts.side, seed);

    data::Dataset ds = data::load_directory(opts.data_dir, opts.side);
    if (classes_given && ds.class_names.size() != opts.classes)
        throw ConfigError("--classes " + std::to_string(opts.classes) + " but " +
                          opts.data_dir + " holds " + std::to_string(ds.class_names.size()) +
                          " classes");
    return ds;
}

void record_data_opts(manifest::Manifest& m, const DataOpts& opts) {
    m.set("mode", std::string(opts.synth ? "synth" : "directory"));
    if (!opts.synth) m.set("data", opts.data_dir);
    m.set("classes", opts.classes);
    m.set("per_class", opts.per_class);
    m.set("side", opts.side);
    m.set_real("split", opts.split);
}

struct AttackOpts {
    std::string attack;
    double alpha = 0.02;
    std::size_t steps = 10;
    bool random_start = true;
};

void add_attack_options(CLI::App* cmd, AttackOpts& opts) {
    cmd->add_option("--attack", opts.attack, "Attack method: fgsm or pgd")->required();
    cmd->add_option("--alpha", opts.alpha, "PGD step size")->capture_default_str();
    cmd->add_option("--steps", opts.steps, "PGD iteration count")->capture_default_str();
    cmd->add_flag("--random-start,!--no-random-start", opts.random_start,
                  "Start PGD from a random point in the epsilon-ball (default on)");
}

void record_attack_opts(manifest::Manifest& m, const AttackOpts& opts) {
    m.set("attack", opts.attack);
    m.set_real("alpha", opts.alpha);
    m.set("steps", opts.steps);
    m.set("random_start", opts.random_start);
}

std::string digest_of_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return train::digest_bytes(bytes);
}

// --- train ---------------------------------------------------------------

int cmd_train(const DataOpts& data_opts, bool classes_given, std::size_t hidden,
              std::size_t epochs, double lr, std::size_t batch, std::uint64_t seed,
              const std::string& out) {
    data::Dataset ds = resolve_dataset(data_opts, seed, classes_given);
    auto [train_set, test_set] = data::stratified_split(ds, 1.0 - data_opts.split, seed);

    RngState init_rng(seed);
    nn::ModelParams model =
        nn::build_model(data_opts.side, ds.class_names.size(), hidden, init_rng);

    train::TrainConfig cfg;
    cfg.learning_rate = lr;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.seed = seed;

    std::cerr << "training on " << train_set.size() << " examples ("
              << ds.class_names.size() << " classes, side " << data_opts.side << ")\n";
    train::TrainResult result =
        train::train(std::move(model), train_set, cfg, [&](const train::EpochStats& s) {
            std::fprintf(stderr, "epoch %zu/%zu  loss %.4f  acc %.2f%%\n", s.epoch, epochs,
                         s.mean_loss, s.accuracy_percent);
        });

    train::save_checkpoint(result.model, out);

    const std::string log_path = out + ".log";
    {
        std::ofstream log(log_path, std::ios::trunc);
        if (!log) throw IoError("cannot open " + log_path + " for writing");
        log << "epoch,mean_loss,accuracy_percent\n";
        for (const train::EpochStats& s : result.log) {
            char line[96];
            std::snprintf(line, sizeof(line), "%zu,%.6f,%.2f\n", s.epoch, s.mean_loss,
                          s.accuracy_percent);
            log << line;
        }
    }

    if (!test_set.empty())
        std::fprintf(stderr, "clean test accuracy: %.2f%%\n",
                     eval::accuracy(result.model, test_set));

    manifest::Manifest m;
    m.set("command", std::string("train"));
    m.set("version", std::string(GRADSIGN_VERSION));
    record_data_opts(m, data_opts);
    m.set("hidden", hidden);
    m.set("epochs", epochs);
    m.set_real("lr", lr);
    m.set("batch", batch);
    m.set("seed", seed);
    m.set("out", out);
    m.set("checkpoint_digest", train::model_digest(result.model));
    m.save(out + ".manifest");
    return 0;
}

// --- evaluate ------------------------------------------------------------

int cmd_evaluate(const std::string& model_path, const DataOpts& data_opts, bool classes_given,
                 const AttackOpts& attack_opts, const std::string& eps_text, std::uint64_t seed,
                 const std::string& out) {
    nn::ModelParams model = train::load_checkpoint(model_path);
    data::Dataset ds = resolve_dataset(data_opts, seed, classes_given);
    auto [train_set, test_set] = data::stratified_split(ds, 1.0 - data_opts.split, seed);
    (void)train_set;

    const attacks::AttackKind kind = attacks::attack_from_name(attack_opts.attack);
    const std::string eps_effective =
        eps_text.empty() ? (kind == attacks::AttackKind::Fgsm ? kFgsmEpsDefault : kPgdEpsDefault)
                         : eps_text;
    const std::vector<double> eps_list = manifest::parse_real_list(eps_effective);

    attacks::AttackConfig cfg;
    cfg.alpha = attack_opts.alpha;
    cfg.steps = attack_opts.steps;
    cfg.random_start = attack_opts.random_start;
    cfg.seed = seed;

    std::cerr << "evaluating " << attack_opts.attack << " on " << test_set.size()
              << " test examples, " << eps_list.size() << " epsilon values\n";
    eval::EvalReport report = eval::epsilon_sweep(model, test_set, kind, eps_list, cfg);
    for (const eval::EvalRow& row : report.rows)
        std::fprintf(stderr, "  eps %.2f  accuracy %.2f%%\n", row.epsilon, row.accuracy_percent);

    eval::write_report_csv(report, out);

    manifest::Manifest m;
    m.set("command", std::string("evaluate"));
    m.set("version", std::string(GRADSIGN_VERSION));
    m.set("model", model_path);
    record_data_opts(m, data_opts);
    record_attack_opts(m, attack_opts);
    m.set("eps", manifest::format_real_list(eps_list));
    m.set("seed", seed);
    m.set("out", out);
    m.set("checkpoint_digest", digest_of_file(model_path));
    m.save(out + ".manifest");
    return 0;
}

// --- attack / visualize shared input -------------------------------------

struct ImageInput {
    std::string image_path;
    int label = -1;
    std::ptrdiff_t index = -1;
};

void add_image_input(CLI::App* cmd, ImageInput& input) {
    cmd->add_option("--image", input.image_path, "PPM image to attack");
    cmd->add_option("--label", input.label, "True class id for --image");
    cmd->add_option("--index", input.index, "Test-split example index (with --data/--synth-test)");
}

std::pair<data::Image, int> resolve_image(const ImageInput& input, const DataOpts& data_opts,
                                          bool classes_given, std::uint64_t seed,
                                          std::size_t model_side) {
    if (!input.image_path.empty()) {
        if (input.label < 0) throw ConfigError("--image requires --label <class id>");
        data::Image img = data::read_ppm_file(input.image_path);
        return {data::resize_bilinear(img, model_side), input.label};
    }
    if (input.index < 0)
        throw ConfigError("pass --image <file> --label <id>, or a dataset plus --index <i>");
    data::Dataset ds = resolve_dataset(data_opts, seed, classes_given);
    auto [train_set, test_set] = data::stratified_split(ds, 1.0 - data_opts.split, seed);
    (void)train_set;
    if (static_cast<std::size_t>(input.index) >= test_set.size())
        throw ConfigError("--index " + std::to_string(input.index) +
                          " out of range, test split has " + std::to_string(test_set.size()) +
                          " examples");
    const data::Example& ex = test_set.examples[static_cast<std::size_t>(input.index)];
    return {ex.image, ex.label};
}

// Records either the (image, label) pair or the dataset + index that named
// the input, so a replay resolves the same example.
void record_image_input(manifest::Manifest& m, const ImageInput& input,
                        const DataOpts& data_opts) {
    if (!input.image_path.empty()) {
        m.set("image", input.image_path);
        m.set("label", input.label);
    } else {
        m.set("index", static_cast<std::uint64_t>(input.index));
        record_data_opts(m, data_opts);
    }
}

// --- attack ----------------------------------------------------------------

int cmd_attack(const std::string& model_path, const ImageInput& input, const DataOpts& data_opts,
               bool classes_given, const AttackOpts& attack_opts, double epsilon,
               std::uint64_t seed, const std::string& out, const std::string& pert_out) {
    nn::ModelParams model = train::load_checkpoint(model_path);
    auto [img, label] =
        resolve_image(input, data_opts, classes_given, seed, model.input_side);

    const attacks::AttackKind kind = attacks::attack_from_name(attack_opts.attack);
    const Tensor x = data::normalize(img);
    attacks::AdvExample adv;
    if (kind == attacks::AttackKind::Fgsm) {
        adv = attacks::fgsm(model, x, label, epsilon);
    } else {
        attacks::AttackConfig cfg;
        cfg.epsilon = epsilon;
        cfg.alpha = attack_opts.alpha;
        cfg.steps = attack_opts.steps;
        cfg.random_start = attack_opts.random_start;
        cfg.seed = seed;
        adv = attacks::pgd(model, x, label, cfg);
    }

    data::write_ppm_file(data::denormalize(adv.x_adv), out);
    if (!pert_out.empty()) {
        data::Image pert = data::Image::filled(img.height, img.width, 0.5, 0.5, 0.5);
        if (epsilon > 0.0) {
            const std::size_t plane = img.height * img.width;
            for (std::size_t i = 0; i < plane; ++i)
                for (std::size_t c = 0; c < 3; ++c) {
                    const double v =
                        (adv.perturbation.values[c * plane + i] + epsilon) / (2.0 * epsilon);
                    pert.pixels[i * 3 + c] = std::min(std::max(v, 0.0), 1.0);
                }
        }
        data::write_ppm_file(pert, pert_out);
    }

    std::fprintf(stderr,
                 "label %d -> predicted %d  loss %.4f -> %.4f  linf %.6f (eps %.6f)\n",
                 label, adv.predicted_label, adv.loss_before, adv.loss_after,
                 linf_distance(adv.x_adv, x), epsilon);

    manifest::Manifest m;
    m.set("command", std::string("attack"));
    m.set("version", std::string(GRADSIGN_VERSION));
    m.set("model", model_path);
    record_image_input(m, input, data_opts);
    record_attack_opts(m, attack_opts);
    m.set_real("eps", epsilon);
    m.set("seed", seed);
    m.set("out", out);
    if (!pert_out.empty()) m.set("pert_out", pert_out);
    m.set("checkpoint_digest", digest_of_file(model_path));
    m.save(out + ".manifest");
    return 0;
}

// --- visualize -------------------------------------------------------------

int cmd_visualize(const std::string& model_path, const ImageInput& input,
                  const DataOpts& data_opts, bool classes_given, const AttackOpts& attack_opts,
                  const std::string& eps_text, std::uint64_t seed, const std::string& out) {
    nn::ModelParams model = train::load_checkpoint(model_path);
    auto [img, label] =
        resolve_image(input, data_opts, classes_given, seed, model.input_side);

    const attacks::AttackKind kind = attacks::attack_from_name(attack_opts.attack);
    const std::string eps_effective =
        eps_text.empty() ? (kind == attacks::AttackKind::Fgsm ? kFgsmEpsDefault : kPgdEpsDefault)
                         : eps_text;
    const std::vector<double> eps_list = manifest::parse_real_list(eps_effective);

    attacks::AttackConfig cfg;
    cfg.alpha = attack_opts.alpha;
    cfg.steps = attack_opts.steps;
    cfg.random_start = attack_opts.random_start;
    cfg.seed = seed;

    eval::ImageGrid grid = eval::render_attack_grid(model, img, label, kind, eps_list, cfg);
    eval::write_grid_ppm(grid, out);
    std::cerr << "wrote " << grid.rows << "x" << grid.cols << " grid to " << out << "\n";

    manifest::Manifest m;
    m.set("command", std::string("visualize"));
    m.set("version", std::string(GRADSIGN_VERSION));
    m.set("model", model_path);
    record_image_input(m, input, data_opts);
    record_attack_opts(m, attack_opts);
    m.set("eps", manifest::format_real_list(eps_list));
    m.set("seed", seed);
    m.set("out", out);
    m.set("checkpoint_digest", digest_of_file(model_path));
    m.save(out + ".manifest");
    return 0;
}

// --- synth-data ------------------------------------------------------------

int cmd_synth_data(std::size_t classes, std::size_t per_class, std::size_t side,
                   std::uint64_t seed, const std::string& out) {
    data::Dataset ds = data::synth_signs(classes, per_class, side, seed);
    data::write_dataset(ds, out);
    std::cerr << "wrote " << ds.size() << " images across " << classes << " classes to " << out
              << "\n";

    manifest::Manifest m;
    m.set("command", std::string("synth-data"));
    m.set("version", std::string(GRADSIGN_VERSION));
    m.set("classes", classes);
    m.set("per_class", per_class);
    m.set("side", side);
    m.set("seed", seed);
    m.set("out", out);
    m.save(fs::path(out) / "manifest.txt");
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"gradsign: train a small CNN classifier and evaluate its robustness "
                 "against FGSM and PGD attacks"};
    app.require_subcommand(1);

    // train
    auto* tr = app.add_subcommand("train", "Train a classifier and write a checkpoint");
    DataOpts tr_data;
    std::size_t tr_hidden = 256, tr_epochs = 10, tr_batch = 32;
    double tr_lr = 0.001;
    std::uint64_t tr_seed = 42;
    std::string tr_out;
    add_data_options(tr, tr_data, "--synth");
    tr->add_option("--hidden", tr_hidden, "Hidden dense layer width")->capture_default_str();
    tr->add_option("--epochs", tr_epochs, "Training epochs")->capture_default_str();
    tr->add_option("--lr", tr_lr, "Adam learning rate")->capture_default_str();
    tr->add_option("--batch", tr_batch, "Mini-batch size")->capture_default_str();
    tr->add_option("--seed", tr_seed, "Seed for init, shuffling, synthesis and split")
        ->capture_default_str();
    tr->add_option("--out", tr_out, "Checkpoint output path (.gsgn)")->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate",
                                  "Sweep epsilon for one attack and write a CSV report");
    DataOpts ev_data;
    AttackOpts ev_attack;
    std::string ev_model, ev_eps, ev_out;
    std::uint64_t ev_seed = 42;
    ev->add_option("--model", ev_model, "Checkpoint to evaluate")->required();
    add_data_options(ev, ev_data, "--synth-test");
    add_attack_options(ev, ev_attack);
    ev->add_option("--eps", ev_eps,
                   "Comma-separated epsilon grid (default fgsm: " + std::string(kFgsmEpsDefault) +
                       "; pgd: " + std::string(kPgdEpsDefault) + ")");
    ev->add_option("--seed", ev_seed, "Seed for synthesis/split and attack randomness")
        ->capture_default_str();
    ev->add_option("--out", ev_out, "Report CSV output path")->required();

    // attack
    auto* at = app.add_subcommand("attack", "Attack one image and write the adversarial PPM");
    DataOpts at_data;
    AttackOpts at_attack;
    ImageInput at_input;
    std::string at_model, at_out, at_pert_out;
    double at_eps = 0.1;
    std::uint64_t at_seed = 42;
    at->add_option("--model", at_model, "Checkpoint to attack")->required();
    add_image_input(at, at_input);
    add_data_options(at, at_data, "--synth-test");
    add_attack_options(at, at_attack);
    at->add_option("--eps", at_eps, "Perturbation budget")->capture_default_str();
    at->add_option("--seed", at_seed, "Seed for attack randomness")->capture_default_str();
    at->add_option("--out", at_out, "Adversarial image output path")->required();
    at->add_option("--pert-out", at_pert_out, "Optional perturbation visualization path");

    // visualize
    auto* vz = app.add_subcommand(
        "visualize", "Render an adversarial/perturbation grid across epsilon values");
    DataOpts vz_data;
    AttackOpts vz_attack;
    ImageInput vz_input;
    std::string vz_model, vz_eps, vz_out;
    std::uint64_t vz_seed = 42;
    vz->add_option("--model", vz_model, "Checkpoint to visualize")->required();
    add_image_input(vz, vz_input);
    add_data_options(vz, vz_data, "--synth-test");
    add_attack_options(vz, vz_attack);
    vz->add_option("--eps", vz_eps,
                   "Comma-separated epsilon grid (default fgsm: " + std::string(kFgsmEpsDefault) +
                       "; pgd: " + std::string(kPgdEpsDefault) + ")");
    vz->add_option("--seed", vz_seed, "Seed for attack randomness")->capture_default_str();
    vz->add_option("--out", vz_out, "Grid PPM output path")->required();

    // synth-data
    auto* sy = app.add_subcommand("synth-data",
                                  "Materialize the synthetic dataset as a directory tree");
    std::size_t sy_classes = 4, sy_per_class = 200, sy_side = 32;
    std::uint64_t sy_seed = 42;
    std::string sy_out;
    sy->add_option("--classes", sy_classes, "Number of classes (max 12)")->capture_default_str();
    sy->add_option("--per-class", sy_per_class, "Examples per class")->capture_default_str();
    sy->add_option("--side", sy_side, "Image side length in pixels")->capture_default_str();
    sy->add_option("--seed", sy_seed, "Generator seed")->capture_default_str();
    sy->add_option("--out", sy_out, "Output directory")->required();

    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("gradsign");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const std::string& s : full) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (tr->parsed())
            return cmd_train(tr_data, tr->count("--classes") > 0, tr_hidden, tr_epochs, tr_lr,
                             tr_batch, tr_seed, tr_out);
        if (ev->parsed())
            return cmd_evaluate(ev_model, ev_data, ev->count("--classes") > 0, ev_attack, ev_eps,
                                ev_seed, ev_out);
        if (at->parsed())
            return cmd_attack(at_model, at_input, at_data, at->count("--classes") > 0, at_attack,
                              at_eps, at_seed, at_out, at_pert_out);
        if (vz->parsed())
            return cmd_visualize(vz_model, vz_input, vz_data, vz->count("--classes") > 0,
                                 vz_attack, vz_eps, vz_seed, vz_out);
        if (sy->parsed()) return cmd_synth_data(sy_classes, sy_per_class, sy_side, sy_seed, sy_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

std::vector<std::string> argv_from_manifest(const manifest::Manifest& m) {
    const std::string& command = m.get("command");
    std::vector<std::string> args = {command};

    const auto push = [&](const std::string& flag, const std::string& value) {
        args.push_back(flag);
        args.push_back(value);
    };
    const auto push_data = [&](const char* synth_flag) {
        if (m.get("mode") == "synth") {
            args.push_back(synth_flag);
        } else {
            push("--data", m.get("data"));
        }
        push("--classes", m.get("classes"));
        push("--per-class", m.get("per_class"));
        push("--side", m.get("side"));
        push("--split", m.get("split"));
    };
    const auto push_attack = [&] {
        push("--attack", m.get("attack"));
        push("--alpha", m.get("alpha"));
        push("--steps", m.get("steps"));
        args.push_back(m.get_bool("random_start") ? "--random-start" : "--no-random-start");
    };
    const auto push_image_input = [&](const char* synth_flag) {
        if (m.has("image")) {
            push("--image", m.get("image"));
            push("--label", m.get("label"));
        } else {
            push("--index", m.get("index"));
            push_data(synth_flag);
        }
    };

    if (command == "train") {
        push_data("--synth");
        push("--hidden", m.get("hidden"));
        push("--epochs", m.get("epochs"));
        push("--lr", m.get("lr"));
        push("--batch", m.get("batch"));
        push("--seed", m.get("seed"));
        push("--out", m.get("out"));
    } else if (command == "evaluate") {
        push("--model", m.get("model"));
        push_data("--synth-test");
        push_attack();
        push("--eps", m.get("eps"));
        push("--seed", m.get("seed"));
        push("--out", m.get("out"));
    } else if (command == "attack") {
        push("--model", m.get("model"));
        push_image_input("--synth-test");
        push_attack();
        push("--eps", m.get("eps"));
        push("--seed", m.get("seed"));
        push("--out", m.get("out"));
        if (m.has("pert_out")) push("--pert-out", m.get("pert_out"));
    } else if (command == "visualize") {
        push("--model", m.get("model"));
        push_image_input("--synth-test");
        push_attack();
        push("--eps", m.get("eps"));
        push("--seed", m.get("seed"));
        push("--out", m.get("out"));
    } else if (command == "synth-data") {
        push("--classes", m.get("classes"));
        push("--per-class", m.get("per_class"));
        push("--side", m.get("side"));
        push("--seed", m.get("seed"));
        push("--out", m.get("out"));
    } else {
        throw ConfigError("manifest: unknown command '" + command + "'");
    }
    return args;
}

}  // namespace gradsign::cli
