// pasadena: train, noise, denoise, attack, score and sweep from the shell.
//
// Exit codes: 0 success (including attacks that fail to fool the model),
// 1 internal error, 2 usage or I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pasadena/attack.hpp"
#include "pasadena/bench.hpp"
#include "pasadena/classifier.hpp"
#include "pasadena/edges.hpp"
#include "pasadena/image.hpp"
#include "pasadena/kernel_field.hpp"
#include "pasadena/metrics.hpp"
#include "pasadena/noise.hpp"
#include "pasadena/parallel.hpp"

namespace {

using namespace pasadena;

/// Raised for bad flags, bad files, bad formats: anything the user can fix.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename Fn> auto usage_guard(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
}

Image load_image_checked(const std::string& path) {
    return usage_guard([&] { return load_image_file(path); });
}

Model load_model_checked(const std::string& path) {
    return usage_guard([&] { return load_weights_file(path); });
}

nlohmann::json quality_to_json(const QualityReport& q) {
    return {{"psnr", q.psnr_db},
            {"psnr_local", q.psnr_local_db},
            {"ssim", q.ssim},
            {"mscn_mean", q.mscn.mean},
            {"mscn_variance", q.mscn.variance}};
}

// --- train-classifier ------------------------------------------------------

struct TrainOpts {
    uint64_t seed = 7;
    int epochs = 10;
    std::string out;
    std::string arch = "toy-a";
    double lr = 0.05;
    int n_per_class = 100;
    int test_per_class = 30;
};

int cmd_train(const TrainOpts& o) {
    Model model = usage_guard([&] { return make_toy_model(o.arch, o.seed); });
    ToyDataset train_set = generate_toy_dataset(o.seed, o.n_per_class);
    ToyDataset test_set = generate_toy_dataset(derive_seed(o.seed, 0x7E57ull), o.test_per_class);

    TrainReport report;
    if (o.epochs > 0) {
        report = train(model, train_set, test_set, o.epochs, o.lr, o.seed);
    } else {
        report.epochs = 0;
        report.train_accuracy = accuracy(model, train_set);
        report.test_accuracy = accuracy(model, test_set);
        std::cerr << "warning: --epochs 0, writing an untrained model (accuracy near chance)\n";
    }
    usage_guard([&] {
        save_weights_file(model, o.out);
        return 0;
    });
    std::printf("arch=%s epochs=%d train_accuracy=%.4f test_accuracy=%.4f final_loss=%.4f\n",
                o.arch.c_str(), report.epochs, report.train_accuracy, report.test_accuracy,
                report.final_loss);
    return 0;
}

// --- noise -----------------------------------------------------------------

struct NoiseOpts {
    std::string kind = "gaussian";
    double sigma = 0.1;
    double rate = 0.05;
    double photons = 60.0;
    uint64_t seed = 0;
    std::string in, out;
};

int cmd_noise(const NoiseOpts& o) {
    NoiseSpec spec;
    spec.kind = usage_guard([&] { return parse_noise_kind(o.kind); });
    switch (spec.kind) {
    case NoiseKind::gaussian:
    case NoiseKind::speckle: spec.strength = o.sigma; break;
    case NoiseKind::impulse: spec.strength = o.rate; break;
    case NoiseKind::shot: spec.strength = o.photons; break;
    }
    spec.seed = o.seed;
    Image img = load_image_checked(o.in);
    Image noisy = usage_guard([&] { return add_noise(img, spec); });
    usage_guard([&] {
        save_ppm_file(noisy, o.out);
        return 0;
    });
    return 0;
}

// --- denoise ---------------------------------------------------------------

struct DenoiseOpts {
    int ksize = 5;
    double sigma = 1.0;
    std::string in, out;
};

int cmd_denoise(const DenoiseOpts& o) {
    Image img = load_image_checked(o.in);
    KernelField field = usage_guard([&] { return gaussian_field(img.height, img.width, o.ksize, o.sigma); });
    usage_guard([&] {
        save_ppm_file(apply_kernels(img, field), o.out);
        return 0;
    });
    return 0;
}

// --- edges -----------------------------------------------------------------

struct EdgesOpts {
    int scales = 3;
    int dilation = 3;
    double low = 0.1;
    double high = 0.2;
    std::string in, out_dir;
};

int cmd_edges(const EdgesOpts& o) {
    Image img = load_image_checked(o.in);
    EdgeStack stack =
        usage_guard([&] { return multi_scale_edges(img, o.scales, o.dilation, o.low, o.high); });
    usage_guard([&] {
        std::filesystem::create_directories(o.out_dir);
        return 0;
    });
    for (int i = 0; i < stack.scale_count; ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "edges_sigma%g.pgm", stack.sigmas[static_cast<size_t>(i)]);
        usage_guard([&] {
            save_pgm_file(stack.maps[static_cast<size_t>(i)],
                          (std::filesystem::path(o.out_dir) / name).string());
            return 0;
        });
    }
    return 0;
}

// --- attack ----------------------------------------------------------------

struct AttackOpts {
    std::string weights;
    AttackConfig cfg;
    double lambda = 0.9;
    std::string in, out_dir;
    std::string clean;
    bool dump_kernels = false;
};

int cmd_attack(const AttackOpts& o) {
    AttackConfig cfg = o.cfg;
    cfg.set_lambda(static_cast<float>(o.lambda));
    usage_guard([&] {
        cfg.validate();
        return 0;
    });

    Model model = load_model_checked(o.weights);
    Image noisy = load_image_checked(o.in);
    if (noisy.height != model.input_size || noisy.width != model.input_size || noisy.channels != 3)
        throw UsageError("input image must be " + std::to_string(model.input_size) + "x" +
                         std::to_string(model.input_size) + " RGB for this model");

    AttackResult res = pasadena_attack(noisy, model, cfg);

    QualityReport vs_clean;
    bool have_clean = !o.clean.empty();
    if (have_clean) vs_clean = quality_report(res.adversarial, load_image_checked(o.clean));

    usage_guard([&] {
        std::filesystem::create_directories(o.out_dir);
        auto dir = std::filesystem::path(o.out_dir);
        save_ppm_file(res.adversarial, (dir / "adv.ppm").string());
        Image mask_img = Image::zeros(res.mask.height, res.mask.width, 1);
        mask_img.data = res.mask.values;
        save_pgm_file(mask_img, (dir / "mask.pgm").string());
        std::string json = attack_result_json(res, have_clean ? &vs_clean : nullptr);
        write_binary_file((dir / "result.json").string(),
                          std::vector<uint8_t>(json.begin(), json.end()));
        if (o.dump_kernels) {
            write_binary_file((dir / "ka.kf").string(),
                              serialize_field(res.adversarial_kernels));
            write_binary_file((dir / "kn.kf").string(), serialize_field(res.denoise_kernels));
        }
        return 0;
    });
    std::printf("success=%s iterations=%d y=%d final_label=%d\n", res.success ? "true" : "false",
                res.iterations_used, res.original_label, res.final_label);
    return 0;
}

// --- metrics ---------------------------------------------------------------

int cmd_metrics(const std::string& a_path, const std::string& b_path) {
    Image a = load_image_checked(a_path);
    Image b = load_image_checked(b_path);
    QualityReport q = usage_guard([&] { return quality_report(a, b); });
    std::cout << quality_to_json(q).dump(2) << "\n";
    return 0;
}

// --- benchmark ---------------------------------------------------------------

struct BenchOpts {
    std::string weights;
    std::string transfer_weights;
    std::string thetas = "0.05:0.65:7";
    std::string lambdas = "0.9,0.5,0.3,0.1";
    std::string fgsm_eps = "4,8,16,32";
    int n = 100;
    uint64_t seed = 1;
    std::string noise_kind = "gaussian";
    double sigma = 0.1;
    std::string csv;
};

int cmd_benchmark(const BenchOpts& o) {
    BenchmarkConfig cfg;
    cfg.thetas = usage_guard([&] { return parse_range_spec(o.thetas); });
    cfg.lambdas = usage_guard([&] { return parse_double_list(o.lambdas); });
    cfg.fgsm_eps = usage_guard([&] { return parse_double_list(o.fgsm_eps); });
    for (double& e : cfg.fgsm_eps) e /= 255.0;
    cfg.n_images = o.n;
    cfg.seed = o.seed;
    cfg.noise_kind = usage_guard([&] { return parse_noise_kind(o.noise_kind); });
    cfg.noise_strength = o.sigma;
    for (double l : cfg.lambdas) {
        AttackConfig check = cfg.base;
        check.set_lambda(static_cast<float>(l));
        usage_guard([&] {
            check.validate();
            return 0;
        });
    }

    Model model = load_model_checked(o.weights);
    Model transfer;
    bool have_transfer = !o.transfer_weights.empty();
    if (have_transfer) transfer = load_model_checked(o.transfer_weights);

    BenchmarkOutput out = run_benchmark(model, have_transfer ? &transfer : nullptr, cfg);
    std::string csv = benchmark_csv(out.rows);
    usage_guard([&] {
        write_binary_file(o.csv, std::vector<uint8_t>(csv.begin(), csv.end()));
        return 0;
    });
    std::fprintf(stderr, "kept %d correctly-classified noisy images; %zu rows written to %s\n",
                 out.kept, out.rows.size(), o.csv.c_str());
    return 0;
}

// --- export-dataset ----------------------------------------------------------

int cmd_export_dataset(uint64_t seed, int n_per_class, const std::string& out_dir) {
    ToyDataset set = usage_guard([&] { return generate_toy_dataset(seed, n_per_class); });
    usage_guard([&] {
        export_dataset(set, out_dir);
        return 0;
    });
    std::printf("wrote %zu images and labels.csv to %s\n", set.images.size(), out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pasadena: adversarial denoise attack toolkit"};
    app.require_subcommand(1);

    TrainOpts train_opts;
    auto* train_cmd = app.add_subcommand("train-classifier", "Train a toy classifier");
    train_cmd->add_option("--seed", train_opts.seed, "RNG seed");
    train_cmd->add_option("--epochs", train_opts.epochs, "Training epochs")
        ->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--out", train_opts.out, "Output weight file (.psdn)")->required();
    train_cmd->add_option("--arch", train_opts.arch, "Architecture: toy-a or toy-b");
    train_cmd->add_option("--lr", train_opts.lr, "Learning rate");
    train_cmd->add_option("--n-per-class", train_opts.n_per_class, "Training samples per class");
    train_cmd->add_option("--test-per-class", train_opts.test_per_class, "Test samples per class");

    NoiseOpts noise_opts;
    auto* noise_cmd = app.add_subcommand("noise", "Add gaussian/shot/impulse/speckle noise");
    noise_cmd->add_option("--kind", noise_opts.kind, "Noise kind");
    noise_cmd->add_option("--sigma", noise_opts.sigma, "Gaussian/speckle sigma");
    noise_cmd->add_option("--rate", noise_opts.rate, "Impulse flip rate");
    noise_cmd->add_option("--photons", noise_opts.photons, "Shot-noise photon scale");
    noise_cmd->add_option("--seed", noise_opts.seed, "RNG seed");
    noise_cmd->add_option("in", noise_opts.in, "Input PPM")->required();
    noise_cmd->add_option("out", noise_opts.out, "Output PPM")->required();

    DenoiseOpts denoise_opts;
    auto* denoise_cmd = app.add_subcommand("denoise", "Gaussian kernel-field denoise");
    denoise_cmd->add_option("--ksize", denoise_opts.ksize, "Kernel support (odd)");
    denoise_cmd->add_option("--sigma", denoise_opts.sigma, "Gaussian kernel width");
    denoise_cmd->add_option("in", denoise_opts.in, "Input PPM")->required();
    denoise_cmd->add_option("out", denoise_opts.out, "Output PPM")->required();

    EdgesOpts edges_opts;
    auto* edges_cmd = app.add_subcommand("edges", "Export multi-scale edge maps as PGM");
    edges_cmd->add_option("--scales", edges_opts.scales, "Number of blur scales");
    edges_cmd->add_option("--dilation", edges_opts.dilation, "Dilation width (odd)");
    edges_cmd->add_option("--low", edges_opts.low, "Hysteresis low fraction");
    edges_cmd->add_option("--high", edges_opts.high, "Hysteresis high fraction");
    edges_cmd->add_option("in", edges_opts.in, "Input image")->required();
    edges_cmd->add_option("--out-dir", edges_opts.out_dir, "Output directory")->required();

    AttackOpts attack_opts;
    auto* attack_cmd = app.add_subcommand("attack", "Run the adversarial denoise attack");
    attack_cmd->add_option("--weights", attack_opts.weights, "Model weight file")->required();
    attack_cmd->add_option("--theta", attack_opts.cfg.theta, "Mask threshold");
    attack_cmd->add_option("--lambda", attack_opts.lambda, "Attack-loss weight in (0,1]");
    attack_cmd->add_option("--alpha", attack_opts.cfg.alpha, "Ascent step size");
    attack_cmd->add_option("--iters", attack_opts.cfg.iters, "Max iterations");
    attack_cmd->add_option("--epsilon", attack_opts.cfg.epsilon, "Kernel support (odd)");
    attack_cmd->add_option("--gain", attack_opts.cfg.gain, "Mask sigmoid gain");
    attack_cmd->add_option("--seed", attack_opts.cfg.seed, "RNG seed");
    attack_cmd->add_option("--clean", attack_opts.clean, "Clean reference for extra metrics");
    attack_cmd->add_flag("--dump-kernels", attack_opts.dump_kernels, "Dump kernel fields");
    attack_cmd->add_option("in", attack_opts.in, "Noisy input PPM")->required();
    attack_cmd->add_option("--out-dir", attack_opts.out_dir, "Output directory")->required();

    std::string metrics_a, metrics_b;
    auto* metrics_cmd = app.add_subcommand("metrics", "Quality report for an image pair");
    metrics_cmd->add_option("image", metrics_a, "Image under test")->required();
    metrics_cmd->add_option("reference", metrics_b, "Reference image")->required();

    BenchOpts bench_opts;
    auto* bench_cmd = app.add_subcommand("benchmark", "Sweep theta/lambda and emit CSV curves");
    bench_cmd->add_option("--weights", bench_opts.weights, "Attacked model weights")->required();
    bench_cmd->add_option("--transfer-weights", bench_opts.transfer_weights,
                          "Transfer target weights");
    bench_cmd->add_option("--thetas", bench_opts.thetas, "Range start:end:count");
    bench_cmd->add_option("--lambdas", bench_opts.lambdas, "Comma list");
    bench_cmd->add_option("--fgsm-eps", bench_opts.fgsm_eps, "Comma list, /255 units");
    bench_cmd->add_option("--n", bench_opts.n, "Images to keep and attack");
    bench_cmd->add_option("--seed", bench_opts.seed, "Master seed");
    bench_cmd->add_option("--noise-kind", bench_opts.noise_kind, "Noise kind");
    bench_cmd->add_option("--sigma", bench_opts.sigma, "Noise strength");
    bench_cmd->add_option("--csv", bench_opts.csv, "Output CSV path")->required();

    uint64_t export_seed = 7;
    int export_n = 10;
    std::string export_dir;
    auto* export_cmd = app.add_subcommand("export-dataset", "Write toy dataset as PPM + CSV");
    export_cmd->add_option("--seed", export_seed, "Dataset seed");
    export_cmd->add_option("--n-per-class", export_n, "Samples per class");
    export_cmd->add_option("--out-dir", export_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*train_cmd) return cmd_train(train_opts);
        if (*noise_cmd) return cmd_noise(noise_opts);
        if (*denoise_cmd) return cmd_denoise(denoise_opts);
        if (*edges_cmd) return cmd_edges(edges_opts);
        if (*attack_cmd) return cmd_attack(attack_opts);
        if (*metrics_cmd) return cmd_metrics(metrics_a, metrics_b);
        if (*bench_cmd) return cmd_benchmark(bench_opts);
        if (*export_cmd) return cmd_export_dataset(export_seed, export_n, export_dir);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
