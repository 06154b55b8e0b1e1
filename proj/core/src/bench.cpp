#include "pasadena/bench.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pasadena/kernel_field.hpp"
#include "pasadena/metrics.hpp"
#include "pasadena/parallel.hpp"
#include "pasadena/rng.hpp"

namespace pasadena {

namespace {
// Salt constants keep the sample stream, the noise stream and the
// per-attack streams decorrelated under one master seed.
constexpr uint64_t kNoiseSalt = 0x4015Eull;
constexpr uint64_t kAttackSalt = 0xA77AC4ull;
} // namespace

EvalSet make_eval_set(const Model& model, int n, uint64_t seed, NoiseKind kind, double strength) {
    EvalSet set;
    set.noise_kind = kind;
    set.noise_strength = strength;
    set.seed = seed;
    uint64_t index = 0;
    uint64_t limit = static_cast<uint64_t>(n) * 8;
    while (set.items.size() < static_cast<size_t>(n) && index < limit) {
        int label = 0;
        Image clean = make_toy_sample(seed, index, label, model.input_size);
        NoiseSpec spec{kind, strength, derive_seed(derive_seed(seed, kNoiseSalt), index)};
        Image noisy = add_noise(clean, spec);
        if (predict(model, noisy).label == label)
            set.items.push_back(EvalItem{std::move(clean), std::move(noisy), label});
        ++index;
    }
    return set;
}

SetBaseline eval_baseline(const EvalSet& set, const AttackConfig& cfg, const Model* transfer,
                          int threads) {
    int n = static_cast<int>(set.items.size());
    SetBaseline base;
    if (n == 0) return base;

    struct PerItem {
        double psnr_n, psnrl_n, ssim_n, mscn_clean, mscn_noisy;
        double psnrl_d, ssim_d;
        int transfer_miss;
    };
    std::vector<PerItem> rows(static_cast<size_t>(n));
    parallel_for(n, threads, [&](int i) {
        const EvalItem& item = set.items[static_cast<size_t>(i)];
        PerItem& r = rows[static_cast<size_t>(i)];
        r.psnr_n = psnr(item.noisy, item.clean);
        r.psnrl_n = psnr_local(item.noisy, item.clean);
        r.ssim_n = ssim(item.noisy, item.clean);
        r.mscn_clean = mscn(item.clean).summary.variance;
        r.mscn_noisy = mscn(item.noisy).summary.variance;
        Image denoised = apply_kernels(item.noisy, gaussian_denoise_provider(item.noisy, cfg));
        r.psnrl_d = psnr_local(denoised, item.clean);
        r.ssim_d = ssim(denoised, item.clean);
        r.transfer_miss = transfer && predict(*transfer, denoised).label != item.label ? 1 : 0;
    });
    for (const PerItem& r : rows) {
        base.mean_psnr_noisy += r.psnr_n;
        base.mean_psnr_local_noisy += r.psnrl_n;
        base.mean_ssim_noisy += r.ssim_n;
        base.mean_mscn_var_clean += r.mscn_clean;
        base.mean_mscn_var_noisy += r.mscn_noisy;
        base.mean_psnr_local_denoised += r.psnrl_d;
        base.mean_ssim_denoised += r.ssim_d;
        base.transfer_miss_denoised += r.transfer_miss;
    }
    base.mean_psnr_noisy /= n;
    base.mean_psnr_local_noisy /= n;
    base.mean_ssim_noisy /= n;
    base.mean_mscn_var_clean /= n;
    base.mean_mscn_var_noisy /= n;
    base.mean_psnr_local_denoised /= n;
    base.mean_ssim_denoised /= n;
    base.transfer_miss_denoised /= n;
    return base;
}

namespace {

struct ItemOutcome {
    int success = 0;
    int transfer_success = 0;
    double psnr_v = 0.0, psnrl_v = 0.0, ssim_v = 0.0, mscn_var = 0.0;
    int iterations = 0;
};

CellOutcome reduce(const std::vector<ItemOutcome>& rows) {
    CellOutcome out;
    out.n = static_cast<int>(rows.size());
    if (out.n == 0) return out;
    for (const ItemOutcome& r : rows) {
        out.success_rate += r.success;
        out.transfer_success_rate += r.transfer_success;
        out.mean_psnr += r.psnr_v;
        out.mean_psnr_local += r.psnrl_v;
        out.mean_ssim += r.ssim_v;
        out.mean_mscn_variance += r.mscn_var;
        out.mean_iterations += r.iterations;
    }
    out.success_rate /= out.n;
    out.transfer_success_rate /= out.n;
    out.mean_psnr /= out.n;
    out.mean_psnr_local /= out.n;
    out.mean_ssim /= out.n;
    out.mean_mscn_variance /= out.n;
    out.mean_iterations /= out.n;
    return out;
}

} // namespace

CellOutcome attack_cell(const Model& model, const Model* transfer, const EvalSet& set,
                        const AttackConfig& cfg, int threads) {
    int n = static_cast<int>(set.items.size());
    std::vector<ItemOutcome> rows(static_cast<size_t>(n));
    parallel_for(n, threads, [&](int i) {
        const EvalItem& item = set.items[static_cast<size_t>(i)];
        AttackConfig per_image = cfg;
        // per-image stream, independent of theta/lambda so sweeps share
        // the same weight initializations
        per_image.seed = derive_seed(derive_seed(set.seed, kAttackSalt), static_cast<uint64_t>(i));
        AttackResult res = pasadena_attack(item.noisy, model, per_image);
        ItemOutcome& r = rows[static_cast<size_t>(i)];
        r.success = res.success ? 1 : 0;
        r.iterations = res.iterations_used;
        r.psnr_v = psnr(res.adversarial, item.clean);
        r.psnrl_v = psnr_local(res.adversarial, item.clean);
        r.ssim_v = ssim(res.adversarial, item.clean);
        r.mscn_var = mscn(res.adversarial).summary.variance;
        if (transfer) r.transfer_success = predict(*transfer, res.adversarial).label != item.label;
    });
    return reduce(rows);
}

CellOutcome fgsm_cell(const Model& model, const Model* transfer, const EvalSet& set, double eps,
                      int threads) {
    int n = static_cast<int>(set.items.size());
    std::vector<ItemOutcome> rows(static_cast<size_t>(n));
    parallel_for(n, threads, [&](int i) {
        const EvalItem& item = set.items[static_cast<size_t>(i)];
        Image adv = fgsm_attack(item.noisy, model, static_cast<float>(eps));
        ItemOutcome& r = rows[static_cast<size_t>(i)];
        r.success = predict(model, adv).label != item.label ? 1 : 0;
        r.iterations = 1;
        r.psnr_v = psnr(adv, item.clean);
        r.psnrl_v = psnr_local(adv, item.clean);
        r.ssim_v = ssim(adv, item.clean);
        r.mscn_var = mscn(adv).summary.variance;
        if (transfer) r.transfer_success = predict(*transfer, adv).label != item.label;
    });
    return reduce(rows);
}

BenchmarkOutput run_benchmark(const Model& model, const Model* transfer,
                              const BenchmarkConfig& cfg) {
    BenchmarkOutput out;
    EvalSet set = make_eval_set(model, cfg.n_images, cfg.seed, cfg.noise_kind, cfg.noise_strength);
    out.kept = static_cast<int>(set.items.size());
    out.baseline = eval_baseline(set, cfg.base, transfer, cfg.threads);

    auto to_row = [&](double theta, double lambda, const CellOutcome& cell) {
        BenchmarkRow row;
        row.theta = theta;
        row.lambda = lambda;
        row.success_rate = cell.success_rate;
        row.transfer_success_rate = cell.transfer_success_rate;
        row.mean_psnr = cell.mean_psnr;
        row.mean_psnr_local = cell.mean_psnr_local;
        row.mean_ssim = cell.mean_ssim;
        row.mean_mscn_variance = cell.mean_mscn_variance;
        row.n_images = cell.n;
        row.seed = cfg.seed;
        return row;
    };

    for (double theta : cfg.thetas) {
        for (double lambda : cfg.lambdas) {
            AttackConfig ac = cfg.base;
            ac.theta = static_cast<float>(theta);
            ac.set_lambda(static_cast<float>(lambda));
            out.rows.push_back(to_row(theta, lambda, attack_cell(model, transfer, set, ac,
                                                                 cfg.threads)));
        }
    }
    for (double eps : cfg.fgsm_eps)
        out.rows.push_back(to_row(-1.0, eps, fgsm_cell(model, transfer, set, eps, cfg.threads)));
    return out;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
    std::string csv = "theta,lambda,success_rate,transfer_success_rate,mean_psnr,mean_psnr_local,"
                      "mean_ssim,mean_mscn_variance,n_images,seed\n";
    char line[512];
    for (const BenchmarkRow& r : rows) {
        std::snprintf(line, sizeof(line),
                      "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%d,%llu\n", r.theta, r.lambda,
                      r.success_rate, r.transfer_success_rate, r.mean_psnr, r.mean_psnr_local,
                      r.mean_ssim, r.mean_mscn_variance, r.n_images,
                      static_cast<unsigned long long>(r.seed));
        csv += line;
    }
    return csv;
}

std::vector<double> parse_range_spec(const std::string& spec) {
    double start = 0.0, end = 0.0;
    int count = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &start, &end, &count) != 3 || count < 1)
        throw std::invalid_argument("bad range spec '" + spec + "', expected start:end:count");
    std::vector<double> values;
    if (count == 1) {
        values.push_back(start);
        return values;
    }
    for (int i = 0; i < count; ++i)
        values.push_back(start + (end - start) * static_cast<double>(i) / (count - 1));
    return values;
}

std::vector<double> parse_double_list(const std::string& spec) {
    std::vector<double> values;
    size_t pos = 0;
    while (pos < spec.size()) {
        size_t comma = spec.find(',', pos);
        if (comma == std::string::npos) comma = spec.size();
        std::string item = spec.substr(pos, comma - pos);
        try {
            size_t used = 0;
            double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument("");
            values.push_back(v);
        } catch (...) {
            throw std::invalid_argument("bad number '" + item + "' in list '" + spec + "'");
        }
        pos = comma + 1;
    }
    if (values.empty()) throw std::invalid_argument("empty list '" + spec + "'");
    return values;
}

} // namespace pasadena
