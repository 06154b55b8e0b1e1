#include "pasadena/attack.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "pasadena/rng.hpp"

namespace pasadena {

void AttackConfig::validate() const {
    if (!(lambda > 0.0f && lambda <= 1.0f))
        throw std::invalid_argument("lambda must be in (0,1]");
    if (std::fabs((lambda + gamma) - 1.0f) > 1e-6f)
        throw std::invalid_argument("gamma must equal 1 - lambda");
    if (epsilon < 1 || epsilon % 2 == 0)
        throw std::invalid_argument("epsilon (kernel support) must be odd and >= 1");
    if (alpha < 0.0f) throw std::invalid_argument("alpha must be non-negative");
    if (iters < 1) throw std::invalid_argument("iters must be >= 1");
    if (gain <= 0.0f) throw std::invalid_argument("gain must be positive");
    if (!(theta >= 0.0f && theta <= 1.0f))
        throw std::invalid_argument("theta must be in [0,1]");
    if (edge_scales < 1) throw std::invalid_argument("edge scales must be >= 1");
    if (edge_dilation < 1 || edge_dilation % 2 == 0)
        throw std::invalid_argument("edge dilation must be odd and >= 1");
}

KernelField gaussian_denoise_provider(const Image& img, const AttackConfig& cfg) {
    return gaussian_field(img.height, img.width, cfg.epsilon, cfg.denoise_sigma);
}

EdgeStack canny_edge_provider(const Image& img, const AttackConfig& cfg) {
    return multi_scale_edges(img, cfg.edge_scales, cfg.edge_dilation, cfg.canny_low,
                             cfg.canny_high);
}

ObjectiveGraph build_objective_graph(Tape& tape, const Image& noisy, const EdgeStack& edges,
                                     const std::vector<float>& weights, const Tensor& ka_values,
                                     const KernelField& kn, const Model& model, int label,
                                     const AttackConfig& cfg) {
    ObjectiveGraph g;
    for (float w : weights) g.w.push_back(tape.input(Tensor::scalar(w)));
    g.ka = tape.input(ka_values);

    MaskConfig mask_cfg{cfg.theta, cfg.gain};
    g.mask = weight_map_on_tape(tape, edges, g.w, mask_cfg);
    g.filtered = tape.clamp01(mix_filter(tape, noisy, g.mask, g.ka, kn));

    ForwardVars fv = model_forward(tape, model, g.filtered, false);
    g.j1 = tape.cross_entropy(fv.logits, label);
    g.j2 = kernel_l2_term(tape, g.ka, kn);
    g.objective = tape.sub(tape.affine(g.j1, cfg.lambda, 0.0f), tape.affine(g.j2, cfg.gamma, 0.0f));
    return g;
}

ObjectiveValue objective(const Image& noisy, const Mask& mask, const KernelField& ka,
                         const KernelField& kn, const Model& model, int label, float lambda,
                         float gamma) {
    Image filtered = mix_apply(noisy, mask, ka, kn);
    Tape tape;
    Var in = tape.constant(image_to_chw(filtered));
    ForwardVars fv = model_forward(tape, model, in, false);
    Var j1 = tape.cross_entropy(fv.logits, label);
    ObjectiveValue v;
    v.j1 = tape.value(j1)[0];
    v.j2 = static_cast<float>(kernel_l2(ka, kn));
    v.value = lambda * v.j1 - gamma * v.j2;
    return v;
}

namespace {

KernelField field_from_tensor(const Tensor& t, int height, int width, int ksize) {
    KernelField f;
    f.height = height;
    f.width = width;
    f.ksize = ksize;
    f.normalized = false;
    f.weights = t.data;
    return f;
}

} // namespace

AttackResult pasadena_attack(const Image& noisy, const Model& model,
                             const EdgeProvider& edge_provider,
                             const DenoiseProvider& denoise_provider, const AttackConfig& cfg) {
    AttackResult res;
    res.config = cfg;

    KernelField kn = denoise_provider(noisy, cfg);
    EdgeStack edges = edge_provider(noisy, cfg);

    Rng rng(derive_seed(cfg.seed, 0xA77ACull));
    ScaleWeights weights = ScaleWeights::random_init(edges.scale_count, rng);

    res.original_label = predict(model, noisy).label;
    int y = res.original_label;

    int hw = noisy.height * noisy.width;
    int area = cfg.epsilon * cfg.epsilon;
    Tensor ka_values(std::vector<int>{hw, area}, kn.weights);

    MaskConfig mask_cfg{cfg.theta, cfg.gain};
    res.mask = weight_map(edges, weights, mask_cfg);
    KernelField ka_field = field_from_tensor(ka_values, noisy.height, noisy.width, cfg.epsilon);
    res.adversarial = mix_apply(noisy, res.mask, ka_field, kn);
    res.scale_weights = weights.w;
    res.final_label = predict(model, res.adversarial).label;
    res.iterations_used = 0;

    for (int t = 1; t <= cfg.iters; ++t) {
        Tape tape;
        ObjectiveGraph graph =
            build_objective_graph(tape, noisy, edges, weights.w, ka_values, kn, model, y, cfg);
        float obj = tape.value(graph.objective)[0];
        if (!std::isfinite(obj)) {
            res.note = "aborted: non-finite objective at iteration " + std::to_string(t);
            res.success = false;
            break;
        }
        res.objective_trace.push_back(obj);
        tape.backward(graph.objective);

        const Tensor& gka = tape.grad(graph.ka);
        bool finite = gka.all_finite();
        std::vector<float> gw(weights.w.size());
        for (size_t i = 0; i < weights.w.size(); ++i) {
            gw[i] = tape.grad(graph.w[i])[0];
            finite = finite && std::isfinite(gw[i]);
        }
        if (!finite) {
            res.note = "aborted: non-finite gradient at iteration " + std::to_string(t);
            res.success = false;
            break;
        }

        // plain ascent, no sign or momentum
        for (int i = 0; i < ka_values.size(); ++i) ka_values[i] += cfg.alpha * gka[i];
        for (size_t i = 0; i < weights.w.size(); ++i) weights.w[i] += cfg.alpha * gw[i];

        res.mask = weight_map(edges, weights, mask_cfg);
        ka_field.weights = ka_values.data;
        res.adversarial = mix_apply(noisy, res.mask, ka_field, kn);
        res.scale_weights = weights.w;
        res.iterations_used = t;

        res.final_label = predict(model, res.adversarial).label;
        if (res.final_label != y) {
            res.success = true;
            break;
        }
    }

    res.vs_input = quality_report(res.adversarial, noisy);
    res.adversarial_kernels = std::move(ka_field);
    res.denoise_kernels = std::move(kn);
    return res;
}

AttackResult pasadena_attack(const Image& noisy, const Model& model, const AttackConfig& cfg) {
    return pasadena_attack(noisy, model, canny_edge_provider, gaussian_denoise_provider, cfg);
}

Image fgsm_attack(const Image& noisy, const Model& model, float eps) {
    if (eps < 0.0f) throw std::invalid_argument("fgsm: eps must be non-negative");
    int y = predict(model, noisy).label;
    auto [loss, grad] = loss_and_grad(model, noisy, y);
    Image adv = noisy;
    for (int c = 0; c < adv.channels; ++c)
        for (int yy = 0; yy < adv.height; ++yy)
            for (int xx = 0; xx < adv.width; ++xx) {
                float g = grad.data[(static_cast<size_t>(c) * adv.height + yy) * adv.width + xx];
                float step = g > 0.0f ? eps : (g < 0.0f ? -eps : 0.0f);
                adv.at(yy, xx, c) += step;
            }
    adv.clamp_unit();
    return adv;
}

namespace {

nlohmann::json quality_json(const QualityReport& q) {
    return {{"psnr", q.psnr_db},
            {"psnr_local", q.psnr_local_db},
            {"ssim", q.ssim},
            {"mscn_mean", q.mscn.mean},
            {"mscn_variance", q.mscn.variance}};
}

} // namespace

std::string attack_result_json(const AttackResult& r, const QualityReport* vs_clean) {
    nlohmann::json metrics{{"vs_input", quality_json(r.vs_input)}};
    if (vs_clean) metrics["vs_clean"] = quality_json(*vs_clean);
    nlohmann::json j{
        {"success", r.success},
        {"iterations", r.iterations_used},
        {"y", r.original_label},
        {"final_label", r.final_label},
        {"objective_trace", r.objective_trace},
        {"metrics", metrics},
        {"config",
         {{"epsilon", r.config.epsilon},
          {"lambda", r.config.lambda},
          {"gamma", r.config.gamma},
          {"theta", r.config.theta},
          {"alpha", r.config.alpha},
          {"iters", r.config.iters},
          {"gain", r.config.gain},
          {"seed", r.config.seed},
          {"denoise_sigma", r.config.denoise_sigma},
          {"edge_scales", r.config.edge_scales},
          {"edge_dilation", r.config.edge_dilation}}},
    };
    if (!r.note.empty()) j["note"] = r.note;
    return j.dump(2) + "\n";
}

} // namespace pasadena
