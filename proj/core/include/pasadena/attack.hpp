#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pasadena/classifier.hpp"
#include "pasadena/edges.hpp"
#include "pasadena/image.hpp"
#include "pasadena/kernel_field.hpp"
#include "pasadena/metrics.hpp"
#include "pasadena/tape.hpp"

namespace pasadena {

/// Attack hyper-parameters. Defaults are the reference configuration:
/// kernel support 5, lambda 0.9 (gamma is always 1-lambda), threshold 0.45,
/// step size 0.1, 10 iterations, mask gain 100.
struct AttackConfig {
    int epsilon = 5;      // kernel support (odd)
    float lambda = 0.9f;  // attack-loss weight
    float gamma = 0.1f;   // kernel-similarity weight, kept at 1-lambda
    float theta = 0.45f;  // mask threshold
    float alpha = 0.1f;   // ascent step size
    int iters = 10;       // max iterations
    float gain = 100.0f;  // mask sigmoid sharpness
    uint64_t seed = 0;

    // provider knobs
    double denoise_sigma = 1.0;
    int edge_scales = 3;
    int edge_dilation = 3;
    double canny_low = 0.1;
    double canny_high = 0.2;

    void set_lambda(float l) {
        lambda = l;
        gamma = 1.0f - l;
    }
    /// Full validation for user-supplied configurations. alpha may be zero
    /// (a degenerate no-movement attack); negative values are rejected.
    void validate() const;
};

struct AttackResult {
    Image adversarial;
    Mask mask;
    KernelField adversarial_kernels; // final ka
    KernelField denoise_kernels;     // kn from the provider
    std::vector<float> scale_weights;
    bool success = false;
    int iterations_used = 0;
    int original_label = -1;
    int final_label = -1;
    std::vector<float> objective_trace; // objective value entering each iteration
    QualityReport vs_input;             // adversarial vs the noisy input
    std::string note;                   // diagnostic, e.g. non-finite abort
    AttackConfig config;
};

using DenoiseProvider = std::function<KernelField(const Image&, const AttackConfig&)>;
using EdgeProvider = std::function<EdgeStack(const Image&, const AttackConfig&)>;

/// Default providers: a normalized Gaussian field (support epsilon, width
/// denoise_sigma) and the multi-scale Canny stack.
KernelField gaussian_denoise_provider(const Image& img, const AttackConfig& cfg);
EdgeStack canny_edge_provider(const Image& img, const AttackConfig& cfg);

/// Everything the ascent loop differentiates, recorded on one tape:
/// mask from the weight leaves, the mixed filter from the kernel leaf,
/// the classifier, and the combined objective
/// lambda * J1(model(filtered), y) - gamma * J2(ka, kn).
struct ObjectiveGraph {
    Var objective;
    Var j1;
    Var j2;
    Var ka;             // [H*W, K*K] leaf
    std::vector<Var> w; // scalar leaves, one per edge scale
    Var mask;           // [H*W]
    Var filtered;       // [C,H,W], after clamping
};

ObjectiveGraph build_objective_graph(Tape& tape, const Image& noisy, const EdgeStack& edges,
                                     const std::vector<float>& weights, const Tensor& ka_values,
                                     const KernelField& kn, const Model& model, int label,
                                     const AttackConfig& cfg);

struct ObjectiveValue {
    float value = 0.0f;
    float j1 = 0.0f;
    float j2 = 0.0f;
};

/// Pure evaluation of the objective for a given mask (no edge stack, no
/// weight parameterization).
ObjectiveValue objective(const Image& noisy, const Mask& mask, const KernelField& ka,
                         const KernelField& kn, const Model& model, int label, float lambda,
                         float gamma);

/// Joint gradient ascent on the adversarial kernels and the edge-scale
/// weights, with early stop at the first misclassified iterate. The label
/// is the model's own prediction on the noisy input.
AttackResult pasadena_attack(const Image& noisy, const Model& model,
                             const EdgeProvider& edge_provider,
                             const DenoiseProvider& denoise_provider, const AttackConfig& cfg);

/// Convenience overload with the default providers.
AttackResult pasadena_attack(const Image& noisy, const Model& model, const AttackConfig& cfg);

/// Single-step sign attack: x + eps * sign(dJ1/dx), clamped to [0,1].
Image fgsm_attack(const Image& noisy, const Model& model, float eps);

/// Result JSON: {success, iterations, y, final_label, objective_trace,
/// metrics, config}. vs_clean metrics are included when a reference is
/// supplied.
std::string attack_result_json(const AttackResult& result, const QualityReport* vs_clean);

} // namespace pasadena
