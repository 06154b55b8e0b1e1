#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pasadena/tensor.hpp"

namespace pasadena {

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
    bool valid() const { return tape != nullptr && id >= 0; }
};

/// Reverse-mode autodiff over float32 tensors.
///
/// Operations record themselves in construction order, which is already a
/// topological order, so one reverse sweep propagates gradients to every
/// ancestor of the loss. A tape is single-threaded; recorded values are
/// immutable once written.
class Tape {
public:
    /// Differentiable leaf.
    Var input(Tensor v);
    /// Non-differentiable leaf; backward never accumulates into it.
    Var constant(Tensor v);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    /// Elementwise x * s with a runtime scalar s (1-element tensor).
    Var scale(Var x, Var s);
    /// Elementwise a*x + b with compile-time constants a, b.
    Var affine(Var x, float a, float b);
    Var sum(Var x);
    /// W [m,n] times x [n] -> [m].
    Var matmul(Var w, Var x);
    /// x [C,H,W], w [O,C,K,K] (K odd), b [O]; zero-padded "same" convolution.
    Var conv2d(Var x, Var w, Var b);
    /// 2x2 max pooling, stride 2; H and W must be even.
    Var maxpool2(Var x);
    /// Same data, new shape (sizes must agree); gradient passes through.
    Var reshape(Var x, std::vector<int> shape);
    Var relu(Var x);
    Var sigmoid(Var x);
    Var softmax(Var logits);
    /// -log softmax(logits)[label], fused for stability.
    Var cross_entropy(Var logits, int label);
    /// Sum of squared entries (squared L2 norm).
    Var squared_norm(Var x);
    /// Clamp to [0,1]. Gradient passes through unchanged inside the unit
    /// interval and is zero outside.
    Var clamp01(Var x);

    /// Backward function of a custom op: receives the output gradient and
    /// must accumulate into the (pre-allocated) input gradients. A null
    /// entry in `input_grads` means that input does not require gradient.
    using CustomBackward =
        std::function<void(const Tensor& out_grad, const std::vector<Tensor*>& input_grads)>;

    /// Record an externally computed differentiable op. Used by modules that
    /// need structured kernels (e.g. per-pixel filtering) without routing
    /// them through the generic dense ops.
    Var custom(const std::vector<Var>& inputs, Tensor value, CustomBackward backward);

    /// Propagate gradients from a scalar loss to every recorded ancestor.
    /// Rejects non-scalar losses. May be called repeatedly; each call resets
    /// previous gradients.
    void backward(Var loss);

    const Tensor& value(Var v) const;
    /// Gradient of the last backward() loss w.r.t. v (zeros if unreached).
    const Tensor& grad(Var v);

    /// Bit pattern of every data-dependent branch taken during the forward
    /// pass (relu sign, maxpool argmax, clamp saturation). Two evaluations
    /// with equal signatures lie on the same smooth piece of the function.
    const std::vector<uint8_t>& branch_signature() const { return branches_; }

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        std::vector<int> inputs;
        bool requires_grad = false;
        std::function<void(Tape&, int)> backprop; // empty for leaves
    };

    int push(Tensor value, std::vector<int> inputs, bool requires_grad,
             std::function<void(Tape&, int)> backprop);
    bool any_requires(const std::vector<int>& ids) const;
    void check(Var v, const char* op) const;

    /// Gradient buffer of `id`, allocated as zeros on first touch; null when
    /// the node does not require a gradient.
    Tensor* grad_target(int id);

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
    std::vector<uint8_t> branches_;
};

/// Builds a scalar expression from an input leaf; used by grad_check.
using ScalarFn = std::function<Var(Tape&, Var)>;

struct GradCheckCoord {
    int index = 0;
    float analytic = 0.0f;
    float numeric = 0.0f;
    float rel_error = 0.0f;
    bool kink = false; // non-differentiable point; excluded from pass/fail
    bool pass = true;
};

struct GradCheckReport {
    std::vector<GradCheckCoord> coords;
    float max_rel_error = 0.0f; // over non-kink coordinates
    int kinks = 0;
    bool pass = true;
};

/// Compares the tape gradient of fn at `point` against central finite
/// differences with step h. Coordinates where the perturbed evaluations
/// cross a relu/maxpool/clamp branch are flagged as non-differentiable
/// points and excluded. Relative error uses max(|analytic|,|numeric|,1e-3)
/// as denominator.
GradCheckReport grad_check(const ScalarFn& fn, const Tensor& point, float h, float tol);

} // namespace pasadena
