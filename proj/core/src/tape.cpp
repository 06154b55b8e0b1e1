#include "pasadena/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pasadena {

int Tape::push(Tensor value, std::vector<int> inputs, bool requires_grad,
               std::function<void(Tape&, int)> backprop) {
    nodes_.push_back(Node{std::move(value), std::move(inputs), requires_grad, std::move(backprop)});
    return static_cast<int>(nodes_.size()) - 1;
}

bool Tape::any_requires(const std::vector<int>& ids) const {
    return std::any_of(ids.begin(), ids.end(),
                       [&](int i) { return nodes_[static_cast<size_t>(i)].requires_grad; });
}

void Tape::check(Var v, const char* op) const {
    if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument(std::string(op) + ": variable does not belong to this tape");
}

Var Tape::input(Tensor v) { return Var{this, push(std::move(v), {}, true, {})}; }

Var Tape::constant(Tensor v) { return Var{this, push(std::move(v), {}, false, {})}; }

const Tensor& Tape::value(Var v) const {
    check(v, "value");
    return nodes_[static_cast<size_t>(v.id)].value;
}

Tensor* Tape::grad_target(int id) {
    auto& node = nodes_[static_cast<size_t>(id)];
    if (!node.requires_grad) return nullptr;
    auto& g = grads_[static_cast<size_t>(id)];
    if (g.empty()) g = Tensor::zeros(node.value.shape);
    return &g;
}

const Tensor& Tape::grad(Var v) {
    check(v, "grad");
    if (grads_.size() != nodes_.size()) grads_.resize(nodes_.size());
    auto& g = grads_[static_cast<size_t>(v.id)];
    if (g.empty()) g = Tensor::zeros(nodes_[static_cast<size_t>(v.id)].value.shape);
    return g;
}

Var Tape::add(Var a, Var b) {
    check(a, "add");
    check(b, "add");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    require_same_shape("add", av, bv);
    Tensor out = av;
    for (int i = 0; i < out.size(); ++i) out[i] += bv[i];
    int ia = a.id, ib = b.id;
    return Var{this, push(std::move(out), {ia, ib}, any_requires({ia, ib}),
                          [ia, ib](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              if (Tensor* ga = t.grad_target(ia))
                                  for (int i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
                              if (Tensor* gb = t.grad_target(ib))
                                  for (int i = 0; i < g.size(); ++i) (*gb)[i] += g[i];
                          })};
}

Var Tape::sub(Var a, Var b) {
    check(a, "sub");
    check(b, "sub");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    require_same_shape("sub", av, bv);
    Tensor out = av;
    for (int i = 0; i < out.size(); ++i) out[i] -= bv[i];
    int ia = a.id, ib = b.id;
    return Var{this, push(std::move(out), {ia, ib}, any_requires({ia, ib}),
                          [ia, ib](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              if (Tensor* ga = t.grad_target(ia))
                                  for (int i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
                              if (Tensor* gb = t.grad_target(ib))
                                  for (int i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
                          })};
}

Var Tape::mul(Var a, Var b) {
    check(a, "mul");
    check(b, "mul");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    require_same_shape("mul", av, bv);
    Tensor out = av;
    for (int i = 0; i < out.size(); ++i) out[i] *= bv[i];
    int ia = a.id, ib = b.id;
    return Var{this, push(std::move(out), {ia, ib}, any_requires({ia, ib}),
                          [ia, ib](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              const Tensor& av2 = t.nodes_[static_cast<size_t>(ia)].value;
                              const Tensor& bv2 = t.nodes_[static_cast<size_t>(ib)].value;
                              if (Tensor* ga = t.grad_target(ia))
                                  for (int i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv2[i];
                              if (Tensor* gb = t.grad_target(ib))
                                  for (int i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av2[i];
                          })};
}

Var Tape::scale(Var x, Var s) {
    check(x, "scale");
    check(s, "scale");
    const Tensor& xv = value(x);
    const Tensor& sv = value(s);
    if (sv.size() != 1) throw ShapeError("scale: scalar operand must have exactly 1 element");
    Tensor out = xv;
    float sc = sv[0];
    for (int i = 0; i < out.size(); ++i) out[i] *= sc;
    int ix = x.id, is = s.id;
    return Var{this, push(std::move(out), {ix, is}, any_requires({ix, is}),
                          [ix, is](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              const Tensor& xv2 = t.nodes_[static_cast<size_t>(ix)].value;
                              float sc2 = t.nodes_[static_cast<size_t>(is)].value[0];
                              if (Tensor* gx = t.grad_target(ix))
                                  for (int i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * sc2;
                              if (Tensor* gs = t.grad_target(is)) {
                                  double acc = 0.0;
                                  for (int i = 0; i < g.size(); ++i)
                                      acc += static_cast<double>(g[i]) * xv2[i];
                                  (*gs)[0] += static_cast<float>(acc);
                              }
                          })};
}

Var Tape::affine(Var x, float a, float b) {
    check(x, "affine");
    Tensor out = value(x);
    for (int i = 0; i < out.size(); ++i) out[i] = a * out[i] + b;
    int ix = x.id;
    return Var{this, push(std::move(out), {ix}, any_requires({ix}),
                          [ix, a](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              if (Tensor* gx = t.grad_target(ix))
                                  for (int i = 0; i < g.size(); ++i) (*gx)[i] += a * g[i];
                          })};
}

Var Tape::sum(Var x) {
    check(x, "sum");
    const Tensor& xv = value(x);
    double acc = 0.0;
    for (int i = 0; i < xv.size(); ++i) acc += xv[i];
    int ix = x.id;
    return Var{this, push(Tensor::scalar(static_cast<float>(acc)), {ix}, any_requires({ix}),
                          [ix](Tape& t, int self) {
                              float g = t.grads_[static_cast<size_t>(self)][0];
                              if (Tensor* gx = t.grad_target(ix))
                                  for (int i = 0; i < gx->size(); ++i) (*gx)[i] += g;
                          })};
}

Var Tape::matmul(Var w, Var x) {
    check(w, "matmul");
    check(x, "matmul");
    const Tensor& wv = value(w);
    const Tensor& xv = value(x);
    if (wv.shape.size() != 2 || xv.shape.size() != 1 || wv.shape[1] != xv.shape[0])
        throw ShapeError("matmul: expected [m,n] x [n], got " + wv.shape_str() + " x " +
                         xv.shape_str());
    int m = wv.shape[0], n = wv.shape[1];
    Tensor out = Tensor::zeros({m});
    for (int i = 0; i < m; ++i) {
        const float* row = &wv.data[static_cast<size_t>(i) * n];
        float acc = 0.0f;
        for (int j = 0; j < n; ++j) acc += row[j] * xv[j];
        out[i] = acc;
    }
    int iw = w.id, ix = x.id;
    return Var{this, push(std::move(out), {iw, ix}, any_requires({iw, ix}),
                          [iw, ix, m, n](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              const Tensor& wv2 = t.nodes_[static_cast<size_t>(iw)].value;
                              const Tensor& xv2 = t.nodes_[static_cast<size_t>(ix)].value;
                              if (Tensor* gw = t.grad_target(iw)) {
                                  for (int i = 0; i < m; ++i) {
                                      float gi = g[i];
                                      float* grow = &gw->data[static_cast<size_t>(i) * n];
                                      for (int j = 0; j < n; ++j) grow[j] += gi * xv2[j];
                                  }
                              }
                              if (Tensor* gx = t.grad_target(ix)) {
                                  for (int i = 0; i < m; ++i) {
                                      float gi = g[i];
                                      const float* row = &wv2.data[static_cast<size_t>(i) * n];
                                      for (int j = 0; j < n; ++j) (*gx)[j] += gi * row[j];
                                  }
                              }
                          })};
}

Var Tape::conv2d(Var x, Var w, Var b) {
    check(x, "conv2d");
    check(w, "conv2d");
    check(b, "conv2d");
    const Tensor& xv = value(x);
    const Tensor& wv = value(w);
    const Tensor& bv = value(b);
    if (xv.shape.size() != 3 || wv.shape.size() != 4)
        throw ShapeError("conv2d: expected image [C,H,W] and weights [O,C,K,K], got " +
                         xv.shape_str() + " and " + wv.shape_str());
    int C = xv.shape[0], H = xv.shape[1], W = xv.shape[2];
    int O = wv.shape[0], K = wv.shape[2];
    if (wv.shape[1] != C || wv.shape[3] != K || K % 2 == 0)
        throw ShapeError("conv2d: weights " + wv.shape_str() + " do not match image channels " +
                         std::to_string(C) + " or kernel is even");
    if (bv.shape != std::vector<int>{O})
        throw ShapeError("conv2d: bias " + bv.shape_str() + " must be [" + std::to_string(O) + "]");
    int pad = K / 2;

    Tensor out = Tensor::zeros({O, H, W});
    for (int o = 0; o < O; ++o) {
        float* op = &out.data[static_cast<size_t>(o) * H * W];
        std::fill(op, op + static_cast<size_t>(H) * W, bv[o]);
    }
    for (int o = 0; o < O; ++o) {
        for (int c = 0; c < C; ++c) {
            for (int ky = 0; ky < K; ++ky) {
                for (int kx = 0; kx < K; ++kx) {
                    float wgt = wv.data[((static_cast<size_t>(o) * C + c) * K + ky) * K + kx];
                    int dy = ky - pad, dx = kx - pad;
                    int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                    int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                    for (int y = y0; y < y1; ++y) {
                        float* orow = &out.data[(static_cast<size_t>(o) * H + y) * W];
                        const float* irow =
                            &xv.data[(static_cast<size_t>(c) * H + y + dy) * W + dx];
                        for (int xx = x0; xx < x1; ++xx) orow[xx] += wgt * irow[xx];
                    }
                }
            }
        }
    }

    int ix = x.id, iw = w.id, ib = b.id;
    return Var{
        this,
        push(std::move(out), {ix, iw, ib}, any_requires({ix, iw, ib}),
             [ix, iw, ib, C, H, W, O, K, pad](Tape& t, int self) {
                 const Tensor& g = t.grads_[static_cast<size_t>(self)];
                 const Tensor& xv2 = t.nodes_[static_cast<size_t>(ix)].value;
                 const Tensor& wv2 = t.nodes_[static_cast<size_t>(iw)].value;
                 Tensor* gx = t.grad_target(ix);
                 Tensor* gw = t.grad_target(iw);
                 Tensor* gb = t.grad_target(ib);
                 if (gb) {
                     for (int o = 0; o < O; ++o) {
                         const float* gp = &g.data[static_cast<size_t>(o) * H * W];
                         double acc = 0.0;
                         for (int i = 0; i < H * W; ++i) acc += gp[i];
                         (*gb)[o] += static_cast<float>(acc);
                     }
                 }
                 if (!gx && !gw) return;
                 for (int o = 0; o < O; ++o) {
                     for (int c = 0; c < C; ++c) {
                         for (int ky = 0; ky < K; ++ky) {
                             for (int kx = 0; kx < K; ++kx) {
                                 size_t widx = ((static_cast<size_t>(o) * C + c) * K + ky) * K + kx;
                                 int dy = ky - pad, dx = kx - pad;
                                 int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                                 int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                                 float wgt = wv2.data[widx];
                                 float wacc = 0.0f;
                                 for (int y = y0; y < y1; ++y) {
                                     const float* grow =
                                         &g.data[(static_cast<size_t>(o) * H + y) * W];
                                     size_t ioff = (static_cast<size_t>(c) * H + y + dy) * W + dx;
                                     const float* irow = &xv2.data[ioff];
                                     if (gx) {
                                         float* gxrow = &gx->data[ioff];
                                         for (int xx = x0; xx < x1; ++xx)
                                             gxrow[xx] += wgt * grow[xx];
                                     }
                                     if (gw) {
                                         for (int xx = x0; xx < x1; ++xx)
                                             wacc += grow[xx] * irow[xx];
                                     }
                                 }
                                 if (gw) gw->data[widx] += wacc;
                             }
                         }
                     }
                 }
             })};
}

Var Tape::maxpool2(Var x) {
    check(x, "maxpool2");
    const Tensor& xv = value(x);
    if (xv.shape.size() != 3 || xv.shape[1] % 2 != 0 || xv.shape[2] % 2 != 0)
        throw ShapeError("maxpool2: expected [C,H,W] with even H,W, got " + xv.shape_str());
    int C = xv.shape[0], H = xv.shape[1], W = xv.shape[2];
    int Ho = H / 2, Wo = W / 2;
    Tensor out = Tensor::zeros({C, Ho, Wo});
    std::vector<int> argmax(static_cast<size_t>(C) * Ho * Wo);
    for (int c = 0; c < C; ++c) {
        for (int y = 0; y < Ho; ++y) {
            for (int xx = 0; xx < Wo; ++xx) {
                int base = (c * H + 2 * y) * W + 2 * xx;
                int cand[4] = {base, base + 1, base + W, base + W + 1};
                int best = cand[0];
                for (int k = 1; k < 4; ++k)
                    if (xv[cand[k]] > xv[best]) best = cand[k];
                size_t oidx = (static_cast<size_t>(c) * Ho + y) * Wo + xx;
                out.data[oidx] = xv[best];
                argmax[oidx] = best;
                branches_.push_back(static_cast<uint8_t>(best - base));
            }
        }
    }
    int ix = x.id;
    return Var{this, push(std::move(out), {ix}, any_requires({ix}),
                          [ix, argmax](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              if (Tensor* gx = t.grad_target(ix))
                                  for (int i = 0; i < g.size(); ++i)
                                      (*gx)[argmax[static_cast<size_t>(i)]] += g[i];
                          })};
}

Var Tape::reshape(Var x, std::vector<int> shape) {
    check(x, "reshape");
    const Tensor& xv = value(x);
    if (shape_product(shape) != xv.size()) {
        std::string want = "[";
        for (size_t i = 0; i < shape.size(); ++i)
            want += (i ? "," : "") + std::to_string(shape[i]);
        throw ShapeError("reshape: cannot view " + xv.shape_str() + " as " + want + "]");
    }
    Tensor out(shape, xv.data);
    int ix = x.id;
    return Var{this, push(std::move(out), {ix}, any_requires({ix}),
                          [ix](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              if (Tensor* gx = t.grad_target(ix))
                                  for (int i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
                          })};
}

Var Tape::relu(Var x) {
    check(x, "relu");
    Tensor out = value(x);
    for (int i = 0; i < out.size(); ++i) {
        branches_.push_back(out[i] > 0.0f ? 1 : 0);
        if (out[i] < 0.0f) out[i] = 0.0f;
    }
    int ix = x.id;
    return Var{this, push(std::move(out), {ix}, any_requires({ix}),
                          [ix](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              const Tensor& xv2 = t.nodes_[static_cast<size_t>(ix)].value;
                              if (Tensor* gx = t.grad_target(ix))
                                  for (int i = 0; i < g.size(); ++i)
                                      if (xv2[i] > 0.0f) (*gx)[i] += g[i];
                          })};
}

Var Tape::sigmoid(Var x) {
    check(x, "sigmoid");
    Tensor out = value(x);
    for (int i = 0; i < out.size(); ++i) out[i] = 1.0f / (1.0f + std::exp(-out[i]));
    int ix = x.id;
    return Var{this, push(std::move(out), {ix}, any_requires({ix}),
                          [ix](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              const Tensor& sv = t.nodes_[static_cast<size_t>(self)].value;
                              if (Tensor* gx = t.grad_target(ix))
                                  for (int i = 0; i < g.size(); ++i)
                                      (*gx)[i] += g[i] * sv[i] * (1.0f - sv[i]);
                          })};
}

Var Tape::softmax(Var logits) {
    check(logits, "softmax");
    const Tensor& lv = value(logits);
    if (lv.shape.size() != 1) throw ShapeError("softmax: expected a vector, got " + lv.shape_str());
    float m = *std::max_element(lv.data.begin(), lv.data.end());
    Tensor out = lv;
    double z = 0.0;
    for (int i = 0; i < out.size(); ++i) {
        out[i] = std::exp(out[i] - m);
        z += out[i];
    }
    for (int i = 0; i < out.size(); ++i) out[i] = static_cast<float>(out[i] / z);
    int il = logits.id;
    return Var{this, push(std::move(out), {il}, any_requires({il}),
                          [il](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              const Tensor& sv = t.nodes_[static_cast<size_t>(self)].value;
                              if (Tensor* gl = t.grad_target(il)) {
                                  double dot = 0.0;
                                  for (int i = 0; i < g.size(); ++i)
                                      dot += static_cast<double>(g[i]) * sv[i];
                                  for (int i = 0; i < g.size(); ++i)
                                      (*gl)[i] += sv[i] * (g[i] - static_cast<float>(dot));
                              }
                          })};
}

Var Tape::cross_entropy(Var logits, int label) {
    check(logits, "cross_entropy");
    const Tensor& lv = value(logits);
    if (lv.shape.size() != 1)
        throw ShapeError("cross_entropy: expected a logits vector, got " + lv.shape_str());
    if (label < 0 || label >= lv.size())
        throw std::out_of_range("cross_entropy: label " + std::to_string(label) +
                                " out of range for " + std::to_string(lv.size()) + " classes");
    float m = *std::max_element(lv.data.begin(), lv.data.end());
    double z = 0.0;
    for (int i = 0; i < lv.size(); ++i) z += std::exp(static_cast<double>(lv[i]) - m);
    double lse = m + std::log(z);
    float loss = static_cast<float>(lse - lv[label]);
    // softmax probabilities cached in double: near-saturated values would
    // otherwise round to exactly 1 and zero the gradient
    std::vector<double> probs(static_cast<size_t>(lv.size()));
    for (int i = 0; i < lv.size(); ++i)
        probs[static_cast<size_t>(i)] = std::exp(static_cast<double>(lv[i]) - m) / z;
    int il = logits.id;
    return Var{this, push(Tensor::scalar(loss), {il}, any_requires({il}),
                          [il, label, probs](Tape& t, int self) {
                              float g = t.grads_[static_cast<size_t>(self)][0];
                              if (Tensor* gl = t.grad_target(il))
                                  for (int i = 0; i < gl->size(); ++i)
                                      (*gl)[i] += static_cast<float>(
                                          g * (probs[static_cast<size_t>(i)] -
                                               (i == label ? 1.0 : 0.0)));
                          })};
}

Var Tape::squared_norm(Var x) {
    check(x, "squared_norm");
    const Tensor& xv = value(x);
    double acc = 0.0;
    for (int i = 0; i < xv.size(); ++i) acc += static_cast<double>(xv[i]) * xv[i];
    int ix = x.id;
    return Var{this, push(Tensor::scalar(static_cast<float>(acc)), {ix}, any_requires({ix}),
                          [ix](Tape& t, int self) {
                              float g = t.grads_[static_cast<size_t>(self)][0];
                              const Tensor& xv2 = t.nodes_[static_cast<size_t>(ix)].value;
                              if (Tensor* gx = t.grad_target(ix))
                                  for (int i = 0; i < gx->size(); ++i)
                                      (*gx)[i] += 2.0f * g * xv2[i];
                          })};
}

Var Tape::clamp01(Var x) {
    check(x, "clamp01");
    Tensor out = value(x);
    for (int i = 0; i < out.size(); ++i) {
        branches_.push_back(out[i] >= 0.0f && out[i] <= 1.0f ? 1 : 0);
        out[i] = std::clamp(out[i], 0.0f, 1.0f);
    }
    int ix = x.id;
    return Var{this, push(std::move(out), {ix}, any_requires({ix}),
                          [ix](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              const Tensor& xv2 = t.nodes_[static_cast<size_t>(ix)].value;
                              if (Tensor* gx = t.grad_target(ix))
                                  for (int i = 0; i < g.size(); ++i)
                                      if (xv2[i] >= 0.0f && xv2[i] <= 1.0f) (*gx)[i] += g[i];
                          })};
}

Var Tape::custom(const std::vector<Var>& inputs, Tensor value, CustomBackward backward) {
    std::vector<int> ids;
    ids.reserve(inputs.size());
    for (Var v : inputs) {
        check(v, "custom");
        ids.push_back(v.id);
    }
    auto ids_copy = ids;
    return Var{this, push(std::move(value), std::move(ids), any_requires(ids_copy),
                          [ids_copy, backward](Tape& t, int self) {
                              const Tensor& g = t.grads_[static_cast<size_t>(self)];
                              std::vector<Tensor*> gin;
                              gin.reserve(ids_copy.size());
                              for (int id : ids_copy) gin.push_back(t.grad_target(id));
                              backward(g, gin);
                          })};
}

void Tape::backward(Var loss) {
    check(loss, "backward");
    const Tensor& lv = value(loss);
    if (lv.size() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got shape " + lv.shape_str());
    grads_.assign(nodes_.size(), Tensor{});
    grads_[static_cast<size_t>(loss.id)] = Tensor::scalar(1.0f);
    for (int id = loss.id; id >= 0; --id) {
        const Node& node = nodes_[static_cast<size_t>(id)];
        if (!node.backprop || grads_[static_cast<size_t>(id)].empty()) continue;
        node.backprop(*this, id);
    }
}

GradCheckReport grad_check(const ScalarFn& fn, const Tensor& point, float h, float tol) {
    if (h <= 0.0f) throw std::invalid_argument("grad_check: h must be positive");

    Tape base;
    Var leaf = base.input(point);
    Var loss = fn(base, leaf);
    if (base.value(loss).size() != 1)
        throw std::invalid_argument("grad_check: fn must be scalar-valued");
    base.backward(loss);
    Tensor analytic = base.grad(leaf);
    const std::vector<uint8_t>& base_sig = base.branch_signature();

    auto eval_at = [&](const Tensor& p, std::vector<uint8_t>& sig) {
        Tape t;
        Var l = t.input(p);
        Var out = fn(t, l);
        sig = t.branch_signature();
        return t.value(out)[0];
    };

    GradCheckReport report;
    report.coords.resize(static_cast<size_t>(point.size()));
    for (int i = 0; i < point.size(); ++i) {
        Tensor plus = point, minus = point;
        plus[i] += h;
        minus[i] -= h;
        std::vector<uint8_t> sig_plus, sig_minus;
        float fp = eval_at(plus, sig_plus);
        float fm = eval_at(minus, sig_minus);

        GradCheckCoord& c = report.coords[static_cast<size_t>(i)];
        c.index = i;
        c.analytic = analytic[i];
        c.numeric = (fp - fm) / (2.0f * h);
        c.kink = (sig_plus != base_sig) || (sig_minus != base_sig);
        float denom = std::max({std::fabs(c.analytic), std::fabs(c.numeric), 1e-3f});
        c.rel_error = std::fabs(c.analytic - c.numeric) / denom;
        if (c.kink) {
            report.kinks++;
            c.pass = true; // non-differentiable point, excluded
        } else {
            c.pass = c.rel_error <= tol;
            report.max_rel_error = std::max(report.max_rel_error, c.rel_error);
            if (!c.pass) report.pass = false;
        }
    }
    return report;
}

} // namespace pasadena
