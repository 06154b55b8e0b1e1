#include "pasadena/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "pasadena/parallel.hpp"
#include "pasadena/rng.hpp"

namespace pasadena {

const Tensor& Model::param(const std::string& name) const {
    for (const auto& [n, t] : params)
        if (n == name) return t;
    throw std::out_of_range("model has no parameter '" + name + "'");
}

Tensor& Model::param(const std::string& name) {
    for (auto& [n, t] : params)
        if (n == name) return t;
    throw std::out_of_range("model has no parameter '" + name + "'");
}

namespace {

Tensor he_normal(std::vector<int> shape, int fan_in, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    float stddev = std::sqrt(2.0f / static_cast<float>(fan_in));
    for (auto& v : t.data) v = stddev * static_cast<float>(rng.gaussian());
    return t;
}

} // namespace

Model make_toy_model(const std::string& arch, uint64_t seed, int input_size, int class_count) {
    Model m;
    m.arch = arch;
    m.input_size = input_size;
    m.class_count = class_count;
    if (arch == "toy-a") {
        m.convs = {{3, 16, 3}, {16, 32, 3}};
    } else if (arch == "toy-b") {
        m.convs = {{3, 12, 3}, {12, 24, 3}};
    } else {
        throw std::invalid_argument("unknown architecture '" + arch +
                                    "' (expected toy-a or toy-b)");
    }
    int side = input_size;
    for (size_t i = 0; i < m.convs.size(); ++i) side /= 2;
    m.dense_in = m.convs.back().out_ch * side * side;

    Rng rng(derive_seed(seed, 0xC1A55u));
    for (size_t i = 0; i < m.convs.size(); ++i) {
        const ConvStage& c = m.convs[i];
        std::string base = "conv" + std::to_string(i + 1);
        m.params.emplace_back(base + ".w", he_normal({c.out_ch, c.in_ch, c.ksize, c.ksize},
                                                     c.in_ch * c.ksize * c.ksize, rng));
        m.params.emplace_back(base + ".b", Tensor::zeros({c.out_ch}));
    }
    m.params.emplace_back("fc.w", he_normal({class_count, m.dense_in}, m.dense_in, rng));
    m.params.emplace_back("fc.b", Tensor::zeros({class_count}));
    return m;
}

ForwardVars model_forward(Tape& tape, const Model& model, Var input_chw, bool trainable_params) {
    const Tensor& in = tape.value(input_chw);
    std::vector<int> expect{3, model.input_size, model.input_size};
    if (in.shape != expect)
        throw ShapeError("model_forward: expected input [3," + std::to_string(model.input_size) +
                         "," + std::to_string(model.input_size) + "], got " + in.shape_str());

    ForwardVars fv;
    auto push_param = [&](const Tensor& t) {
        Var v = trainable_params ? tape.input(t) : tape.constant(t);
        fv.params.push_back(v);
        return v;
    };

    Var x = input_chw;
    size_t pi = 0;
    for (size_t i = 0; i < model.convs.size(); ++i) {
        Var w = push_param(model.params[pi++].second);
        Var b = push_param(model.params[pi++].second);
        x = tape.maxpool2(tape.relu(tape.conv2d(x, w, b)));
    }
    Var fw = push_param(model.params[pi++].second);
    Var fb = push_param(model.params[pi++].second);
    Var flat = tape.reshape(x, {model.dense_in});
    fv.logits = tape.add(tape.matmul(fw, flat), fb);
    if (!trainable_params) fv.params.clear();
    return fv;
}

Prediction predict(const Model& model, const Image& img) {
    Tape tape;
    Var in = tape.constant(image_to_chw(img));
    ForwardVars fv = model_forward(tape, model, in, false);
    const Tensor& logits = tape.value(fv.logits);

    Prediction p;
    p.logits = logits.data;
    double m = *std::max_element(logits.data.begin(), logits.data.end());
    double z = 0.0;
    for (float v : logits.data) z += std::exp(static_cast<double>(v) - m);
    p.probabilities.resize(logits.data.size());
    for (size_t i = 0; i < logits.data.size(); ++i)
        p.probabilities[i] = static_cast<float>(std::exp(static_cast<double>(logits.data[i]) - m) / z);
    p.label = static_cast<int>(
        std::max_element(logits.data.begin(), logits.data.end()) - logits.data.begin());
    p.confidence = p.probabilities[static_cast<size_t>(p.label)];
    return p;
}

std::pair<float, Tensor> loss_and_grad(const Model& model, const Image& img, int label) {
    if (label < 0 || label >= model.class_count)
        throw std::out_of_range("label " + std::to_string(label) + " out of range for " +
                                std::to_string(model.class_count) + " classes");
    Tape tape;
    Var in = tape.input(image_to_chw(img));
    ForwardVars fv = model_forward(tape, model, in, false);
    Var loss = tape.cross_entropy(fv.logits, label);
    tape.backward(loss);
    return {tape.value(loss)[0], tape.grad(in)};
}

// ---------------------------------------------------------------------------
// Toy dataset

// Classes are deliberately confusable in color: every sample draws its
// palette from the same family, so the classifier must discriminate on
// pattern geometry. Neighboring classes (stripe orientations, checker
// cell sizes, disk vs ring, gradient directions) keep decision margins
// moderate, which keeps attack gradients alive.
Image make_toy_sample(uint64_t seed, uint64_t index, int& label_out, int image_size) {
    int cls = static_cast<int>(index % 10);
    label_out = cls;
    Rng rng(derive_seed(seed, index));
    int S = image_size;
    float Sf = static_cast<float>(S);
    const float pi = static_cast<float>(M_PI);

    float phase = static_cast<float>(rng.uniform(0.0, 2.0 * M_PI));
    float freq = 3.0f * static_cast<float>(rng.uniform(0.8, 1.2));
    float angle_jit = static_cast<float>(rng.uniform(-0.12, 0.12)); // radians
    float cx = Sf / 2.0f + static_cast<float>(rng.uniform(-4.0, 4.0));
    float cy = Sf / 2.0f + static_cast<float>(rng.uniform(-4.0, 4.0));
    float rad_jit = static_cast<float>(rng.uniform(-2.0, 2.0));
    float slope = static_cast<float>(rng.uniform(0.75, 1.25));
    float offset = static_cast<float>(rng.uniform(-0.12, 0.12));
    float checker_cell = (cls == 3 ? 6.0f : 8.5f) + static_cast<float>(rng.uniform(-0.9, 0.9));
    float shift_x = static_cast<float>(rng.uniform(0.0, 17.0));
    float shift_y = static_cast<float>(rng.uniform(0.0, 17.0));

    // shared palette family: color carries no class information
    float fg[3], bg[3];
    float warm = static_cast<float>(rng.uniform(0.6, 0.9));
    float cool = static_cast<float>(rng.uniform(0.1, 0.35));
    for (int c = 0; c < 3; ++c) {
        fg[c] = std::clamp(warm + static_cast<float>(rng.uniform(-0.12, 0.12)), 0.0f, 1.0f);
        bg[c] = std::clamp(cool + static_cast<float>(rng.uniform(-0.12, 0.12)), 0.0f, 1.0f);
    }

    auto stripes = [&](float yf, float xf, float base_angle) {
        float a = base_angle + angle_jit;
        float u = xf * std::cos(a) + yf * std::sin(a);
        return 0.5f + 0.5f * std::sin(2.0f * pi * freq * u / Sf + phase);
    };

    // ramp direction is a per-sample nuisance: gradient classes are told
    // apart by their stripe carrier, not by the ramp itself
    float ramp_angle = static_cast<float>(rng.uniform(0.0, M_PI));
    auto ramp = [&](float yf, float xf) {
        float u = xf * std::cos(ramp_angle) + yf * std::sin(ramp_angle);
        return std::clamp(slope * (u + Sf) / (2.0f * Sf - 2.0f) + offset, 0.0f, 1.0f);
    };

    // weak class-independent texture: every sample carries fine structure,
    // as photographs do
    float tex_angle = static_cast<float>(rng.uniform(0.0, M_PI));
    float tex_freq = static_cast<float>(rng.uniform(6.0, 9.0));
    float tex_phase = static_cast<float>(rng.uniform(0.0, 2.0 * M_PI));
    auto texture_at = [&](float yf, float xf) {
        float u = xf * std::cos(tex_angle) + yf * std::sin(tex_angle);
        return 0.5f + 0.5f * std::sin(2.0f * pi * tex_freq * u / Sf + tex_phase);
    };

    auto pattern = [&](int y, int x, int cls_id) -> float {
        float xf = static_cast<float>(x), yf = static_cast<float>(y);
        switch (cls_id) {
        case 0: return stripes(yf, xf, 0.0f);        // bands at 0
        case 1: return stripes(yf, xf, pi / 7.0f);   // bands at ~26 degrees
        case 2: return stripes(yf, xf, 2.0f * pi / 7.0f); // bands at ~51 degrees
        case 3:                                      // fine checker
        case 4: {                                    // coarse checker
            int ix = static_cast<int>((xf + shift_x) / checker_cell);
            int iy = static_cast<int>((yf + shift_y) / checker_cell);
            return static_cast<float>((ix + iy) % 2);
        }
        // two disk classes share the same body envelope and differ in the
        // frequency of their concentric fill
        case 5:
        case 6: {
            float r = std::hypot(xf - cx, yf - cy);
            float r0 = 0.28f * Sf + rad_jit;
            float body = 1.0f / (1.0f + std::exp(2.0f * (r - r0)));
            float period = cls_id == 5 ? 5.5f : 9.5f;
            float ripple = 0.6f + 0.4f * std::sin(2.0f * pi * r / period + phase);
            return body * ripple;
        }
        // gradient classes ride on stripe carriers at class-specific
        // orientations; the ramp direction itself is random
        case 7: return ramp(yf, xf) * (0.5f + 0.5f * stripes(yf, xf, 0.0f));
        case 8: return ramp(yf, xf) * (0.5f + 0.5f * stripes(yf, xf, pi / 7.0f));
        default: return ramp(yf, xf) * (0.5f + 0.5f * stripes(yf, xf, 2.0f * pi / 7.0f));
        }
    };

    // every sample carries a trace of the next class's pattern, so the
    // class manifolds stay close and model confidence saturates less
    int neighbor = (cls + 1) % 10;
    float blend = static_cast<float>(rng.uniform(0.12, 0.35));

    Image img = Image::zeros(S, S, 3);
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) {
            float t = (0.78f - blend) * pattern(y, x, cls) + blend * pattern(y, x, neighbor) +
                      0.22f * texture_at(static_cast<float>(y), static_cast<float>(x));
            for (int c = 0; c < 3; ++c) {
                float v = bg[c] + t * (fg[c] - bg[c]);
                v += static_cast<float>(rng.uniform(-0.06, 0.06));
                img.at(y, x, c) = std::clamp(v, 0.0f, 1.0f);
            }
        }
    return img;
}

ToyDataset generate_toy_dataset(uint64_t seed, int n_per_class) {
    if (n_per_class < 1) throw std::invalid_argument("n_per_class must be >= 1");
    ToyDataset set;
    set.seed = seed;
    int total = 10 * n_per_class;
    set.images.reserve(static_cast<size_t>(total));
    set.labels.reserve(static_cast<size_t>(total));
    for (int i = 0; i < total; ++i) {
        int label = 0;
        set.images.push_back(make_toy_sample(seed, static_cast<uint64_t>(i), label));
        set.labels.push_back(label);
    }
    return set;
}

// ---------------------------------------------------------------------------
// Training

double accuracy(const Model& model, const ToyDataset& set, int threads) {
    if (set.images.empty()) return 0.0;
    std::vector<uint8_t> correct(set.images.size(), 0);
    parallel_for(static_cast<int>(set.images.size()), threads, [&](int i) {
        correct[static_cast<size_t>(i)] =
            predict(model, set.images[static_cast<size_t>(i)]).label ==
            set.labels[static_cast<size_t>(i)];
    });
    long hits = std::count(correct.begin(), correct.end(), uint8_t{1});
    return static_cast<double>(hits) / static_cast<double>(set.images.size());
}

TrainReport train(Model& model, const ToyDataset& train_set, const ToyDataset& test_set,
                  int epochs, double lr, uint64_t seed, int threads) {
    const int batch_size = 16;
    const double momentum = 0.9;
    size_t n = train_set.images.size();
    size_t n_params = model.params.size();

    std::vector<Tensor> velocity;
    velocity.reserve(n_params);
    for (auto& [name, t] : model.params) velocity.push_back(Tensor::zeros(t.shape));

    Rng rng(derive_seed(seed, 0x7124117ull));
    std::vector<int> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);

    double last_loss = 0.0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        // Fisher-Yates shuffle driven by the seeded stream
        for (size_t i = n; i > 1; --i) {
            size_t j = static_cast<size_t>(rng.uniform() * static_cast<double>(i));
            if (j >= i) j = i - 1;
            std::swap(order[i - 1], order[j]);
        }
        for (size_t start = 0; start < n; start += batch_size) {
            int bs = static_cast<int>(std::min(static_cast<size_t>(batch_size), n - start));
            std::vector<std::vector<Tensor>> grads(static_cast<size_t>(bs));
            std::vector<float> losses(static_cast<size_t>(bs));
            parallel_for(bs, threads, [&](int bi) {
                int idx = order[start + static_cast<size_t>(bi)];
                Tape tape;
                Var in = tape.constant(image_to_chw(train_set.images[static_cast<size_t>(idx)]));
                ForwardVars fv = model_forward(tape, model, in, true);
                Var loss = tape.cross_entropy(fv.logits, train_set.labels[static_cast<size_t>(idx)]);
                tape.backward(loss);
                losses[static_cast<size_t>(bi)] = tape.value(loss)[0];
                auto& g = grads[static_cast<size_t>(bi)];
                g.reserve(n_params);
                for (Var pv : fv.params) g.push_back(tape.grad(pv));
            });

            double batch_loss = 0.0;
            for (float l : losses) batch_loss += l;
            batch_loss /= bs;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                         std::to_string(epoch + 1));
            last_loss = batch_loss;

            // velocity = momentum * velocity + mean gradient; deterministic
            // because samples are reduced in batch order
            for (size_t p = 0; p < n_params; ++p) {
                Tensor& v = velocity[p];
                for (int i = 0; i < v.size(); ++i) v[i] = static_cast<float>(momentum) * v[i];
                for (int b = 0; b < bs; ++b) {
                    const Tensor& g = grads[static_cast<size_t>(b)][p];
                    float inv = 1.0f / static_cast<float>(bs);
                    for (int i = 0; i < v.size(); ++i) v[i] += inv * g[i];
                }
                Tensor& param = model.params[p].second;
                for (int i = 0; i < param.size(); ++i)
                    param[i] -= static_cast<float>(lr) * v[i];
            }
        }
    }

    TrainReport report;
    report.epochs = epochs;
    report.final_loss = last_loss;
    report.train_accuracy = accuracy(model, train_set, threads);
    report.test_accuracy = accuracy(model, test_set, threads);
    return report;
}

// ---------------------------------------------------------------------------
// Weight files

namespace {

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

    void need(size_t n) {
        if (pos_ + n > bytes_.size())
            throw std::runtime_error("unexpected end of weight payload");
    }
    uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + static_cast<size_t>(i)]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::string str(size_t n) {
        need(n);
        std::string s(bytes_.begin() + static_cast<long>(pos_),
                      bytes_.begin() + static_cast<long>(pos_ + n));
        pos_ += n;
        return s;
    }
    std::vector<float> floats(size_t n) {
        need(n * 4);
        std::vector<float> v(n);
        std::memcpy(v.data(), bytes_.data() + pos_, n * 4);
        pos_ += n * 4;
        return v;
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    const std::vector<uint8_t>& bytes_;
    size_t pos_ = 0;
};

} // namespace

std::vector<uint8_t> save_weights(const Model& model) {
    std::vector<uint8_t> out;
    out.push_back('P');
    out.push_back('S');
    out.push_back('D');
    out.push_back('N');
    put_u32(out, 1); // version
    put_u32(out, static_cast<uint32_t>(model.params.size()));
    for (const auto& [name, t] : model.params) {
        put_u16(out, static_cast<uint16_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        out.push_back(static_cast<uint8_t>(t.shape.size()));
        for (int d : t.shape) put_u32(out, static_cast<uint32_t>(d));
        size_t off = out.size();
        out.resize(off + t.data.size() * 4);
        std::memcpy(out.data() + off, t.data.data(), t.data.size() * 4);
    }
    return out;
}

Model load_weights(const std::vector<uint8_t>& bytes) {
    Reader r(bytes);
    std::string magic = r.str(4);
    if (magic != "PSDN") throw std::runtime_error("not a classifier weight file");
    uint32_t version = r.u32();
    if (version != 1)
        throw std::runtime_error("unsupported weight file version " + std::to_string(version));
    uint32_t count = r.u32();

    std::vector<std::pair<std::string, Tensor>> tensors;
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t name_len = r.u16();
        std::string name = r.str(name_len);
        uint8_t rank = r.u8();
        std::vector<int> shape;
        size_t total = 1;
        for (int d = 0; d < rank; ++d) {
            uint32_t dim = r.u32();
            shape.push_back(static_cast<int>(dim));
            total *= dim;
        }
        tensors.emplace_back(name, Tensor(shape, r.floats(total)));
    }
    if (!r.at_end()) throw std::runtime_error("trailing bytes after weight payload");

    // Rebuild the architecture descriptor from names and shapes.
    Model m;
    size_t i = 0;
    int conv_index = 1;
    while (i + 1 < tensors.size() &&
           tensors[i].first == "conv" + std::to_string(conv_index) + ".w") {
        const Tensor& w = tensors[i].second;
        const Tensor& b = tensors[i + 1].second;
        if (tensors[i + 1].first != "conv" + std::to_string(conv_index) + ".b" ||
            w.shape.size() != 4 || b.shape.size() != 1 || b.shape[0] != w.shape[0] ||
            w.shape[2] != w.shape[3])
            throw std::runtime_error("weight file shape mismatch in conv" +
                                     std::to_string(conv_index));
        ConvStage stage{w.shape[1], w.shape[0], w.shape[2]};
        if (!m.convs.empty() && m.convs.back().out_ch != stage.in_ch)
            throw std::runtime_error("weight file shape mismatch: conv" +
                                     std::to_string(conv_index) + " input channels");
        m.convs.push_back(stage);
        i += 2;
        ++conv_index;
    }
    if (m.convs.empty() || m.convs.front().in_ch != 3)
        throw std::runtime_error("weight file shape mismatch: expected conv1 over 3 channels");
    if (i + 2 != tensors.size() || tensors[i].first != "fc.w" || tensors[i + 1].first != "fc.b")
        throw std::runtime_error("weight file shape mismatch: expected fc.w and fc.b tail");
    const Tensor& fw = tensors[i].second;
    const Tensor& fb = tensors[i + 1].second;
    if (fw.shape.size() != 2 || fb.shape.size() != 1 || fb.shape[0] != fw.shape[0])
        throw std::runtime_error("weight file shape mismatch in dense layer");

    m.class_count = fw.shape[0];
    m.dense_in = fw.shape[1];
    int last_ch = m.convs.back().out_ch;
    if (m.dense_in % last_ch != 0)
        throw std::runtime_error("weight file shape mismatch: dense input vs conv channels");
    int side_sq = m.dense_in / last_ch;
    int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(side_sq))));
    if (side * side != side_sq)
        throw std::runtime_error("weight file shape mismatch: dense input is not a square map");
    m.input_size = side << m.convs.size();
    m.arch = m.convs[0].out_ch == 16 ? "toy-a" : (m.convs[0].out_ch == 12 ? "toy-b" : "custom");
    m.params = std::move(tensors);
    return m;
}

void save_weights_file(const Model& model, const std::string& path) {
    write_binary_file(path, save_weights(model));
}

Model load_weights_file(const std::string& path) {
    return load_weights(read_binary_file(path));
}

void export_dataset(const ToyDataset& set, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::string csv = "filename,label\n";
    char name[32];
    for (size_t i = 0; i < set.images.size(); ++i) {
        std::snprintf(name, sizeof(name), "img_%05zu.ppm", i);
        save_ppm_file(set.images[i], (std::filesystem::path(dir) / name).string());
        csv += std::string(name) + "," + std::to_string(set.labels[i]) + "\n";
    }
    std::ofstream f(std::filesystem::path(dir) / "labels.csv", std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write labels.csv in " + dir);
    f << csv;
}

} // namespace pasadena
