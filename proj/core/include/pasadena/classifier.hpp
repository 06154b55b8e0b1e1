#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pasadena/image.hpp"
#include "pasadena/tape.hpp"

namespace pasadena {

/// One conv stage: KxK same-padded convolution followed by relu and 2x2
/// max pooling.
struct ConvStage {
    int in_ch = 0;
    int out_ch = 0;
    int ksize = 3;
};

/// Small convolutional classifier: a stack of conv stages and a final dense
/// layer over the flattened feature map.
struct Model {
    std::string arch;
    int input_size = 32; // square input, 3 channels
    int class_count = 10;
    std::vector<ConvStage> convs;
    int dense_in = 0;
    // Parameters in serialization order: conv1.w, conv1.b, ..., fc.w, fc.b.
    std::vector<std::pair<std::string, Tensor>> params;

    const Tensor& param(const std::string& name) const;
    Tensor& param(const std::string& name);
};

/// Architectures: "toy-a" (conv 3->16, 16->32, dense) is the default attack
/// target; "toy-b" (conv 3->12, 12->24, dense) is the bundled transfer
/// target. Initialization is He-style and fully determined by the seed.
Model make_toy_model(const std::string& arch, uint64_t seed, int input_size = 32,
                     int class_count = 10);

struct Prediction {
    std::vector<float> logits;
    std::vector<float> probabilities;
    int label = -1;
    float confidence = 0.0f;
};

struct ForwardVars {
    Var logits;
    std::vector<Var> params; // parallel to Model::params; empty unless trainable
};

/// Records the classifier forward pass on the tape. With trainable_params
/// the parameters become differentiable leaves (their handles are returned
/// for the optimizer); otherwise they are constants and only the input
/// carries gradient.
ForwardVars model_forward(Tape& tape, const Model& model, Var input_chw, bool trainable_params);

Prediction predict(const Model& model, const Image& img);

/// Cross-entropy of the model on (img, label) and its gradient w.r.t. the
/// image, as a [C,H,W] tensor.
std::pair<float, Tensor> loss_and_grad(const Model& model, const Image& img, int label);

/// Procedurally rendered 10-class dataset: stripes, checkers, disks, rings
/// and gradients at class-specific orientation, frequency and palette, with
/// per-sample jitter. Bit-identical for a given seed.
struct ToyDataset {
    int class_count = 10;
    int image_size = 32;
    uint64_t seed = 0;
    std::vector<Image> images;
    std::vector<int> labels; // labels[i] == i % class_count
};

ToyDataset generate_toy_dataset(uint64_t seed, int n_per_class);

/// Single sample from the same family; `index` selects both the class
/// (index mod 10) and the jitter stream. Used for streaming evaluation sets.
Image make_toy_sample(uint64_t seed, uint64_t index, int& label_out, int image_size = 32);

struct TrainReport {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double final_loss = 0.0;
    int epochs = 0;
};

/// Minibatch SGD with momentum 0.9 on cross-entropy. Deterministic for a
/// given seed regardless of thread count. Aborts with a diagnostic if the
/// loss turns non-finite.
TrainReport train(Model& model, const ToyDataset& train_set, const ToyDataset& test_set,
                  int epochs, double lr, uint64_t seed, int threads = 0);

double accuracy(const Model& model, const ToyDataset& set, int threads = 0);

// Weight file: magic "PSDN", version u32 LE, tensor count u32 LE, then per
// tensor: name length u16 LE, UTF-8 name, rank u8, dims u32 LE, float32 LE
// payload.
std::vector<uint8_t> save_weights(const Model& model);
Model load_weights(const std::vector<uint8_t>& bytes);
void save_weights_file(const Model& model, const std::string& path);
Model load_weights_file(const std::string& path);

/// Writes images as PPM files plus a "filename,label" CSV next to them.
void export_dataset(const ToyDataset& set, const std::string& dir);

} // namespace pasadena
