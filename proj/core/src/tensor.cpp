#include "pasadena/tensor.hpp"

#include <cmath>
#include <sstream>

namespace pasadena {

int shape_product(const std::vector<int>& shape) {
    int n = 1;
    for (int d : shape) {
        if (d < 0) throw ShapeError("negative dimension in shape");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape_, std::vector<float> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (shape_product(shape) != static_cast<int>(data.size()))
        throw ShapeError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str());
}

Tensor Tensor::zeros(std::vector<int> shape) {
    int n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<float>(static_cast<size_t>(n), 0.0f));
}

Tensor Tensor::full(std::vector<int> shape, float value) {
    int n = shape_product(shape);
    return Tensor(std::move(shape), std::vector<float>(static_cast<size_t>(n), value));
}

Tensor Tensor::scalar(float value) { return Tensor({1}, {value}); }

bool Tensor::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
}

} // namespace pasadena
