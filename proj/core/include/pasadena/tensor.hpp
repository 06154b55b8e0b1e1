#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pasadena {

/// Thrown when operand shapes do not conform to an operation.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dense row-major float32 tensor. Shape is a list of dimension sizes;
/// data length always equals the product of the dimensions.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<int> shape_, std::vector<float> data_);

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, float value);
    static Tensor scalar(float value);

    int size() const { return static_cast<int>(data.size()); }
    bool empty() const { return data.empty(); }

    float& operator[](int i) { return data[static_cast<size_t>(i)]; }
    float operator[](int i) const { return data[static_cast<size_t>(i)]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;

    std::string shape_str() const;
};

int shape_product(const std::vector<int>& shape);

/// Throws ShapeError with a message naming `op` unless a and b have equal shapes.
void require_same_shape(const char* op, const Tensor& a, const Tensor& b);

} // namespace pasadena
