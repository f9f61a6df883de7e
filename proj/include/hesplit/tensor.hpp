#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hesplit {

/// Raised when operand shapes are incompatible or an index is out of range.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);

/**
 * Dense row-major tensor of 32-bit floats.
 *
 * Holds every activation, weight and gradient in the training pipeline.
 * Element access through at() is bounds-checked; the raw span accessors are
 * for tight loops that have already validated their extents.
 */
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<float> data);

    static Tensor zeros(const Shape& shape);
    static Tensor filled(const Shape& shape, float value);
    /// Row-major 2-D literal, e.g. from_rows({{1, 2}, {3, 4}}).
    static Tensor from_rows(std::initializer_list<std::initializer_list<float>> rows);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t ndim() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }
    const std::vector<float>& vec() const noexcept { return data_; }

    float& at(std::initializer_list<std::size_t> index);
    float at(std::initializer_list<std::size_t> index) const;
    float& operator[](std::size_t flat) { return data_[flat]; }
    float operator[](std::size_t flat) const { return data_[flat]; }

    /// Same data, new shape with equal element count.
    Tensor reshaped(Shape shape) const;

    bool operator==(const Tensor& other) const = default;

private:
    std::size_t flat_index(std::initializer_list<std::size_t> index) const;

    Shape shape_;
    std::vector<float> data_;
};

enum class ElementwiseOp { add, sub, mul };

Tensor elementwise(const Tensor& a, const Tensor& b, ElementwiseOp op);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);

/// r×k times k×c, accumulated in float in k order.
Tensor matmul(const Tensor& a, const Tensor& b);
/// aᵀ·b without materializing the transpose.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// a·bᵀ without materializing the transpose.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose2d(const Tensor& a);

/// Column-wise sum of a 2-D tensor, shape [c].
Tensor sum_rows(const Tensor& a);
float sum(const Tensor& a);
/// Per-row argmax; ties resolve to the lowest index.
std::vector<std::size_t> argmax_rows(const Tensor& a);

/// Rows [begin, end) of the leading axis.
Tensor slice_leading(const Tensor& a, std::size_t begin, std::size_t end);

float max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace hesplit
