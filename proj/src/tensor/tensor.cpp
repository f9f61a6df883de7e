#include "hesplit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace hesplit {

namespace {

std::size_t element_count(const Shape& shape) {
    if (shape.empty()) {
        throw ShapeError("tensor shape must have at least one dimension");
    }
    std::size_t n = 1;
    for (std::size_t d : shape) {
        n *= d;
    }
    return n;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) +
                         " vs " + to_string(b.shape()));
    }
}

void require_2d(const Tensor& a, const char* what) {
    if (a.ndim() != 2) {
        throw ShapeError(std::string(what) + ": expected a 2-D tensor, got " + to_string(a.shape()));
    }
}

}  // namespace

std::string to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        os << (i ? "," : "") << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(element_count(shape_), 0.0f) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + to_string(shape_));
    }
}

Tensor Tensor::zeros(const Shape& shape) {
    for (std::size_t d : shape) {
        if (d == 0) {
            throw ShapeError("zeros: every dimension must be >= 1, got " + to_string(shape));
        }
    }
    return Tensor(shape);
}

Tensor Tensor::filled(const Shape& shape, float value) {
    Tensor t(shape);
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<float>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<float> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw ShapeError("from_rows: ragged rows");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for " + to_string(shape_));
    }
    return shape_[axis];
}

std::size_t Tensor::flat_index(std::initializer_list<std::size_t> index) const {
    if (index.size() != shape_.size()) {
        throw ShapeError("index rank " + std::to_string(index.size()) + " does not match " +
                         to_string(shape_));
    }
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (std::size_t i : index) {
        if (i >= shape_[axis]) {
            throw ShapeError("index " + std::to_string(i) + " out of range on axis " +
                             std::to_string(axis) + " of " + to_string(shape_));
        }
        flat = flat * shape_[axis] + i;
        ++axis;
    }
    return flat;
}

float& Tensor::at(std::initializer_list<std::size_t> index) { return data_[flat_index(index)]; }

float Tensor::at(std::initializer_list<std::size_t> index) const { return data_[flat_index(index)]; }

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

Tensor elementwise(const Tensor& a, const Tensor& b, ElementwiseOp op) {
    require_same_shape(a, b, "elementwise");
    Tensor out(a.shape());
    auto x = a.data();
    auto y = b.data();
    auto z = out.data();
    switch (op) {
        case ElementwiseOp::add:
            std::transform(x.begin(), x.end(), y.begin(), z.begin(), std::plus<>{});
            break;
        case ElementwiseOp::sub:
            std::transform(x.begin(), x.end(), y.begin(), z.begin(), std::minus<>{});
            break;
        case ElementwiseOp::mul:
            std::transform(x.begin(), x.end(), y.begin(), z.begin(), std::multiplies<>{});
            break;
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) { return elementwise(a, b, ElementwiseOp::add); }
Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(a, b, ElementwiseOp::sub); }
Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(a, b, ElementwiseOp::mul); }

Tensor scale(const Tensor& a, float s) {
    Tensor out(a.shape());
    auto x = a.data();
    auto z = out.data();
    std::transform(x.begin(), x.end(), z.begin(), [s](float v) { return v * s; });
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul");
    require_2d(b, "matmul");
    const std::size_t r = a.dim(0), k = a.dim(1), c = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner dimensions differ " + to_string(a.shape()) + " · " +
                         to_string(b.shape()));
    }
    Tensor out({r, c});
    auto x = a.data();
    auto y = b.data();
    auto z = out.data();
    for (std::size_t i = 0; i < r; ++i) {
        float* row = &z[i * c];
        for (std::size_t p = 0; p < k; ++p) {
            const float av = x[i * k + p];
            const float* brow = &y[p * c];
            for (std::size_t j = 0; j < c; ++j) {
                row[j] += av * brow[j];
            }
        }
    }
    return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul_tn");
    require_2d(b, "matmul_tn");
    const std::size_t k = a.dim(0), r = a.dim(1), c = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul_tn: leading dimensions differ " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
    Tensor out({r, c});
    auto x = a.data();
    auto y = b.data();
    auto z = out.data();
    for (std::size_t p = 0; p < k; ++p) {
        const float* brow = &y[p * c];
        for (std::size_t i = 0; i < r; ++i) {
            const float av = x[p * r + i];
            float* row = &z[i * c];
            for (std::size_t j = 0; j < c; ++j) {
                row[j] += av * brow[j];
            }
        }
    }
    return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul_nt");
    require_2d(b, "matmul_nt");
    const std::size_t r = a.dim(0), k = a.dim(1), c = b.dim(0);
    if (b.dim(1) != k) {
        throw ShapeError("matmul_nt: trailing dimensions differ " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
    Tensor out({r, c});
    auto x = a.data();
    auto y = b.data();
    auto z = out.data();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            float acc = 0.0f;
            for (std::size_t p = 0; p < k; ++p) {
                acc += x[i * k + p] * y[j * k + p];
            }
            z[i * c + j] = acc;
        }
    }
    return out;
}

Tensor transpose2d(const Tensor& a) {
    require_2d(a, "transpose2d");
    const std::size_t r = a.dim(0), c = a.dim(1);
    Tensor out({c, r});
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out[j * r + i] = a[i * c + j];
        }
    }
    return out;
}

Tensor sum_rows(const Tensor& a) {
    require_2d(a, "sum_rows");
    const std::size_t r = a.dim(0), c = a.dim(1);
    Tensor out({c});
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out[j] += a[i * c + j];
        }
    }
    return out;
}

float sum(const Tensor& a) {
    auto x = a.data();
    return std::accumulate(x.begin(), x.end(), 0.0f);
}

std::vector<std::size_t> argmax_rows(const Tensor& a) {
    require_2d(a, "argmax_rows");
    const std::size_t r = a.dim(0), c = a.dim(1);
    std::vector<std::size_t> out(r, 0);
    for (std::size_t i = 0; i < r; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < c; ++j) {
            if (a[i * c + j] > a[i * c + best]) {
                best = j;
            }
        }
        out[i] = best;
    }
    return out;
}

Tensor slice_leading(const Tensor& a, std::size_t begin, std::size_t end) {
    if (a.ndim() == 0 || begin >= end || end > a.dim(0)) {
        throw ShapeError("slice_leading: invalid range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") for " + to_string(a.shape()));
    }
    const std::size_t stride = a.size() / a.dim(0);
    Shape shape = a.shape();
    shape[0] = end - begin;
    auto src = a.data().subspan(begin * stride, (end - begin) * stride);
    return Tensor(std::move(shape), std::vector<float>(src.begin(), src.end()));
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    float m = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a[i] - b[i]));
    }
    return m;
}

}  // namespace hesplit
