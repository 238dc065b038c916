#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "arnlstm/error.hpp"

namespace arnlstm {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << ']';
    return os.str();
}

/// Dense row-major array of doubles. Shape and data size always agree.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

    Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_size(shape_) != data_.size()) {
            throw ShapeError("tensor shape " + shape_string(shape_) + " does not hold " +
                             std::to_string(data_.size()) + " values");
        }
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
        return Tensor({rows, cols}, fill);
    }

    /// Build a matrix from nested rows, e.g. Tensor::rows({{1, 2}, {3, 4}}).
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.begin()->size() : 0;
        std::vector<double> data;
        data.reserve(r * c);
        for (const auto& row : rows) {
            if (row.size() != c) throw ShapeError("ragged rows in Tensor::from_rows");
            data.insert(data.end(), row.begin(), row.end());
        }
        return Tensor({r, c}, std::move(data));
    }

    static Tensor scalar(double v) { return Tensor({1, 1}, v); }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

    std::size_t rows() const { return shape_.empty() ? 1 : shape_.front(); }
    std::size_t cols() const { return shape_.size() < 2 ? 1 : size() / rows(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    double item() const {
        if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape_));
        return data_[0];
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Tensor& operator+=(const Tensor& other) {
        if (other.shape_ != shape_) {
            throw ShapeError("cannot accumulate " + shape_string(other.shape_) + " into " +
                             shape_string(shape_));
        }
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return *this;
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// out(M×N) += a(M×K) · b(K×N), plain i-k-j loop.
inline void gemm_acc(std::span<const double> a, std::span<const double> b, std::span<double> out,
                     std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* orow = out.data() + i * n;
        const double* arow = a.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

/// out(M×N) += a(M×K) · b(N×K)ᵀ
inline void gemm_nt_acc(std::span<const double> a, std::span<const double> b, std::span<double> out,
                        std::size_t m, std::size_t k, std::size_t n) {
    // Transpose b once so the inner loop runs over contiguous output columns.
    std::vector<double> bt(k * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
    gemm_acc(a, bt, out, m, k, n);
}

/// out(K×N) += a(M×K)ᵀ · b(M×N)
inline void gemm_tn_acc(std::span<const double> a, std::span<const double> b, std::span<double> out,
                        std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a.data() + i * k;
        const double* brow = b.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            double* orow = out.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
}

} // namespace arnlstm
