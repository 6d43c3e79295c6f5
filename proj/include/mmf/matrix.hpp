#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <vector>

#include "mmf/kernels.hpp"

namespace mmf {

// Row-major dense matrix of doubles. The workhorse value type of the whole
// project; every embedding, weight and gradient is one of these.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> vals)
        : rows_(rows), cols_(cols), data_(vals) {
        if (data_.size() != rows * cols)
            throw std::invalid_argument("Matrix: initializer size mismatch");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix row_vector(const std::vector<double>& v) {
        Matrix m(1, v.size());
        m.data_ = v;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& at_flat(std::size_t i) { return data_[i]; }
    double at_flat(std::size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::fabs(v));
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
    Matrix c(a.rows(), b.cols());
    kernels::matmul(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
    return c;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("add: shape mismatch");
    Matrix c = a;
    kernels::axpy(1.0, b.data(), c.data(), c.size());
    return c;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("sub: shape mismatch");
    Matrix c = a;
    kernels::axpy(-1.0, b.data(), c.data(), c.size());
    return c;
}

inline Matrix operator*(double s, const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    kernels::axpy(s, a.data(), c.data(), c.size());
    return c;
}

// Numerically safe row softmax (per-row max subtraction).
inline Matrix softmax_rows(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double mx = m(i, 0);
        for (std::size_t j = 1; j < m.cols(); ++j) mx = std::max(mx, m(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = std::exp(m(i, j) - mx);
            z += out(i, j);
        }
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) /= z;
    }
    return out;
}

// Glorot-style uniform init on (-a, a), a = sqrt(6 / (fan_in + fan_out)).
inline Matrix glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-a, a);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.at_flat(i) = dist(rng);
    return m;
}

}  // namespace mmf
