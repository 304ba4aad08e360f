#pragma once

#include <cstddef>
#include <vector>

namespace trajkit {

/// Dense row-major matrix of doubles. Small cohorts only, so no fancy
/// storage; everything that matters for determinism is the fixed
/// element order.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double> row(std::size_t i) const {
        return std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                                   data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

inline double squared_distance(const Matrix& m, std::size_t i, std::size_t j) {
    double acc = 0.0;
    for (std::size_t d = 0; d < m.cols(); ++d) {
        const double diff = m(i, d) - m(j, d);
        acc += diff * diff;
    }
    return acc;
}

} // namespace trajkit
