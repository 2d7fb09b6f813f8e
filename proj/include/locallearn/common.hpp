#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace locallearn {

/// Class labels are contiguous integers starting at 1.
using Label = int;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files; the message names the offending row.
class ParseError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Execution policy for the data-parallel kernels.
enum class Exec { Serial, Parallel };

/// Non-owning row-major view of an n x d block of doubles.
struct MatrixView {
    std::span<const double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;

    MatrixView() = default;
    MatrixView(std::span<const double> v, std::size_t r, std::size_t c)
        : values(v), rows(r), cols(c) {
        if (v.size() != r * c) throw DimensionError("matrix view size does not match rows*cols");
    }

    std::span<const double> row(std::size_t i) const { return values.subspan(i * cols, cols); }
    bool empty() const { return rows == 0; }
};

/// Owning row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : values_(rows * cols, fill), rows_(rows), cols_(cols) {}
    Matrix(std::vector<double> values, std::size_t rows, std::size_t cols)
        : values_(std::move(values)), rows_(rows), cols_(cols) {
        if (values_.size() != rows * cols) throw DimensionError("matrix size does not match rows*cols");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    MatrixView view() const { return {values_, rows_, cols_}; }
    operator MatrixView() const { return view(); }

    void push_row(std::span<const double> r) {
        if (rows_ == 0 && cols_ == 0) cols_ = r.size();
        if (r.size() != cols_) throw DimensionError("row dimension mismatch");
        values_.insert(values_.end(), r.begin(), r.end());
        ++rows_;
    }

private:
    std::vector<double> values_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

}  // namespace locallearn
