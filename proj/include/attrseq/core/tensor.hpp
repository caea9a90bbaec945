#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "attrseq/core/errors.hpp"

namespace attrseq {

/// Dense vector of 64-bit reals. Entries supplied from outside the library
/// are checked for finiteness at construction; fills are trivially finite.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {}
    Vector(std::initializer_list<double> xs) : data_(xs) { check_finite(); }

    static Vector from(std::vector<double> xs) {
        Vector v;
        v.data_ = std::move(xs);
        v.check_finite();
        return v;
    }

    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double* begin() { return data_.data(); }
    double* end() { return data_.data() + data_.size(); }
    const double* begin() const { return data_.data(); }
    const double* end() const { return data_.data() + data_.size(); }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    void fill(double x) { std::fill(data_.begin(), data_.end(), x); }

    void check_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) throw NumericalError("non-finite entry in vector");
    }

    bool operator==(const Vector& o) const { return data_ == o.data_; }

private:
    std::vector<double> data_;
};

/// Dense row-major matrix of 64-bit reals.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from(std::size_t rows, std::size_t cols, std::vector<double> xs) {
        if (xs.size() != rows * cols)
            throw DimensionError("matrix data length " + std::to_string(xs.size()) +
                                 " != " + std::to_string(rows) + "x" + std::to_string(cols));
        Matrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.data_ = std::move(xs);
        m.check_finite();
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    void fill(double x) { std::fill(data_.begin(), data_.end(), x); }

    void check_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) throw NumericalError("non-finite entry in matrix");
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace attrseq
