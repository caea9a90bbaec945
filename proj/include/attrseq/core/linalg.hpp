#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "attrseq/core/tensor.hpp"

namespace attrseq {

inline void require_len(const Vector& v, std::size_t len, const char* what) {
    if (v.size() != len)
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(len) +
                             ", got " + std::to_string(v.size()));
}

/// m * v, standard matrix-vector product.
inline Vector matvec(const Matrix& m, const Vector& v) {
    if (m.cols() != v.size())
        throw DimensionError("matvec: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             " * vec(" + std::to_string(v.size()) + ")");
    Vector out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c] * v[c];
        out[r] = acc;
    }
    return out;
}

/// m^T * v.
inline Vector matvec_t(const Matrix& m, const Vector& v) {
    if (m.rows() != v.size())
        throw DimensionError("matvec_t: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             "^T * vec(" + std::to_string(v.size()) + ")");
    Vector out(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row(r);
        const double vr = v[r];
        for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c] * vr;
    }
    return out;
}

/// m += a * b^T (gradient accumulation for dense layers).
inline void add_outer(Matrix& m, const Vector& a, const Vector& b) {
    if (m.rows() != a.size() || m.cols() != b.size())
        throw DimensionError("add_outer: shape mismatch");
    for (std::size_t r = 0; r < m.rows(); ++r) {
        double* row = m.row(r);
        const double ar = a[r];
        for (std::size_t c = 0; c < m.cols(); ++c) row[c] += ar * b[c];
    }
}

inline void add_inplace(Vector& a, const Vector& b) {
    require_len(b, a.size(), "add_inplace");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

inline void axpy(Vector& y, double alpha, const Vector& x) {
    require_len(x, y.size(), "axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline Vector add(const Vector& a, const Vector& b) {
    require_len(b, a.size(), "add");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Vector sub(const Vector& a, const Vector& b) {
    require_len(b, a.size(), "sub");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vector hadamard(const Vector& a, const Vector& b) {
    require_len(b, a.size(), "hadamard");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

inline Vector scale(const Vector& a, double s) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
    return out;
}

inline double dot(const Vector& a, const Vector& b) {
    require_len(b, a.size(), "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double squared_norm(const Vector& a) { return dot(a, a); }

inline double norm2(const Vector& a) { return std::sqrt(squared_norm(a)); }

inline double norm1(const Vector& a) {
    double acc = 0.0;
    for (double x : a) acc += std::abs(x);
    return acc;
}

inline Vector concat(const Vector& a, const Vector& b) {
    Vector out(a.size() + b.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[a.size() + i] = b[i];
    return out;
}

inline Vector slice(const Vector& a, std::size_t begin, std::size_t len) {
    if (begin + len > a.size()) throw DimensionError("slice: out of range");
    Vector out(len);
    for (std::size_t i = 0; i < len; ++i) out[i] = a[begin + i];
    return out;
}

/// Unit vector of length r with a single 1 at `index`.
inline Vector one_hot(std::size_t index, std::size_t r) {
    if (index >= r) throw VocabError("one_hot: index " + std::to_string(index) +
                                     " >= vocabulary size " + std::to_string(r));
    Vector out(r);
    out[index] = 1.0;
    return out;
}

}  // namespace attrseq
