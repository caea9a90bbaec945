#pragma once

#include <cmath>

#include "attrseq/core/rng.hpp"
#include "attrseq/core/tensor.hpp"

namespace attrseq {

inline Matrix init_uniform_symmetric(Rng& rng, std::size_t rows, std::size_t cols, double bound) {
    Matrix m(rows, cols);
    for (double& x : m.raw()) x = rng.uniform(-bound, bound);
    return m;
}

/// Normalized uniform initialization: entries i.i.d. in
/// [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))] for a rows x cols map.
inline Matrix init_glorot_uniform(Rng& rng, std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) return Matrix(rows, cols);
    double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    return init_uniform_symmetric(rng, rows, cols, bound);
}

/// Random orthogonal n x n matrix: Gaussian draw followed by modified
/// Gram-Schmidt on the columns. M^T M = I to well below 1e-9.
inline Matrix init_orthogonal(Rng& rng, std::size_t n) {
    if (n == 0) return Matrix(0, 0);
    Matrix m(n, n);
    for (double& x : m.raw()) x = rng.normal();
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t prev = 0; prev < c; ++prev) {
            double proj = 0.0;
            for (std::size_t r = 0; r < n; ++r) proj += m(r, c) * m(r, prev);
            for (std::size_t r = 0; r < n; ++r) m(r, c) -= proj * m(r, prev);
        }
        double norm = 0.0;
        for (std::size_t r = 0; r < n; ++r) norm += m(r, c) * m(r, c);
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            // Degenerate column (essentially impossible with Gaussian draws):
            // replace with a fresh draw and redo this column.
            for (std::size_t r = 0; r < n; ++r) m(r, c) = rng.normal();
            --c;
            continue;
        }
        for (std::size_t r = 0; r < n; ++r) m(r, c) /= norm;
    }
    return m;
}

}  // namespace attrseq
