#pragma once

#include <functional>
#include <string>
#include <vector>

#include "attrseq/core/activations.hpp"
#include "attrseq/core/linalg.hpp"
#include "attrseq/core/tensor.hpp"

namespace attrseq {

/// Named reference to one parameter tensor. Every model exposes its tensors
/// in a fixed order through refs(); gradients live in a zeroed clone of the
/// model so the same walk applies to both sides.
struct TensorRef {
    std::string name;
    Matrix* mat = nullptr;
    Vector* vec = nullptr;

    std::size_t size() const { return mat ? mat->size() : vec->size(); }
    double* data() { return mat ? mat->raw().data() : vec->raw().data(); }
    const double* data() const { return mat ? mat->raw().data() : vec->raw().data(); }
};

using ParamRefs = std::vector<TensorRef>;

inline std::size_t param_count(const ParamRefs& refs) {
    std::size_t n = 0;
    for (const auto& r : refs) n += r.size();
    return n;
}

inline std::vector<double*> flatten(ParamRefs& refs) {
    std::vector<double*> out;
    out.reserve(param_count(refs));
    for (auto& r : refs) {
        double* p = r.data();
        for (std::size_t i = 0; i < r.size(); ++i) out.push_back(p + i);
    }
    return out;
}

inline std::vector<double> flatten_values(const ParamRefs& refs) {
    std::vector<double> out;
    out.reserve(param_count(refs));
    for (const auto& r : refs) {
        const double* p = r.data();
        out.insert(out.end(), p, p + r.size());
    }
    return out;
}

/// Stack of fully connected layers (weights and biases only; callers pick
/// the activation per stack).
struct DenseStack {
    std::vector<Matrix> w;
    std::vector<Vector> b;

    std::size_t depth() const { return w.size(); }

    void push_layer(Matrix weight, Vector bias) {
        if (weight.rows() != bias.size()) throw DimensionError("dense layer: bias length != rows");
        w.push_back(std::move(weight));
        b.push_back(std::move(bias));
    }

    static DenseStack zeros_like(const DenseStack& o) {
        DenseStack s;
        for (std::size_t i = 0; i < o.w.size(); ++i) {
            s.w.emplace_back(o.w[i].rows(), o.w[i].cols());
            s.b.emplace_back(o.b[i].size());
        }
        return s;
    }
};

inline Vector dense_forward(const Matrix& w, const Vector& b, const Vector& x, Activation act) {
    Vector pre = matvec(w, x);
    add_inplace(pre, b);
    return apply_activation(act, pre);
}

/// Forward through a whole stack; returns the per-layer outputs (the cache
/// needed for the backward pass).
inline std::vector<Vector> dense_stack_forward(const DenseStack& s, const Vector& x, Activation act) {
    std::vector<Vector> outs;
    outs.reserve(s.depth());
    const Vector* in = &x;
    for (std::size_t i = 0; i < s.depth(); ++i) {
        outs.push_back(dense_forward(s.w[i], s.b[i], *in, act));
        in = &outs.back();
    }
    return outs;
}

/// One dense layer backward. `out` is the cached activation output, `d_out`
/// the upstream gradient. Accumulates into dw/db and returns d_input.
inline Vector dense_backward(const Matrix& w, const Vector& x, const Vector& out,
                             const Vector& d_out, Activation act, Matrix& dw, Vector& db) {
    Vector d_pre(out.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        d_pre[i] = d_out[i] * activation_deriv_from_output(act, out[i]);
    add_outer(dw, d_pre, x);
    add_inplace(db, d_pre);
    return matvec_t(w, d_pre);
}

/// Backward through a stack given the forward cache; returns d_input.
inline Vector dense_stack_backward(const DenseStack& s, const Vector& x,
                                   const std::vector<Vector>& outs, const Vector& d_top,
                                   Activation act, DenseStack& grads) {
    Vector d = d_top;
    for (std::size_t i = s.depth(); i-- > 0;) {
        const Vector& in = (i == 0) ? x : outs[i - 1];
        d = dense_backward(s.w[i], in, outs[i], d, act, grads.w[i], grads.b[i]);
    }
    return d;
}

inline void append_dense_refs(ParamRefs& refs, const std::string& prefix, DenseStack& s) {
    for (std::size_t i = 0; i < s.depth(); ++i) {
        refs.push_back({prefix + ".w" + std::to_string(i), &s.w[i], nullptr});
        refs.push_back({prefix + ".b" + std::to_string(i), nullptr, &s.b[i]});
    }
}

}  // namespace attrseq
