#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "attrseq/core/activations.hpp"
#include "attrseq/core/init.hpp"
#include "attrseq/core/linalg.hpp"
#include "attrseq/core/params.hpp"
#include "attrseq/core/tensor.hpp"

namespace attrseq {

/// Parameters of one LSTM cell with hidden size d over inputs of size r:
///   i, f, o = sigmoid(W x + U h_prev + b)
///   g       = tanh   (W x + U h_prev + b)
///   c       = f . c_prev + i . g
///   h       = o . tanh(c)
struct LstmCellParams {
    Matrix w_i, w_f, w_o, w_c;  // d x r
    Matrix u_i, u_f, u_o, u_c;  // d x d
    Vector b_i, b_f, b_o, b_c;  // d

    std::size_t hidden_size() const { return w_i.rows(); }
    std::size_t input_size() const { return w_i.cols(); }

    static LstmCellParams zeros(std::size_t hidden, std::size_t input) {
        LstmCellParams p;
        p.w_i = Matrix(hidden, input);
        p.w_f = Matrix(hidden, input);
        p.w_o = Matrix(hidden, input);
        p.w_c = Matrix(hidden, input);
        p.u_i = Matrix(hidden, hidden);
        p.u_f = Matrix(hidden, hidden);
        p.u_o = Matrix(hidden, hidden);
        p.u_c = Matrix(hidden, hidden);
        p.b_i = Vector(hidden);
        p.b_f = Vector(hidden);
        p.b_o = Vector(hidden);
        p.b_c = Vector(hidden);
        return p;
    }

    /// Kernels uniform in +-kernel_bound (glorot bound when kernel_bound <= 0),
    /// recurrent matrices orthogonal, biases zero.
    static LstmCellParams init(Rng& rng, std::size_t hidden, std::size_t input,
                               double kernel_bound = 0.0) {
        LstmCellParams p = zeros(hidden, input);
        auto kernel = [&](Matrix& m) {
            m = kernel_bound > 0.0 ? init_uniform_symmetric(rng, hidden, input, kernel_bound)
                                   : init_glorot_uniform(rng, hidden, input);
        };
        kernel(p.w_i);
        kernel(p.w_f);
        kernel(p.w_o);
        kernel(p.w_c);
        p.u_i = init_orthogonal(rng, hidden);
        p.u_f = init_orthogonal(rng, hidden);
        p.u_o = init_orthogonal(rng, hidden);
        p.u_c = init_orthogonal(rng, hidden);
        return p;
    }

    void check_shapes() const {
        const std::size_t d = hidden_size(), r = input_size();
        auto mat = [&](const Matrix& m, std::size_t rows, std::size_t cols) {
            if (m.rows() != rows || m.cols() != cols) throw DimensionError("LSTM parameter shape mismatch");
        };
        mat(w_f, d, r); mat(w_o, d, r); mat(w_c, d, r);
        mat(u_i, d, d); mat(u_f, d, d); mat(u_o, d, d); mat(u_c, d, d);
        if (b_i.size() != d || b_f.size() != d || b_o.size() != d || b_c.size() != d)
            throw DimensionError("LSTM bias length mismatch");
    }
};

inline void append_lstm_refs(ParamRefs& refs, const std::string& prefix, LstmCellParams& p) {
    refs.push_back({prefix + ".w_i", &p.w_i, nullptr});
    refs.push_back({prefix + ".w_f", &p.w_f, nullptr});
    refs.push_back({prefix + ".w_o", &p.w_o, nullptr});
    refs.push_back({prefix + ".w_c", &p.w_c, nullptr});
    refs.push_back({prefix + ".u_i", &p.u_i, nullptr});
    refs.push_back({prefix + ".u_f", &p.u_f, nullptr});
    refs.push_back({prefix + ".u_o", &p.u_o, nullptr});
    refs.push_back({prefix + ".u_c", &p.u_c, nullptr});
    refs.push_back({prefix + ".b_i", nullptr, &p.b_i});
    refs.push_back({prefix + ".b_f", nullptr, &p.b_f});
    refs.push_back({prefix + ".b_o", nullptr, &p.b_o});
    refs.push_back({prefix + ".b_c", nullptr, &p.b_c});
}

/// Elementwise accumulation, used to fold per-pass gradients into a total.
inline void accumulate_lstm(LstmCellParams& into, const LstmCellParams& from) {
    auto addm = [](Matrix& a, const Matrix& b) {
        for (std::size_t i = 0; i < a.raw().size(); ++i) a.raw()[i] += b.raw()[i];
    };
    addm(into.w_i, from.w_i); addm(into.w_f, from.w_f); addm(into.w_o, from.w_o); addm(into.w_c, from.w_c);
    addm(into.u_i, from.u_i); addm(into.u_f, from.u_f); addm(into.u_o, from.u_o); addm(into.u_c, from.u_c);
    add_inplace(into.b_i, from.b_i);
    add_inplace(into.b_f, from.b_f);
    add_inplace(into.b_o, from.b_o);
    add_inplace(into.b_c, from.b_c);
}

struct LstmState {
    Vector h, c;
    LstmState() = default;
    explicit LstmState(std::size_t d) : h(d), c(d) {}
};

struct LstmGates {
    Vector i, f, o, g;
};

struct LstmStepCache {
    Vector x;
    LstmState prev;  // state fed into this step (post-injection value of h)
    LstmGates gates;
    Vector c_new;
};

/// One forward step; gates are returned for backprop caching.
inline std::pair<LstmState, LstmGates> lstm_step(const LstmCellParams& p, const Vector& x,
                                                 const LstmState& prev) {
    const std::size_t d = p.hidden_size();
    if (x.size() != p.input_size()) throw DimensionError("lstm_step: input width mismatch");
    if (prev.h.size() != d || prev.c.size() != d) throw DimensionError("lstm_step: state width mismatch");

    auto gate = [&](const Matrix& w, const Matrix& u, const Vector& b) {
        Vector pre = matvec(w, x);
        add_inplace(pre, matvec(u, prev.h));
        add_inplace(pre, b);
        return pre;
    };
    LstmGates gates;
    gates.i = sigmoid(gate(p.w_i, p.u_i, p.b_i));
    gates.f = sigmoid(gate(p.w_f, p.u_f, p.b_f));
    gates.o = sigmoid(gate(p.w_o, p.u_o, p.b_o));
    gates.g = tanh_act(gate(p.w_c, p.u_c, p.b_c));

    LstmState next(d);
    for (std::size_t k = 0; k < d; ++k) {
        next.c[k] = gates.f[k] * prev.c[k] + gates.i[k] * gates.g[k];
        next.h[k] = gates.o[k] * std::tanh(next.c[k]);
    }
    return {next, gates};
}

/// Forward cache over a sequence. add_to_hidden() supports conditioning
/// terms injected into the hidden state after a step; the injected value is
/// what the next step (and the cache) sees.
struct LstmRun {
    std::vector<LstmStepCache> steps;
    LstmState state;
    std::vector<Vector> hs;  // post-injection hidden state per step

    explicit LstmRun(std::size_t d) : state(d) {}

    void step(const LstmCellParams& p, const Vector& x) {
        auto [next, gates] = lstm_step(p, x, state);
        steps.push_back({x, state, gates, next.c});
        state = next;
        hs.push_back(state.h);
    }

    void add_to_hidden(const Vector& v) {
        add_inplace(state.h, v);
        hs.back() = state.h;
    }

    std::size_t length() const { return steps.size(); }
};

struct LstmGrads {
    LstmCellParams params;        // d/d(W,U,b), same layout as the cell
    std::vector<Vector> x;        // d/d(input) per step
    std::vector<Vector> h_total;  // total gradient arriving at each step's hidden state
    LstmState initial;            // d/d(h0), d/d(c0)
};

/// Full backpropagation through time. `d_h` carries one upstream gradient
/// per step (zero vectors where the loss does not touch that step) and
/// `d_c_final` the gradient on the final cell state. h_total reports the
/// combined gradient at each step's post-injection hidden state, which is
/// also the gradient of any vector added there via add_to_hidden.
inline LstmGrads lstm_backward(const LstmCellParams& p, const std::vector<LstmStepCache>& steps,
                               const std::vector<Vector>& d_h, const Vector& d_c_final) {
    const std::size_t d = p.hidden_size();
    const std::size_t T = steps.size();
    if (T == 0) throw DimensionError("lstm_backward: empty step cache");
    if (d_h.size() != T) throw DimensionError("lstm_backward: d_h length != steps");

    LstmGrads g;
    g.params = LstmCellParams::zeros(d, p.input_size());
    g.x.resize(T);
    g.h_total.resize(T);

    Vector dh_carry(d);
    Vector dc_carry = d_c_final.size() ? d_c_final : Vector(d);
    if (dc_carry.size() != d) throw DimensionError("lstm_backward: d_c_final width mismatch");

    for (std::size_t t = T; t-- > 0;) {
        const LstmStepCache& s = steps[t];
        if (d_h[t].size() != d) throw DimensionError("lstm_backward: d_h width mismatch");

        Vector dh = add(d_h[t], dh_carry);
        g.h_total[t] = dh;

        Vector d_i(d), d_f(d), d_o(d), d_g(d), dc_prev(d);
        for (std::size_t k = 0; k < d; ++k) {
            const double tc = std::tanh(s.c_new[k]);
            const double dO = dh[k] * tc;
            const double dc = dc_carry[k] + dh[k] * s.gates.o[k] * (1.0 - tc * tc);
            d_o[k] = dO;
            d_f[k] = dc * s.prev.c[k];
            d_i[k] = dc * s.gates.g[k];
            d_g[k] = dc * s.gates.i[k];
            dc_prev[k] = dc * s.gates.f[k];
        }
        // pre-activation gradients
        Vector d_ai(d), d_af(d), d_ao(d), d_ag(d);
        for (std::size_t k = 0; k < d; ++k) {
            d_ai[k] = d_i[k] * s.gates.i[k] * (1.0 - s.gates.i[k]);
            d_af[k] = d_f[k] * s.gates.f[k] * (1.0 - s.gates.f[k]);
            d_ao[k] = d_o[k] * s.gates.o[k] * (1.0 - s.gates.o[k]);
            d_ag[k] = d_g[k] * (1.0 - s.gates.g[k] * s.gates.g[k]);
        }

        add_outer(g.params.w_i, d_ai, s.x);
        add_outer(g.params.w_f, d_af, s.x);
        add_outer(g.params.w_o, d_ao, s.x);
        add_outer(g.params.w_c, d_ag, s.x);
        add_outer(g.params.u_i, d_ai, s.prev.h);
        add_outer(g.params.u_f, d_af, s.prev.h);
        add_outer(g.params.u_o, d_ao, s.prev.h);
        add_outer(g.params.u_c, d_ag, s.prev.h);
        add_inplace(g.params.b_i, d_ai);
        add_inplace(g.params.b_f, d_af);
        add_inplace(g.params.b_o, d_ao);
        add_inplace(g.params.b_c, d_ag);

        Vector dx = matvec_t(p.w_i, d_ai);
        add_inplace(dx, matvec_t(p.w_f, d_af));
        add_inplace(dx, matvec_t(p.w_o, d_ao));
        add_inplace(dx, matvec_t(p.w_c, d_ag));
        g.x[t] = std::move(dx);

        dh_carry = matvec_t(p.u_i, d_ai);
        add_inplace(dh_carry, matvec_t(p.u_f, d_af));
        add_inplace(dh_carry, matvec_t(p.u_o, d_ao));
        add_inplace(dh_carry, matvec_t(p.u_c, d_ag));
        dc_carry = std::move(dc_prev);
    }
    g.initial.h = std::move(dh_carry);
    g.initial.c = std::move(dc_carry);
    return g;
}

/// Backward for a scalar loss that touches only the final hidden state.
inline LstmGrads lstm_backward(const LstmCellParams& p, const std::vector<LstmStepCache>& steps,
                               const Vector& d_h_final) {
    std::vector<Vector> d_h(steps.size(), Vector(p.hidden_size()));
    if (!steps.empty()) d_h.back() = d_h_final;
    return lstm_backward(p, steps, d_h, Vector(p.hidden_size()));
}

}  // namespace attrseq
