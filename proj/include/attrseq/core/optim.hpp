#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "attrseq/core/errors.hpp"
#include "attrseq/core/params.hpp"

namespace attrseq {

/// theta <- theta - lr * grad, walking parameters and gradients in lockstep.
inline void sgd_update(ParamRefs params, const ParamRefs& grads, double learning_rate) {
    if (learning_rate <= 0.0) throw ConfigError("sgd_update: learning rate must be > 0");
    if (params.size() != grads.size()) throw DimensionError("sgd_update: ref count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].size() != grads[i].size())
            throw DimensionError("sgd_update: tensor size mismatch at " + params[i].name);
        double* p = params[i].data();
        const double* g = grads[i].data();
        for (std::size_t k = 0; k < params[i].size(); ++k) p[k] -= learning_rate * g[k];
    }
}

struct AdamConfig {
    double rho = 0.01;  // static learning rate
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment accumulators, zero-initialized and sized lazily on
/// the first step.
struct AdamState {
    std::vector<std::vector<double>> m, v;
    std::size_t t = 0;
};

/// Bias-corrected moment estimates, then theta <- theta - rho/sqrt(v_hat+eps) * m_hat.
inline void adam_update(AdamState& state, ParamRefs params, const ParamRefs& grads,
                        const AdamConfig& cfg) {
    if (cfg.rho <= 0.0) throw ConfigError("adam_update: rho must be > 0");
    if (params.size() != grads.size()) throw DimensionError("adam_update: ref count mismatch");
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i].size(), 0.0);
            state.v[i].assign(params[i].size(), 0.0);
        }
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].size() != grads[i].size() || params[i].size() != state.m[i].size())
            throw DimensionError("adam_update: tensor size mismatch at " + params[i].name);
        double* p = params[i].data();
        const double* g = grads[i].data();
        for (std::size_t k = 0; k < params[i].size(); ++k) {
            state.m[i][k] = cfg.beta1 * state.m[i][k] + (1.0 - cfg.beta1) * g[k];
            state.v[i][k] = cfg.beta2 * state.v[i][k] + (1.0 - cfg.beta2) * g[k] * g[k];
            const double m_hat = state.m[i][k] / bc1;
            const double v_hat = state.v[i][k] / bc2;
            p[k] -= cfg.rho / std::sqrt(v_hat + cfg.eps) * m_hat;
        }
    }
}

}  // namespace attrseq
