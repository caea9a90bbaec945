#pragma once

#include <algorithm>
#include <cmath>

#include "attrseq/core/tensor.hpp"

namespace attrseq {

// Logistic sigmoid. Inputs are clamped to [-500, 500]; exp(500) already
// saturates the output to 1 or 0 well below double-precision resolution.
inline double sigmoid(double z) {
    z = std::clamp(z, -500.0, 500.0);
    return 1.0 / (1.0 + std::exp(-z));
}

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

inline Vector sigmoid(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid(v[i]);
    return out;
}

inline Vector relu(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = relu(v[i]);
    return out;
}

inline Vector tanh_act(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
    return out;
}

/// Softmax with max-subtraction. Adding a constant to every input leaves the
/// result bitwise unchanged.
inline Vector softmax(const Vector& v) {
    if (v.empty()) throw DimensionError("softmax: empty vector");
    double m = v[0];
    for (double x : v) m = std::max(m, x);
    Vector out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - m);
        sum += out[i];
    }
    for (std::size_t i = 0; i < v.size(); ++i) out[i] /= sum;
    return out;
}

enum class Activation { Sigmoid, Relu, Tanh, Identity };

inline Vector apply_activation(Activation act, const Vector& pre) {
    switch (act) {
        case Activation::Sigmoid: return sigmoid(pre);
        case Activation::Relu: return relu(pre);
        case Activation::Tanh: return tanh_act(pre);
        case Activation::Identity: return pre;
    }
    throw ConfigError("unknown activation");
}

/// d(activation)/d(pre-activation) expressed through the activation output.
inline double activation_deriv_from_output(Activation act, double y) {
    switch (act) {
        case Activation::Sigmoid: return y * (1.0 - y);
        case Activation::Relu: return y > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - y * y;
        case Activation::Identity: return 1.0;
    }
    throw ConfigError("unknown activation");
}

inline const char* activation_name(Activation act) {
    switch (act) {
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    return "?";
}

inline Activation activation_from_name(const std::string& name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity") return Activation::Identity;
    throw ConfigError("unknown activation name: " + name);
}

}  // namespace attrseq
