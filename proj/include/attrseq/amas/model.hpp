#pragma once

#include <string>
#include <vector>

#include "attrseq/core/activations.hpp"
#include "attrseq/core/init.hpp"
#include "attrseq/core/lstm.hpp"
#include "attrseq/core/params.hpp"

namespace attrseq {

/// Attention flavor of the classifier.
///  - NoAttention: head reads f(v) + h_last
///  - ASA:  weights over the hidden states; head reads f(v) + (mu . h)_last
///  - ASHA: weights over f(v) + h_t; head reads the attended vector alone
enum class AmasVariant { NoAttention, ASA, ASHA };

inline const char* amas_variant_name(AmasVariant v) {
    switch (v) {
        case AmasVariant::NoAttention: return "none";
        case AmasVariant::ASA: return "asa";
        case AmasVariant::ASHA: return "asha";
    }
    return "?";
}

inline AmasVariant amas_variant_from_name(const std::string& s) {
    if (s == "none") return AmasVariant::NoAttention;
    if (s == "asa") return AmasVariant::ASA;
    if (s == "asha") return AmasVariant::ASHA;
    throw ConfigError("unknown attention variant: " + s);
}

struct AmasConfig {
    std::size_t attr_width = 0;   // u
    std::size_t vocab_size = 0;   // r
    std::size_t n_classes = 0;
    std::size_t att_hidden = 10;  // width of f(v)
    std::size_t lstm_hidden = 10;
    AmasVariant variant = AmasVariant::ASA;
    bool scalar_attention = false;  // one weight per step instead of one per dimension
    bool sigmoid_head = false;      // binary mode, n_classes == 2 only
    double dropout_att = 0.5;       // rate on the attnet output
    double dropout_fc = 0.2;        // rate on the head input
    double l2_recurrent = 1e-4;     // weight decay on the recurrent matrices

    std::size_t head_input_width() const { return att_hidden + lstm_hidden; }
};

struct AmasModel {
    AmasConfig cfg;
    Matrix w_r;  // att_hidden x u, tanh
    Vector b_r;
    LstmCellParams lstm;
    Matrix w_p;  // n_classes x head_input_width
    Vector b_p;
    std::vector<std::string> classes;  // label names, index = class id

    static AmasModel zeros(const AmasConfig& cfg) {
        if (cfg.n_classes == 0) throw ConfigError("AmasModel: need at least one class");
        if (cfg.sigmoid_head && cfg.n_classes != 2)
            throw ConfigError("AmasModel: sigmoid head requires exactly 2 classes");
        AmasModel m;
        m.cfg = cfg;
        m.w_r = Matrix(cfg.att_hidden, cfg.attr_width);
        m.b_r = Vector(cfg.att_hidden);
        m.lstm = LstmCellParams::zeros(cfg.lstm_hidden, cfg.vocab_size);
        m.w_p = Matrix(cfg.n_classes, cfg.head_input_width());
        m.b_p = Vector(cfg.n_classes);
        return m;
    }

    static AmasModel init(const AmasConfig& cfg, Rng& rng) {
        AmasModel m = zeros(cfg);
        m.w_r = init_glorot_uniform(rng, cfg.att_hidden, cfg.attr_width);
        m.lstm = LstmCellParams::init(rng, cfg.lstm_hidden, cfg.vocab_size);
        m.w_p = init_glorot_uniform(rng, cfg.n_classes, cfg.head_input_width());
        return m;
    }

    ParamRefs refs() {
        ParamRefs r;
        r.push_back({"attnet.w_r", &w_r, nullptr});
        r.push_back({"attnet.b_r", nullptr, &b_r});
        append_lstm_refs(r, "lstm", lstm);
        r.push_back({"head.w_p", &w_p, nullptr});
        r.push_back({"head.b_p", nullptr, &b_p});
        return r;
    }

    std::size_t class_index(const std::string& label) const {
        for (std::size_t i = 0; i < classes.size(); ++i)
            if (classes[i] == label) return i;
        throw ConfigError("unknown class label: " + label);
    }
};

}  // namespace attrseq
