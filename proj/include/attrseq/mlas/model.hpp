#pragma once

#include <string>

#include "attrseq/core/activations.hpp"
#include "attrseq/core/init.hpp"
#include "attrseq/core/lstm.hpp"
#include "attrseq/core/params.hpp"

namespace attrseq {

/// How the attribute tower and the sequence tower are joined into one
/// embedding function.
///  - Balanced:   z = act(W_z (V + h) + b_z) over the concatenation
///  - AttCentric: the final hidden state joins the attributes as attnet input
///  - SeqCentric: the attnet output is added to the hidden state after step 1
enum class FusionKind { Balanced, AttCentric, SeqCentric };

inline const char* fusion_name(FusionKind k) {
    switch (k) {
        case FusionKind::Balanced: return "balanced";
        case FusionKind::AttCentric: return "att_centric";
        case FusionKind::SeqCentric: return "seq_centric";
    }
    return "?";
}

inline FusionKind fusion_from_name(const std::string& s) {
    if (s == "balanced") return FusionKind::Balanced;
    if (s == "att_centric") return FusionKind::AttCentric;
    if (s == "seq_centric") return FusionKind::SeqCentric;
    throw ConfigError("unknown fusion kind: " + s);
}

/// Which form the distance factor d(dist)/d(embedding) takes during
/// backprop. `Exact` is the calculus derivative diff/dist of the Euclidean
/// norm; `Surrogate` multiplies the embedding difference elementwise by
/// (1 - difference) instead of normalizing, and is kept selectable for
/// comparison runs.
enum class DistanceGradient { Exact, Surrogate };

struct MlasConfig {
    std::size_t attr_width = 0;   // u
    std::size_t vocab_size = 0;   // r
    std::size_t att_hidden = 10;  // d_M, attnet output width
    std::size_t seq_hidden = 10;  // d_S, lstm hidden width
    std::size_t out_dim = 10;     // balanced fusion output width d
    std::size_t att_depth = 1;    // M
    FusionKind fusion = FusionKind::Balanced;
    Activation att_act = Activation::Sigmoid;  // activation of attnet and fusion layers
    double margin = 1.0;                       // g
    DistanceGradient dist_grad = DistanceGradient::Exact;

    std::size_t embed_dim() const {
        switch (fusion) {
            case FusionKind::Balanced: return out_dim;
            case FusionKind::AttCentric: return att_hidden;
            case FusionKind::SeqCentric: return seq_hidden;
        }
        return 0;
    }
};

struct MlasModel {
    MlasConfig cfg;
    DenseStack attnet;   // M layers; att-centric widens the first layer input by d_S
    LstmCellParams lstm; // hidden d_S over one-hot items
    Matrix w_z;          // balanced fusion layer, d x (d_M + d_S)
    Vector b_z;

    static MlasModel zeros(const MlasConfig& cfg) {
        if (cfg.fusion == FusionKind::SeqCentric && cfg.seq_hidden != cfg.att_hidden)
            throw ConfigError("seq-centric fusion requires equal attnet and seqnet widths");
        if (cfg.margin <= 0.0) throw ConfigError("margin must be > 0");
        MlasModel m;
        m.cfg = cfg;
        std::size_t in = cfg.attr_width;
        if (cfg.fusion == FusionKind::AttCentric) in += cfg.seq_hidden;
        for (std::size_t i = 0; i < cfg.att_depth; ++i) {
            m.attnet.push_layer(Matrix(cfg.att_hidden, in), Vector(cfg.att_hidden));
            in = cfg.att_hidden;
        }
        m.lstm = LstmCellParams::zeros(cfg.seq_hidden, cfg.vocab_size);
        if (cfg.fusion == FusionKind::Balanced) {
            m.w_z = Matrix(cfg.out_dim, cfg.att_hidden + cfg.seq_hidden);
            m.b_z = Vector(cfg.out_dim);
        }
        return m;
    }

    static MlasModel init(const MlasConfig& cfg, Rng& rng) {
        MlasModel m = zeros(cfg);
        for (std::size_t i = 0; i < m.attnet.depth(); ++i)
            m.attnet.w[i] = init_glorot_uniform(rng, m.attnet.w[i].rows(), m.attnet.w[i].cols());
        m.lstm = LstmCellParams::init(rng, cfg.seq_hidden, cfg.vocab_size);
        if (cfg.fusion == FusionKind::Balanced)
            m.w_z = init_glorot_uniform(rng, m.w_z.rows(), m.w_z.cols());
        return m;
    }

    ParamRefs refs() {
        ParamRefs r;
        append_dense_refs(r, "attnet", attnet);
        append_lstm_refs(r, "lstm", lstm);
        if (cfg.fusion == FusionKind::Balanced) {
            r.push_back({"fusion.w_z", &w_z, nullptr});
            r.push_back({"fusion.b_z", nullptr, &b_z});
        }
        return r;
    }
};

}  // namespace attrseq
