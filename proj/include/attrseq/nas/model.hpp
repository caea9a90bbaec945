#pragma once

#include <string>

#include "attrseq/core/init.hpp"
#include "attrseq/core/lstm.hpp"
#include "attrseq/core/params.hpp"
#include "attrseq/core/rng.hpp"

namespace attrseq {

/// Unsupervised embedding model: an attribute autoencoder (relu encoder,
/// sigmoid decoder) conditions an LSTM next-item predictor by adding the
/// encoding to the hidden state after the first step. The embedding is the
/// final LSTM cell state. Encoder width equals the LSTM hidden width.
struct NasConfig {
    std::size_t attr_width = 0;  // u
    std::size_t vocab_size = 0;  // r
    std::size_t embed_dim = 15;  // d (and the encoder output width)
    std::size_t depth = 1;       // M encoder layers; the decoder mirrors them
    bool conditioned = true;     // false = sequence-only ablation
};

struct NasModel {
    NasConfig cfg;
    DenseStack encoder;  // relu: u -> d, then d -> d
    DenseStack decoder;  // sigmoid: d -> d, then d -> u
    LstmCellParams lstm; // hidden d over one-hot inputs of width r
    Matrix w_y;          // r x d next-item head
    Vector b_y;          // r

    static NasModel zeros(const NasConfig& cfg) {
        NasModel m;
        m.cfg = cfg;
        std::size_t in = cfg.attr_width;
        for (std::size_t i = 0; i < cfg.depth; ++i) {
            m.encoder.push_layer(Matrix(cfg.embed_dim, in), Vector(cfg.embed_dim));
            in = cfg.embed_dim;
        }
        for (std::size_t i = 0; i < cfg.depth; ++i) {
            std::size_t out = (i + 1 == cfg.depth) ? cfg.attr_width : cfg.embed_dim;
            m.decoder.push_layer(Matrix(out, cfg.embed_dim), Vector(out));
        }
        m.lstm = LstmCellParams::zeros(cfg.embed_dim, cfg.vocab_size);
        m.w_y = Matrix(cfg.vocab_size, cfg.embed_dim);
        m.b_y = Vector(cfg.vocab_size);
        return m;
    }

    /// Dense and kernel weights from the normalized uniform distribution,
    /// recurrent matrices orthogonal, biases zero.
    static NasModel init(const NasConfig& cfg, Rng& rng) {
        NasModel m = zeros(cfg);
        for (std::size_t i = 0; i < m.encoder.depth(); ++i)
            m.encoder.w[i] = init_glorot_uniform(rng, m.encoder.w[i].rows(), m.encoder.w[i].cols());
        for (std::size_t i = 0; i < m.decoder.depth(); ++i)
            m.decoder.w[i] = init_glorot_uniform(rng, m.decoder.w[i].rows(), m.decoder.w[i].cols());
        m.lstm = LstmCellParams::init(rng, cfg.embed_dim, cfg.vocab_size);
        m.w_y = init_glorot_uniform(rng, cfg.vocab_size, cfg.embed_dim);
        return m;
    }

    ParamRefs refs() {
        ParamRefs r;
        append_dense_refs(r, "encoder", encoder);
        append_dense_refs(r, "decoder", decoder);
        append_lstm_refs(r, "lstm", lstm);
        r.push_back({"head.w_y", &w_y, nullptr});
        r.push_back({"head.b_y", nullptr, &b_y});
        return r;
    }

    /// Attribute-network parameters only (autoencoder phase of training).
    ParamRefs attnet_refs() {
        ParamRefs r;
        append_dense_refs(r, "encoder", encoder);
        append_dense_refs(r, "decoder", decoder);
        return r;
    }

    /// Sequence-network parameters only.
    ParamRefs seqnet_refs() {
        ParamRefs r;
        append_lstm_refs(r, "lstm", lstm);
        r.push_back({"head.w_y", &w_y, nullptr});
        r.push_back({"head.b_y", nullptr, &b_y});
        return r;
    }
};

}  // namespace attrseq
