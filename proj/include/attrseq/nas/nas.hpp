#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "attrseq/core/activations.hpp"
#include "attrseq/core/grad_check.hpp"
#include "attrseq/core/optim.hpp"
#include "attrseq/data/encode.hpp"
#include "attrseq/data/record.hpp"
#include "attrseq/nas/model.hpp"

namespace attrseq {

struct NasAttCache {
    std::vector<Vector> enc;  // relu layer outputs, enc.back() = V
    std::vector<Vector> dec;  // sigmoid layer outputs, dec.back() = x_hat
    const Vector& encoding() const { return enc.back(); }
    const Vector& reconstruction() const { return dec.back(); }
};

inline NasAttCache att_forward(const NasModel& m, const Vector& x) {
    if (x.size() != m.cfg.attr_width) throw DimensionError("att_forward: attribute width mismatch");
    NasAttCache cache;
    cache.enc = dense_stack_forward(m.encoder, x, Activation::Relu);
    cache.dec = dense_stack_forward(m.decoder, cache.enc.back(), Activation::Sigmoid);
    return cache;
}

struct NasSeqCache {
    LstmRun run;
    std::vector<Vector> ys;  // per-step next-item distributions
    NasSeqCache(std::size_t d) : run(d) {}
};

/// Teacher-forced pass over the unmasked steps. The input at the first step
/// is a zero item vector (the first prediction comes from the conditioning
/// alone); afterwards step t consumes the true item t-1 and predicts item t.
inline NasSeqCache seq_forward(const NasModel& m, const EncodedSequence& enc, const Vector& v) {
    if (enc.true_len == 0) throw EmptySequenceError("seq_forward: empty sequence");
    if (v.size() != m.cfg.embed_dim) throw DimensionError("seq_forward: conditioning width mismatch");
    NasSeqCache cache(m.cfg.embed_dim);
    for (std::size_t t = 0; t < enc.true_len; ++t) {
        Vector x = t == 0 ? Vector(m.cfg.vocab_size) : encoded_row(enc, t - 1);
        cache.run.step(m.lstm, x);
        if (t == 0 && m.cfg.conditioned) cache.run.add_to_hidden(v);
        Vector logits = matvec(m.w_y, cache.run.state.h);
        add_inplace(logits, m.b_y);
        cache.ys.push_back(softmax(logits));
    }
    return cache;
}

inline double attribute_loss(const Vector& x, const Vector& x_hat) {
    return squared_norm(sub(x, x_hat));
}

inline double sequence_loss(const NasSeqCache& cache, const std::vector<std::size_t>& items) {
    double loss = 0.0;
    for (std::size_t t = 0; t < items.size(); ++t)
        loss -= std::log(std::max(cache.ys[t][items[t]], 1e-300));
    return loss;
}

inline EncodedSequence encode_record(const NasModel& m, const AttributedSequence& rec) {
    return encode_one_hot(rec.items, m.cfg.vocab_size, rec.items.size());
}

/// (L_A, L_S) for one record.
inline std::pair<double, double> nas_losses(const NasModel& m, const AttributedSequence& rec) {
    if (rec.items.empty()) throw EmptySequenceError("nas_losses: empty sequence");
    NasAttCache att = att_forward(m, rec.attributes);
    NasSeqCache seq = seq_forward(m, encode_record(m, rec), att.encoding());
    return {attribute_loss(rec.attributes, att.reconstruction()), sequence_loss(seq, rec.items)};
}

namespace detail {

/// Backward through the next-item head and the LSTM. Returns d/d(encoding)
/// and accumulates into the sequence-network gradients.
inline Vector seq_backward(const NasModel& m, const AttributedSequence& rec, const NasSeqCache& cache,
                           NasModel& grads) {
    const std::size_t T = rec.items.size();
    std::vector<Vector> d_h(T, Vector(m.cfg.embed_dim));
    for (std::size_t t = 0; t < T; ++t) {
        Vector d_logits = cache.ys[t];
        d_logits[rec.items[t]] -= 1.0;
        add_outer(grads.w_y, d_logits, cache.run.hs[t]);
        add_inplace(grads.b_y, d_logits);
        d_h[t] = matvec_t(m.w_y, d_logits);
    }
    LstmGrads lg = lstm_backward(m.lstm, cache.run.steps, d_h, Vector(m.cfg.embed_dim));
    attrseq::accumulate_lstm(grads.lstm, lg.params);
    return m.cfg.conditioned ? lg.h_total[0] : Vector(m.cfg.embed_dim);
}

}  // namespace detail

/// Gradient of L_A alone with respect to the autoencoder parameters.
inline double nas_attribute_grad(const NasModel& m, const Vector& x, NasModel& grads) {
    NasAttCache att = att_forward(m, x);
    Vector d_xhat = scale(sub(att.reconstruction(), x), 2.0);
    Vector d_v = dense_stack_backward(m.decoder, att.encoding(), att.dec, d_xhat,
                                      Activation::Sigmoid, grads.decoder);
    dense_stack_backward(m.encoder, x, att.enc, d_v, Activation::Relu, grads.encoder);
    return attribute_loss(x, att.reconstruction());
}

/// Gradient of L_S alone with respect to the sequence network, with the
/// conditioning vector treated as a constant (the per-record training
/// schedule updates the two networks in separate phases).
inline double nas_sequence_grad(const NasModel& m, const AttributedSequence& rec, NasModel& grads) {
    if (rec.items.empty()) throw EmptySequenceError("nas_sequence_grad: empty sequence");
    NasAttCache att = att_forward(m, rec.attributes);
    NasSeqCache cache = seq_forward(m, encode_record(m, rec), att.encoding());
    detail::seq_backward(m, rec, cache, grads);
    return sequence_loss(cache, rec.items);
}

/// Joint gradient of L_A + L_S with respect to every parameter, including
/// the path from the sequence loss through the conditioning into the encoder.
inline std::pair<double, double> nas_joint_grad(const NasModel& m, const AttributedSequence& rec,
                                                NasModel& grads) {
    if (rec.items.empty()) throw EmptySequenceError("nas_joint_grad: empty sequence");
    NasAttCache att = att_forward(m, rec.attributes);
    NasSeqCache cache = seq_forward(m, encode_record(m, rec), att.encoding());

    Vector d_v = detail::seq_backward(m, rec, cache, grads);
    Vector d_xhat = scale(sub(att.reconstruction(), rec.attributes), 2.0);
    add_inplace(d_v, dense_stack_backward(m.decoder, att.encoding(), att.dec, d_xhat,
                                          Activation::Sigmoid, grads.decoder));
    dense_stack_backward(m.encoder, rec.attributes, att.enc, d_v, Activation::Relu, grads.encoder);

    return {attribute_loss(rec.attributes, att.reconstruction()), sequence_loss(cache, rec.items)};
}

/// Final LSTM cell state after the conditioned pass; the record's feature
/// representation. Independent of how far the sequence would be padded.
inline Vector nas_embed(const NasModel& m, const AttributedSequence& rec) {
    if (rec.items.empty()) throw EmptySequenceError("nas_embed: empty sequence");
    NasAttCache att = att_forward(m, rec.attributes);
    NasSeqCache cache = seq_forward(m, encode_record(m, rec), att.encoding());
    return cache.run.state.c;
}

struct NasTrainResult {
    std::vector<double> mean_attribute_loss;  // per epoch
    std::vector<double> mean_sequence_loss;   // per epoch
};

/// Per-record alternating schedule: up to iters_a autoencoder steps with an
/// |delta loss| < eps_a stop, then up to iters_s sequence-network steps with
/// the eps_s stop. One epoch is a single pass over the corpus in order;
/// epochs > 1 repeats the pass.
inline NasTrainResult nas_train(NasModel& m, const Dataset& ds, double lr, std::size_t iters_a,
                                std::size_t iters_s, double eps_a, double eps_s,
                                std::size_t epochs = 1) {
    if (lr <= 0.0) throw ConfigError("nas_train: learning rate must be > 0");
    for (const auto& rec : ds.records)
        if (rec.items.empty()) throw EmptySequenceError("nas_train: record " + rec.id + " has no items");

    NasTrainResult result;
    ParamRefs att_params = m.attnet_refs();
    ParamRefs seq_params = m.seqnet_refs();
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        double sum_la = 0.0, sum_ls = 0.0;
        for (const auto& rec : ds.records) {
            double la = 0.0, ls = 0.0;
            double prev = 0.0;
            for (std::size_t tau = 1; tau <= iters_a; ++tau) {
                NasModel grads = NasModel::zeros(m.cfg);
                nas_attribute_grad(m, rec.attributes, grads);
                sgd_update(att_params, grads.attnet_refs(), lr);
                NasAttCache att = att_forward(m, rec.attributes);
                la = attribute_loss(rec.attributes, att.reconstruction());
                if (!std::isfinite(la)) throw NumericalError("nas_train: attribute loss diverged at " + rec.id);
                if (tau > 1 && std::abs(la - prev) < eps_a) break;
                prev = la;
            }
            if (iters_a == 0) la = nas_losses(m, rec).first;

            prev = 0.0;
            for (std::size_t tau = 1; tau <= iters_s; ++tau) {
                NasModel grads = NasModel::zeros(m.cfg);
                nas_sequence_grad(m, rec, grads);
                sgd_update(seq_params, grads.seqnet_refs(), lr);
                ls = nas_losses(m, rec).second;
                if (!std::isfinite(ls)) throw NumericalError("nas_train: sequence loss diverged at " + rec.id);
                if (tau > 1 && std::abs(ls - prev) < eps_s) break;
                prev = ls;
            }
            if (iters_s == 0) ls = nas_losses(m, rec).second;

            sum_la += la;
            sum_ls += ls;
        }
        result.mean_attribute_loss.push_back(sum_la / static_cast<double>(ds.records.size()));
        result.mean_sequence_loss.push_back(sum_ls / static_cast<double>(ds.records.size()));
    }
    return result;
}

}  // namespace attrseq
