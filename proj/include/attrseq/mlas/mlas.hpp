#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "attrseq/core/optim.hpp"
#include "attrseq/data/encode.hpp"
#include "attrseq/data/feedback.hpp"
#include "attrseq/data/record.hpp"
#include "attrseq/mlas/model.hpp"

namespace attrseq {

struct MlasCache {
    std::vector<Vector> att_outs;  // attnet layer outputs
    Vector att_input;              // what fed the attnet (x, or x + h for att-centric)
    LstmRun run;
    Vector fused;  // balanced fusion output (unused otherwise)
    Vector embedding;
    MlasCache(std::size_t d) : run(d) {}
};

/// Embedding of one record under the configured fusion design.
inline MlasCache fusion_forward(const MlasModel& m, const AttributedSequence& rec) {
    if (rec.items.empty()) throw EmptySequenceError("fusion_forward: empty sequence");
    if (rec.attributes.size() != m.cfg.attr_width)
        throw DimensionError("fusion_forward: attribute width mismatch");
    MlasCache cache(m.cfg.seq_hidden);

    auto run_lstm = [&](const Vector* inject) {
        for (std::size_t t = 0; t < rec.items.size(); ++t) {
            cache.run.step(m.lstm, one_hot(rec.items[t], m.cfg.vocab_size));
            if (t == 0 && inject) cache.run.add_to_hidden(*inject);
        }
    };

    switch (m.cfg.fusion) {
        case FusionKind::Balanced: {
            cache.att_input = rec.attributes;
            cache.att_outs = dense_stack_forward(m.attnet, cache.att_input, m.cfg.att_act);
            run_lstm(nullptr);
            Vector joined = concat(cache.att_outs.back(), cache.run.state.h);
            cache.fused = dense_forward(m.w_z, m.b_z, joined, m.cfg.att_act);
            cache.embedding = cache.fused;
            break;
        }
        case FusionKind::AttCentric: {
            run_lstm(nullptr);
            cache.att_input = concat(rec.attributes, cache.run.state.h);
            cache.att_outs = dense_stack_forward(m.attnet, cache.att_input, m.cfg.att_act);
            cache.embedding = cache.att_outs.back();
            break;
        }
        case FusionKind::SeqCentric: {
            cache.att_input = rec.attributes;
            cache.att_outs = dense_stack_forward(m.attnet, cache.att_input, m.cfg.att_act);
            Vector v = cache.att_outs.back();
            run_lstm(&v);
            cache.embedding = cache.run.state.h;
            break;
        }
    }
    return cache;
}

inline Vector mlas_embed(const MlasModel& m, const AttributedSequence& rec) {
    return fusion_forward(m, rec).embedding;
}

inline double pair_distance(const MlasModel& m, const AttributedSequence& left,
                            const AttributedSequence& right) {
    return norm2(sub(fusion_forward(m, left).embedding, fusion_forward(m, right).embedding));
}

/// Pairwise contrastive objective: similar pairs (label 0) pay the squared
/// distance, dissimilar pairs (label 1) pay only inside the margin.
inline double contrastive_loss(double dist, int label, double margin) {
    if (dist < 0.0) throw ConfigError("contrastive_loss: negative distance");
    if (margin <= 0.0) throw ConfigError("contrastive_loss: margin must be > 0");
    const double l = static_cast<double>(label);
    const double hinge = std::max(0.0, margin - dist);
    return 0.5 * (1.0 - l) * dist * dist + 0.5 * l * hinge * hinge;
}

namespace detail {

/// Backward from d(loss)/d(embedding) into the shared parameter gradients.
inline void fusion_backward(const MlasModel& m, const MlasCache& cache, const Vector& d_emb,
                            MlasModel& grads) {
    switch (m.cfg.fusion) {
        case FusionKind::Balanced: {
            Vector joined = concat(cache.att_outs.back(), cache.run.state.h);
            Vector d_joined = dense_backward(m.w_z, joined, cache.fused, d_emb, m.cfg.att_act,
                                             grads.w_z, grads.b_z);
            Vector d_v = slice(d_joined, 0, m.cfg.att_hidden);
            Vector d_h = slice(d_joined, m.cfg.att_hidden, m.cfg.seq_hidden);
            dense_stack_backward(m.attnet, cache.att_input, cache.att_outs, d_v, m.cfg.att_act,
                                 grads.attnet);
            LstmGrads lg = lstm_backward(m.lstm, cache.run.steps, d_h);
            attrseq::accumulate_lstm(grads.lstm, lg.params);
            break;
        }
        case FusionKind::AttCentric: {
            Vector d_in = dense_stack_backward(m.attnet, cache.att_input, cache.att_outs, d_emb,
                                               m.cfg.att_act, grads.attnet);
            Vector d_h = slice(d_in, m.cfg.attr_width, m.cfg.seq_hidden);
            LstmGrads lg = lstm_backward(m.lstm, cache.run.steps, d_h);
            attrseq::accumulate_lstm(grads.lstm, lg.params);
            break;
        }
        case FusionKind::SeqCentric: {
            LstmGrads lg = lstm_backward(m.lstm, cache.run.steps, d_emb);
            attrseq::accumulate_lstm(grads.lstm, lg.params);
            // the conditioning vector picks up the gradient arriving at step 1
            dense_stack_backward(m.attnet, cache.att_input, cache.att_outs, lg.h_total[0],
                                 m.cfg.att_act, grads.attnet);
            break;
        }
    }
}

inline Vector distance_gradient_factor(const MlasModel& m, const Vector& diff, double dist) {
    if (m.cfg.dist_grad == DistanceGradient::Exact) {
        if (dist <= 0.0) return Vector(diff.size());
        return scale(diff, 1.0 / dist);
    }
    Vector f(diff.size());
    for (std::size_t i = 0; i < diff.size(); ++i) f[i] = diff[i] * (1.0 - diff[i]);
    return f;
}

}  // namespace detail

/// Loss and full gradient of one feedback pair; both branches accumulate
/// into the same (shared) parameter set.
inline double mlas_pair_grad(const MlasModel& m, const AttributedSequence& left,
                             const AttributedSequence& right, int label, MlasModel& grads) {
    MlasCache a = fusion_forward(m, left);
    MlasCache b = fusion_forward(m, right);
    Vector diff = sub(a.embedding, b.embedding);
    const double dist = norm2(diff);
    const double loss = contrastive_loss(dist, label, m.cfg.margin);

    const double l = static_cast<double>(label);
    const double d_loss_d_dist = (1.0 - l) * dist - l * std::max(0.0, m.cfg.margin - dist);
    Vector d_emb = scale(detail::distance_gradient_factor(m, diff, dist), d_loss_d_dist);

    detail::fusion_backward(m, a, d_emb, grads);
    detail::fusion_backward(m, b, scale(d_emb, -1.0), grads);
    return loss;
}

struct MlasTrainResult {
    std::vector<double> mean_loss;  // per epoch
};

struct ResolvedPair {
    std::size_t left, right;
    int label;
};

inline std::vector<ResolvedPair> resolve_pairs(const Dataset& ds,
                                               const std::vector<FeedbackTriplet>& pairs) {
    auto index = ds.index_by_id();
    std::vector<ResolvedPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        auto l = index.find(p.left_id);
        auto r = index.find(p.right_id);
        if (l == index.end() || r == index.end())
            throw ConfigError("feedback pair references unknown record id");
        out.push_back({l->second, r->second, p.label});
    }
    return out;
}

/// SGD over feedback pairs. Pair order is a seeded shuffle per epoch; a pair
/// whose loss moved less than eps since its previous visit is skipped.
inline MlasTrainResult mlas_train(MlasModel& m, const Dataset& ds,
                                  const std::vector<FeedbackTriplet>& pairs, double lr,
                                  std::size_t max_iters, double eps, Rng& rng) {
    if (lr <= 0.0) throw ConfigError("mlas_train: learning rate must be > 0");
    if (pairs.empty()) throw ConfigError("mlas_train: no feedback pairs");
    std::vector<ResolvedPair> resolved = resolve_pairs(ds, pairs);

    MlasTrainResult result;
    ParamRefs params = m.refs();
    std::vector<double> prev_loss(resolved.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::size_t> order(resolved.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < max_iters; ++epoch) {
        rng.shuffle(order);
        double sum = 0.0;
        for (std::size_t k : order) {
            const ResolvedPair& p = resolved[k];
            MlasModel grads = MlasModel::zeros(m.cfg);
            double loss = mlas_pair_grad(m, ds.records[p.left], ds.records[p.right], p.label, grads);
            if (!std::isfinite(loss)) throw NumericalError("mlas_train: loss diverged");
            sum += loss;
            const bool converged = std::isfinite(prev_loss[k]) && std::abs(loss - prev_loss[k]) < eps;
            prev_loss[k] = loss;
            if (converged) continue;
            sgd_update(params, grads.refs(), lr);
        }
        result.mean_loss.push_back(sum / static_cast<double>(resolved.size()));
    }
    return result;
}

/// Throwaway decoder heads used during pre-training: the attribute head
/// rebuilds the input attributes, the sequence head scores every item of
/// the sequence from the fusion embedding.
struct PretrainHeads {
    Matrix w_att;
    Vector b_att;
    Matrix w_seq;
    Vector b_seq;

    static PretrainHeads init(const MlasConfig& cfg, Rng& rng) {
        PretrainHeads h;
        h.w_att = init_glorot_uniform(rng, cfg.attr_width, cfg.embed_dim());
        h.b_att = Vector(cfg.attr_width);
        h.w_seq = init_glorot_uniform(rng, cfg.vocab_size, cfg.embed_dim());
        h.b_seq = Vector(cfg.vocab_size);
        return h;
    }

    static PretrainHeads zeros(const MlasConfig& cfg) {
        PretrainHeads h;
        h.w_att = Matrix(cfg.attr_width, cfg.embed_dim());
        h.b_att = Vector(cfg.attr_width);
        h.w_seq = Matrix(cfg.vocab_size, cfg.embed_dim());
        h.b_seq = Vector(cfg.vocab_size);
        return h;
    }

    ParamRefs refs() {
        return {{"pre.w_att", &w_att, nullptr},
                {"pre.b_att", nullptr, &b_att},
                {"pre.w_seq", &w_seq, nullptr},
                {"pre.b_seq", nullptr, &b_seq}};
    }
};

/// One pre-training example: loss
///   omega_a * mean squared reconstruction error
///   + (1 - omega_a) * mean item cross-entropy,
/// with gradients accumulated into both the model and the heads.
inline double mlas_pretrain_grad(const MlasModel& m, const PretrainHeads& heads,
                                 const AttributedSequence& rec, double omega_a, MlasModel& grads,
                                 PretrainHeads& head_grads) {
    if (rec.items.empty()) throw EmptySequenceError("mlas_pretrain: empty sequence");
    MlasCache cache = fusion_forward(m, rec);
    const Vector& z = cache.embedding;

    Vector x_hat = dense_forward(heads.w_att, heads.b_att, z, Activation::Sigmoid);
    double att_loss = squared_norm(sub(rec.attributes, x_hat)) / static_cast<double>(m.cfg.attr_width);
    Vector d_xhat(m.cfg.attr_width);
    for (std::size_t i = 0; i < m.cfg.attr_width; ++i)
        d_xhat[i] = omega_a * 2.0 * (x_hat[i] - rec.attributes[i]) /
                    static_cast<double>(m.cfg.attr_width);

    Vector logits = matvec(heads.w_seq, z);
    add_inplace(logits, heads.b_seq);
    Vector probs = softmax(logits);
    double seq_loss = 0.0;
    Vector d_logits(m.cfg.vocab_size);
    const double seq_w = (1.0 - omega_a) / static_cast<double>(rec.items.size());
    for (std::size_t t = 0; t < rec.items.size(); ++t) {
        seq_loss -= std::log(std::max(probs[rec.items[t]], 1e-300));
        for (std::size_t c = 0; c < m.cfg.vocab_size; ++c) d_logits[c] += seq_w * probs[c];
        d_logits[rec.items[t]] -= seq_w;
    }
    seq_loss /= static_cast<double>(rec.items.size());

    Vector d_z = dense_backward(heads.w_att, z, x_hat, d_xhat, Activation::Sigmoid,
                                head_grads.w_att, head_grads.b_att);
    add_outer(head_grads.w_seq, d_logits, z);
    add_inplace(head_grads.b_seq, d_logits);
    add_inplace(d_z, matvec_t(heads.w_seq, d_logits));
    detail::fusion_backward(m, cache, d_z, grads);

    return omega_a * att_loss + (1.0 - omega_a) * seq_loss;
}

/// Reconstruction pre-training through the fusion embedding; the decoder
/// heads are created here and discarded afterward.
inline void mlas_pretrain(MlasModel& m, const Dataset& ds, double omega_a, std::size_t epochs,
                          double lr, Rng& rng) {
    if (omega_a < 0.0 || omega_a > 1.0) throw ConfigError("mlas_pretrain: omega_a outside [0,1]");
    if (epochs == 0) return;
    if (lr <= 0.0) throw ConfigError("mlas_pretrain: learning rate must be > 0");

    Rng init_rng = rng.split(0x70726574);
    PretrainHeads heads = PretrainHeads::init(m.cfg, init_rng);

    ParamRefs params = m.refs();
    ParamRefs head_params = heads.refs();
    std::vector<std::size_t> order(ds.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            MlasModel grads = MlasModel::zeros(m.cfg);
            PretrainHeads head_grads = PretrainHeads::zeros(m.cfg);
            double loss = mlas_pretrain_grad(m, heads, ds.records[idx], omega_a, grads, head_grads);
            if (!std::isfinite(loss)) throw NumericalError("mlas_pretrain: loss diverged");
            sgd_update(params, grads.refs(), lr);
            sgd_update(head_params, head_grads.refs(), lr);
        }
    }
}

}  // namespace attrseq
