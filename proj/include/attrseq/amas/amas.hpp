#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "attrseq/amas/model.hpp"
#include "attrseq/core/optim.hpp"
#include "attrseq/data/record.hpp"
#include "attrseq/data/split.hpp"

namespace attrseq {

/// Per-step attention weights and attended vectors over the unmasked steps.
/// Padding steps never enter the computation, so their weight is zero by
/// construction; padded_weights() materializes that for exports.
struct AttentionTrace {
    std::vector<Vector> weights;  // mu per step
    std::vector<Vector> alphas;   // mu . base per step

    Matrix padded_weights(std::size_t t_max) const {
        std::size_t width = weights.empty() ? 0 : weights[0].size();
        Matrix out(t_max, width);
        for (std::size_t t = 0; t < weights.size() && t < t_max; ++t)
            for (std::size_t k = 0; k < width; ++k) out(t, k) = weights[t][k];
        return out;
    }
};

namespace detail {

/// Softmax across time, per dimension (or per step in scalar mode).
inline std::vector<Vector> attention_weights(const std::vector<Vector>& base, bool scalar) {
    const std::size_t T = base.size();
    const std::size_t width = base[0].size();
    std::vector<Vector> mu(T, Vector(width));
    if (scalar) {
        Vector scores(T);
        for (std::size_t t = 0; t < T; ++t)
            scores[t] = std::accumulate(base[t].begin(), base[t].end(), 0.0);
        Vector w = softmax(scores);
        for (std::size_t t = 0; t < T; ++t) mu[t].fill(w[t]);
    } else {
        for (std::size_t k = 0; k < width; ++k) {
            Vector col(T);
            for (std::size_t t = 0; t < T; ++t) col[t] = base[t][k];
            Vector w = softmax(col);
            for (std::size_t t = 0; t < T; ++t) mu[t][k] = w[t];
        }
    }
    return mu;
}

/// Backward of alpha_last = mu_last . base_last through the time softmax.
/// Returns d/d(base_t) for every step.
inline std::vector<Vector> attention_backward(const std::vector<Vector>& base,
                                              const std::vector<Vector>& mu,
                                              const Vector& d_alpha_last, bool scalar) {
    const std::size_t T = base.size();
    const std::size_t width = base[0].size();
    const std::size_t L = T - 1;
    std::vector<Vector> d_base(T, Vector(width));
    if (scalar) {
        // mu_t is constant across dimensions; scores are the per-step sums
        const double mu_last = mu[L][0];
        double d_mu_last = 0.0;
        for (std::size_t k = 0; k < width; ++k) {
            d_base[L][k] += d_alpha_last[k] * mu_last;
            d_mu_last += d_alpha_last[k] * base[L][k];
        }
        for (std::size_t t = 0; t < T; ++t) {
            const double d_score = d_mu_last * mu_last * ((t == L ? 1.0 : 0.0) - mu[t][0]);
            for (std::size_t k = 0; k < width; ++k) d_base[t][k] += d_score;
        }
    } else {
        for (std::size_t k = 0; k < width; ++k) {
            const double w_last = mu[L][k];
            const double z_last = base[L][k];
            for (std::size_t t = 0; t < T; ++t) {
                const double indicator = t == L ? 1.0 : 0.0;
                d_base[t][k] += d_alpha_last[k] *
                                (indicator * w_last + z_last * w_last * (indicator - mu[t][k]));
            }
        }
    }
    return d_base;
}

}  // namespace detail

/// Inverted-dropout masks: entries are 1/keep with probability keep, else 0.
struct DropoutMasks {
    Vector att;   // empty = off
    Vector head;  // empty = off
};

inline Vector make_dropout_mask(Rng& rng, std::size_t n, double rate) {
    Vector mask(n);
    const double keep = 1.0 - rate;
    for (std::size_t i = 0; i < n; ++i) mask[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return mask;
}

struct AmasForward {
    Vector att_raw;   // tanh attnet output before dropout
    Vector att_out;   // after dropout (== att_raw when off)
    LstmRun run;
    std::vector<Vector> base;  // attended sequence (ASA: h_t, ASHA: att_out + h_t)
    AttentionTrace trace;
    Vector head_in_raw;  // before dropout
    Vector head_in;
    Vector logits;
    Vector scores;
    AmasForward(std::size_t d) : run(d) {}
};

inline AmasForward amas_forward(const AmasModel& m, const AttributedSequence& rec,
                                const DropoutMasks* masks = nullptr) {
    if (rec.items.empty()) throw EmptySequenceError("amas_forward: empty sequence");
    if (rec.attributes.size() != m.cfg.attr_width)
        throw DimensionError("amas_forward: attribute width mismatch");
    AmasForward f(m.cfg.lstm_hidden);

    f.att_raw = dense_forward(m.w_r, m.b_r, rec.attributes, Activation::Tanh);
    f.att_out = (masks && masks->att.size()) ? hadamard(f.att_raw, masks->att) : f.att_raw;

    for (std::size_t item : rec.items) f.run.step(m.lstm, one_hot(item, m.cfg.vocab_size));
    const std::size_t T = rec.items.size();

    switch (m.cfg.variant) {
        case AmasVariant::NoAttention:
            f.head_in_raw = concat(f.att_out, f.run.hs.back());
            break;
        case AmasVariant::ASA: {
            f.base = f.run.hs;
            f.trace.weights = detail::attention_weights(f.base, m.cfg.scalar_attention);
            for (std::size_t t = 0; t < T; ++t)
                f.trace.alphas.push_back(hadamard(f.trace.weights[t], f.base[t]));
            f.head_in_raw = concat(f.att_out, f.trace.alphas.back());
            break;
        }
        case AmasVariant::ASHA: {
            for (std::size_t t = 0; t < T; ++t) f.base.push_back(concat(f.att_out, f.run.hs[t]));
            f.trace.weights = detail::attention_weights(f.base, m.cfg.scalar_attention);
            for (std::size_t t = 0; t < T; ++t)
                f.trace.alphas.push_back(hadamard(f.trace.weights[t], f.base[t]));
            f.head_in_raw = f.trace.alphas.back();
            break;
        }
    }

    f.head_in = (masks && masks->head.size()) ? hadamard(f.head_in_raw, masks->head) : f.head_in_raw;
    f.logits = matvec(m.w_p, f.head_in);
    add_inplace(f.logits, m.b_p);
    f.scores = m.cfg.sigmoid_head ? sigmoid(f.logits) : softmax(f.logits);
    return f;
}

/// Class scores plus the attention trace (empty for NoAttention).
inline std::pair<Vector, AttentionTrace> attention_forward(const AmasModel& m,
                                                           const AttributedSequence& rec) {
    AmasForward f = amas_forward(m, rec);
    return {f.scores, f.trace};
}

/// Attention over the hidden states alone; the head reads f(v) + alpha_last.
inline std::pair<Vector, AttentionTrace> asa_forward(const AmasModel& m, const AttributedSequence& rec) {
    if (m.cfg.variant != AmasVariant::ASA) throw ConfigError("asa_forward: model is not an ASA model");
    return attention_forward(m, rec);
}

/// Attention over the attribute-augmented hidden states; the head reads the
/// attended vector alone.
inline std::pair<Vector, AttentionTrace> asha_forward(const AmasModel& m,
                                                      const AttributedSequence& rec) {
    if (m.cfg.variant != AmasVariant::ASHA)
        throw ConfigError("asha_forward: model is not an ASHA model");
    return attention_forward(m, rec);
}

inline std::size_t argmax_lowest(const Vector& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

/// Predicted class index and scores, dropout off; ties go to the lowest index.
inline std::pair<std::size_t, Vector> classify(const AmasModel& m, const AttributedSequence& rec) {
    AmasForward f = amas_forward(m, rec);
    return {argmax_lowest(f.scores), f.scores};
}

inline double amas_loss_from_forward(const AmasForward& f, std::size_t class_index, bool sigmoid_head) {
    if (sigmoid_head) {
        // binary cross-entropy over the two sigmoid outputs
        double loss = 0.0;
        for (std::size_t c = 0; c < f.scores.size(); ++c) {
            double target = c == class_index ? 1.0 : 0.0;
            double p = std::clamp(f.scores[c], 1e-12, 1.0 - 1e-12);
            loss -= target * std::log(p) + (1.0 - target) * std::log(1.0 - p);
        }
        return loss;
    }
    return -std::log(std::max(f.scores[class_index], 1e-300));
}

/// Categorical cross-entropy of one record (dropout controlled by masks).
inline double amas_loss(const AmasModel& m, const AttributedSequence& rec, std::size_t class_index,
                        const DropoutMasks* masks = nullptr) {
    if (class_index >= m.cfg.n_classes) throw ConfigError("amas_loss: class index out of range");
    AmasForward f = amas_forward(m, rec, masks);
    return amas_loss_from_forward(f, class_index, m.cfg.sigmoid_head);
}

/// Loss and full gradient for one record. l2 on the recurrent matrices is
/// applied by the trainer, not here.
inline double amas_grad(const AmasModel& m, const AttributedSequence& rec, std::size_t class_index,
                        AmasModel& grads, const DropoutMasks* masks = nullptr) {
    if (class_index >= m.cfg.n_classes) throw ConfigError("amas_grad: class index out of range");
    AmasForward f = amas_forward(m, rec, masks);
    const double loss = amas_loss_from_forward(f, class_index, m.cfg.sigmoid_head);
    const std::size_t T = rec.items.size();

    Vector d_logits(m.cfg.n_classes);
    if (m.cfg.sigmoid_head) {
        for (std::size_t c = 0; c < m.cfg.n_classes; ++c)
            d_logits[c] = f.scores[c] - (c == class_index ? 1.0 : 0.0);
    } else {
        d_logits = f.scores;
        d_logits[class_index] -= 1.0;
    }
    add_outer(grads.w_p, d_logits, f.head_in);
    add_inplace(grads.b_p, d_logits);
    Vector d_head_in = matvec_t(m.w_p, d_logits);
    if (masks && masks->head.size()) d_head_in = hadamard(d_head_in, masks->head);

    Vector d_att_out(m.cfg.att_hidden);
    std::vector<Vector> d_h(T, Vector(m.cfg.lstm_hidden));

    switch (m.cfg.variant) {
        case AmasVariant::NoAttention: {
            d_att_out = slice(d_head_in, 0, m.cfg.att_hidden);
            d_h[T - 1] = slice(d_head_in, m.cfg.att_hidden, m.cfg.lstm_hidden);
            break;
        }
        case AmasVariant::ASA: {
            d_att_out = slice(d_head_in, 0, m.cfg.att_hidden);
            Vector d_alpha = slice(d_head_in, m.cfg.att_hidden, m.cfg.lstm_hidden);
            auto d_base = detail::attention_backward(f.base, f.trace.weights, d_alpha,
                                                     m.cfg.scalar_attention);
            for (std::size_t t = 0; t < T; ++t) d_h[t] = std::move(d_base[t]);
            break;
        }
        case AmasVariant::ASHA: {
            auto d_base = detail::attention_backward(f.base, f.trace.weights, d_head_in,
                                                     m.cfg.scalar_attention);
            for (std::size_t t = 0; t < T; ++t) {
                for (std::size_t k = 0; k < m.cfg.att_hidden; ++k) d_att_out[k] += d_base[t][k];
                d_h[t] = slice(d_base[t], m.cfg.att_hidden, m.cfg.lstm_hidden);
            }
            break;
        }
    }

    if (masks && masks->att.size()) d_att_out = hadamard(d_att_out, masks->att);
    dense_backward(m.w_r, rec.attributes, f.att_raw, d_att_out, Activation::Tanh, grads.w_r,
                   grads.b_r);
    LstmGrads lg = lstm_backward(m.lstm, f.run.steps, d_h, Vector(m.cfg.lstm_hidden));
    accumulate_lstm(grads.lstm, lg.params);
    return loss;
}

/// floor(n1 * lambda^(tau-1)) per epoch, at least one sample each.
inline std::vector<std::size_t> adaptive_sample_counts(std::size_t n1, double lambda,
                                                       std::size_t epochs) {
    if (lambda < 1.0) throw ConfigError("adaptive sampling rate must be >= 1");
    std::vector<std::size_t> out;
    out.reserve(epochs);
    for (std::size_t tau = 1; tau <= epochs; ++tau) {
        double v = std::floor(static_cast<double>(n1) * std::pow(lambda, static_cast<double>(tau - 1)));
        out.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(v)));
    }
    return out;
}

struct AmasTrainConfig {
    double rho = 0.01;          // Adam learning rate
    std::size_t epochs = 10;
    double lambda = 1.0;        // adaptive sampling rate
    std::size_t n1 = 0;         // first-epoch sample count; 0 = whole training split
    double val_fraction = 0.2;  // holdout share
    bool dropout = true;
    std::size_t early_stop_patience = 0;  // 0 = off
};

struct AmasEpochStats {
    std::size_t samples_used = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct AmasTrainResult {
    std::vector<AmasEpochStats> history;
};

inline double amas_mean_loss(const AmasModel& m, const Dataset& ds) {
    double sum = 0.0;
    for (const auto& rec : ds.records) sum += amas_loss(m, rec, m.class_index(rec.label));
    return ds.records.empty() ? 0.0 : sum / static_cast<double>(ds.records.size());
}

/// Adam training with the geometric sampling schedule, dropout in training
/// passes only, and l2 decay on the recurrent matrices.
inline AmasTrainResult amas_train(AmasModel& m, const Dataset& ds, const AmasTrainConfig& tc,
                                  Rng& rng) {
    if (tc.lambda < 1.0) throw ConfigError("amas_train: lambda must be >= 1");
    if (ds.records.empty()) throw ConfigError("amas_train: empty dataset");
    for (const auto& rec : ds.records) {
        if (!rec.labeled()) throw ConfigError("amas_train: unlabeled record " + rec.id);
        if (rec.items.empty()) throw EmptySequenceError("amas_train: record " + rec.id + " has no items");
        m.class_index(rec.label);
    }

    Rng split_rng = rng.split(1);
    Rng order_rng = rng.split(2);
    Rng dropout_rng = rng.split(3);

    Dataset train = ds, val;
    if (tc.val_fraction > 0.0 && ds.records.size() >= 5) {
        auto pair = split_train_validation(ds, tc.val_fraction, split_rng);
        train = std::move(pair.first);
        val = std::move(pair.second);
    }

    const std::size_t n1 = tc.n1 ? tc.n1 : train.records.size();
    auto schedule = adaptive_sample_counts(n1, tc.lambda, tc.epochs);

    AdamConfig adam_cfg;
    adam_cfg.rho = tc.rho;
    AdamState adam;
    ParamRefs params = m.refs();

    AmasTrainResult result;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    std::vector<std::size_t> order(train.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
        order_rng.shuffle(order);
        const std::size_t n_used = std::min(schedule[epoch], train.records.size());
        double sum = 0.0;
        for (std::size_t k = 0; k < n_used; ++k) {
            const AttributedSequence& rec = train.records[order[k]];
            DropoutMasks masks;
            if (tc.dropout) {
                masks.att = make_dropout_mask(dropout_rng, m.cfg.att_hidden, m.cfg.dropout_att);
                masks.head = make_dropout_mask(dropout_rng, m.cfg.head_input_width(), m.cfg.dropout_fc);
            }
            AmasModel grads = AmasModel::zeros(m.cfg);
            double loss = amas_grad(m, rec, m.class_index(rec.label), grads,
                                    tc.dropout ? &masks : nullptr);
            if (!std::isfinite(loss)) throw NumericalError("amas_train: loss diverged at " + rec.id);
            sum += loss;
            if (m.cfg.l2_recurrent > 0.0) {
                auto decay = [&](Matrix& g, const Matrix& u) {
                    for (std::size_t i = 0; i < g.raw().size(); ++i)
                        g.raw()[i] += m.cfg.l2_recurrent * u.raw()[i];
                };
                decay(grads.lstm.u_i, m.lstm.u_i);
                decay(grads.lstm.u_f, m.lstm.u_f);
                decay(grads.lstm.u_o, m.lstm.u_o);
                decay(grads.lstm.u_c, m.lstm.u_c);
            }
            adam_update(adam, params, grads.refs(), adam_cfg);
        }

        AmasEpochStats stats;
        stats.samples_used = n_used;
        stats.train_loss = n_used ? sum / static_cast<double>(n_used) : 0.0;
        stats.val_loss = val.records.empty() ? stats.train_loss : amas_mean_loss(m, val);
        result.history.push_back(stats);

        if (tc.early_stop_patience > 0) {
            if (stats.val_loss < best_val) {
                best_val = stats.val_loss;
                since_best = 0;
            } else if (++since_best >= tc.early_stop_patience) {
                break;
            }
        }
    }
    return result;
}

/// Fraction of records whose true class lands in the k best scores
/// (score-descending, ties to the lower index).
inline double topk_accuracy(const AmasModel& m, const Dataset& ds, std::size_t k) {
    if (k < 1 || k > m.cfg.n_classes) throw ConfigError("topk_accuracy: k out of range");
    if (ds.records.empty()) throw ConfigError("topk_accuracy: empty dataset");
    std::size_t hits = 0;
    for (const auto& rec : ds.records) {
        auto [pred, scores] = classify(m, rec);
        const std::size_t truth = m.class_index(rec.label);
        std::vector<std::size_t> idx(scores.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return a < b;
        });
        for (std::size_t i = 0; i < k; ++i)
            if (idx[i] == truth) {
                ++hits;
                break;
            }
    }
    return static_cast<double>(hits) / static_cast<double>(ds.records.size());
}

}  // namespace attrseq
