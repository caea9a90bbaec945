#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "attrseq/core/optim.hpp"
#include "attrseq/data/feedback.hpp"
#include "attrseq/data/record.hpp"
#include "attrseq/mlas/mlas.hpp"

namespace attrseq {

enum class DistanceKind { Euclidean, Manhattan };

inline const char* distance_name(DistanceKind k) {
    return k == DistanceKind::Euclidean ? "euclidean" : "manhattan";
}

inline DistanceKind distance_from_name(const std::string& s) {
    if (s == "euclidean") return DistanceKind::Euclidean;
    if (s == "manhattan") return DistanceKind::Manhattan;
    throw ConfigError("unknown distance kind: " + s);
}

/// One-shot feature extractor plus contrastive head. A tanh fully connected
/// stack encodes the attributes, an LSTM encodes the sequence, and the two
/// are concatenated only after the last time step and mapped through one
/// more tanh layer into the feature space.
struct OlasConfig {
    std::size_t attr_width = 0;   // u
    std::size_t vocab_size = 0;   // r
    std::size_t fc_depth = 3;     // m
    std::size_t fc_hidden = 50;   // n_m
    std::size_t lstm_hidden = 50; // n_l
    std::size_t feature_dim = 50; // n
    double margin = 1.0;          // xi
    DistanceKind distance = DistanceKind::Euclidean;
};

struct OlasModel {
    OlasConfig cfg;
    DenseStack fcnet;    // tanh layers, u -> n_m -> ... -> n_m
    LstmCellParams lstm; // hidden n_l
    Matrix w_p;          // n x (n_m + n_l)
    Vector b_p;

    static OlasModel zeros(const OlasConfig& cfg) {
        if (cfg.margin <= 0.0) throw ConfigError("margin must be > 0");
        if (cfg.fc_depth == 0) throw ConfigError("need at least one fully connected layer");
        OlasModel m;
        m.cfg = cfg;
        std::size_t in = cfg.attr_width;
        for (std::size_t i = 0; i < cfg.fc_depth; ++i) {
            m.fcnet.push_layer(Matrix(cfg.fc_hidden, in), Vector(cfg.fc_hidden));
            in = cfg.fc_hidden;
        }
        m.lstm = LstmCellParams::zeros(cfg.lstm_hidden, cfg.vocab_size);
        m.w_p = Matrix(cfg.feature_dim, cfg.fc_hidden + cfg.lstm_hidden);
        m.b_p = Vector(cfg.feature_dim);
        return m;
    }

    /// Dense layers from the normalized uniform distribution, LSTM kernels
    /// uniform in +-sqrt(6/n_l), recurrent matrices orthogonal, biases zero.
    static OlasModel init(const OlasConfig& cfg, Rng& rng) {
        OlasModel m = zeros(cfg);
        for (std::size_t i = 0; i < m.fcnet.depth(); ++i)
            m.fcnet.w[i] = init_glorot_uniform(rng, m.fcnet.w[i].rows(), m.fcnet.w[i].cols());
        m.lstm = LstmCellParams::init(rng, cfg.lstm_hidden, cfg.vocab_size,
                                      std::sqrt(6.0 / static_cast<double>(cfg.lstm_hidden)));
        m.w_p = init_glorot_uniform(rng, m.w_p.rows(), m.w_p.cols());
        return m;
    }

    ParamRefs refs() {
        ParamRefs r;
        append_dense_refs(r, "fcnet", fcnet);
        append_lstm_refs(r, "lstm", lstm);
        r.push_back({"head.w_p", &w_p, nullptr});
        r.push_back({"head.b_p", nullptr, &b_p});
        return r;
    }
};

struct OlasCache {
    std::vector<Vector> fc_outs;
    LstmRun run;
    Vector feature;
    OlasCache(std::size_t d) : run(d) {}
};

inline OlasCache corenet_forward(const OlasModel& m, const AttributedSequence& rec) {
    if (rec.items.empty()) throw EmptySequenceError("corenet_forward: empty sequence");
    if (rec.attributes.size() != m.cfg.attr_width)
        throw DimensionError("corenet_forward: attribute width mismatch");
    OlasCache cache(m.cfg.lstm_hidden);
    cache.fc_outs = dense_stack_forward(m.fcnet, rec.attributes, Activation::Tanh);
    for (std::size_t item : rec.items) cache.run.step(m.lstm, one_hot(item, m.cfg.vocab_size));
    Vector joined = concat(cache.fc_outs.back(), cache.run.state.h);
    cache.feature = dense_forward(m.w_p, m.b_p, joined, Activation::Tanh);
    return cache;
}

inline Vector olas_feature(const OlasModel& m, const AttributedSequence& rec) {
    return corenet_forward(m, rec).feature;
}

inline double feature_distance(const OlasModel& m, const Vector& a, const Vector& b) {
    Vector diff = sub(a, b);
    return m.cfg.distance == DistanceKind::Euclidean ? norm2(diff) : norm1(diff);
}

/// Contrastive pair objective: dissimilar pairs (label 1) pay inside the
/// margin, similar pairs (label 0) pay the squared distance.
inline double olas_pair_loss_value(double dist, int label, double margin) {
    if (margin <= 0.0) throw ConfigError("olas_pair_loss: margin must be > 0");
    const double l = static_cast<double>(label);
    const double hinge = std::max(0.0, margin - dist);
    return 0.5 * l * hinge * hinge + 0.5 * (1.0 - l) * dist * dist;
}

inline double olas_pair_loss(const OlasModel& m, const AttributedSequence& left,
                             const AttributedSequence& right, int label) {
    double d = feature_distance(m, olas_feature(m, left), olas_feature(m, right));
    return olas_pair_loss_value(d, label, m.cfg.margin);
}

namespace detail {

inline void olas_branch_backward(const OlasModel& m, const AttributedSequence& rec,
                                 const OlasCache& cache, const Vector& d_feature, OlasModel& grads) {
    Vector joined = concat(cache.fc_outs.back(), cache.run.state.h);
    Vector d_joined = dense_backward(m.w_p, joined, cache.feature, d_feature, Activation::Tanh,
                                     grads.w_p, grads.b_p);
    Vector d_fc = slice(d_joined, 0, m.cfg.fc_hidden);
    Vector d_h = slice(d_joined, m.cfg.fc_hidden, m.cfg.lstm_hidden);
    dense_stack_backward(m.fcnet, rec.attributes, cache.fc_outs, d_fc, Activation::Tanh, grads.fcnet);
    LstmGrads lg = lstm_backward(m.lstm, cache.run.steps, d_h);
    accumulate_lstm(grads.lstm, lg.params);
}

}  // namespace detail

/// Loss and full gradient of one triplet; both branches flow into the
/// shared CoreNet parameters. For dissimilar pairs at or beyond the margin
/// every gradient is exactly zero.
inline double olas_pair_grad(const OlasModel& m, const AttributedSequence& left,
                             const AttributedSequence& right, int label, OlasModel& grads) {
    OlasCache a = corenet_forward(m, left);
    OlasCache b = corenet_forward(m, right);
    Vector diff = sub(a.feature, b.feature);
    const double dist = m.cfg.distance == DistanceKind::Euclidean ? norm2(diff) : norm1(diff);
    const double loss = olas_pair_loss_value(dist, label, m.cfg.margin);

    const double l = static_cast<double>(label);
    const double d_loss_d_dist = (1.0 - l) * dist - l * std::max(0.0, m.cfg.margin - dist);
    if (d_loss_d_dist != 0.0) {
        Vector d_feat(diff.size());
        if (m.cfg.distance == DistanceKind::Euclidean) {
            if (dist > 0.0) d_feat = scale(diff, d_loss_d_dist / dist);
        } else {
            for (std::size_t i = 0; i < diff.size(); ++i)
                d_feat[i] = d_loss_d_dist * (diff[i] > 0.0 ? 1.0 : (diff[i] < 0.0 ? -1.0 : 0.0));
        }
        detail::olas_branch_backward(m, left, a, d_feat, grads);
        detail::olas_branch_backward(m, right, b, scale(d_feat, -1.0), grads);
    }
    return loss;
}

struct OlasTrainResult {
    std::vector<double> mean_loss;  // per epoch
};

/// SGD over attributed-sequence triplets for up to `epochs` passes, in the
/// given order. A pair whose loss moved less than eps since its previous
/// visit is skipped.
inline OlasTrainResult olas_train(OlasModel& m, const Dataset& ds,
                                  const std::vector<FeedbackTriplet>& triplets, double lr,
                                  std::size_t epochs, double eps) {
    if (lr <= 0.0) throw ConfigError("olas_train: learning rate must be > 0");
    if (triplets.empty()) throw ConfigError("olas_train: no triplets");
    std::vector<ResolvedPair> resolved = resolve_pairs(ds, triplets);

    OlasTrainResult result;
    ParamRefs params = m.refs();
    std::vector<double> prev_loss(resolved.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        double sum = 0.0;
        for (std::size_t k = 0; k < resolved.size(); ++k) {
            const ResolvedPair& p = resolved[k];
            OlasModel grads = OlasModel::zeros(m.cfg);
            double loss = olas_pair_grad(m, ds.records[p.left], ds.records[p.right], p.label, grads);
            if (!std::isfinite(loss)) throw NumericalError("olas_train: loss diverged");
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

/// One labeled example per class.
struct Gallery {
    std::vector<std::pair<AttributedSequence, std::string>> entries;

    void validate() const {
        std::map<std::string, int> seen;
        for (const auto& [rec, label] : entries) {
            if (label.empty()) throw ConfigError("gallery entry without a label");
            if (++seen[label] > 1) throw ConfigError("gallery has two entries for class " + label);
        }
    }

    static Gallery from_dataset(const Dataset& ds) {
        Gallery g;
        for (const auto& rec : ds.records) g.entries.push_back({rec, rec.label});
        g.validate();
        return g;
    }
};

/// Gallery features computed once per model version.
struct GalleryIndex {
    std::vector<Vector> features;
    std::vector<std::string> labels;
};

inline GalleryIndex index_gallery(const OlasModel& m, const Gallery& gallery) {
    if (gallery.entries.empty()) throw ConfigError("oneshot_label: empty gallery");
    gallery.validate();
    GalleryIndex idx;
    for (const auto& [rec, label] : gallery.entries) {
        idx.features.push_back(olas_feature(m, rec));
        idx.labels.push_back(label);
    }
    return idx;
}

/// Nearest-gallery-feature label; exact distance ties keep the earlier entry.
inline std::string oneshot_label(const OlasModel& m, const GalleryIndex& idx,
                                 const AttributedSequence& query) {
    Vector q = olas_feature(m, query);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < idx.features.size(); ++i) {
        double d = feature_distance(m, q, idx.features[i]);
        if (d < best) {
            best = d;
            best_i = i;
        }
    }
    return idx.labels[best_i];
}

inline std::string oneshot_label(const OlasModel& m, const Gallery& gallery,
                                 const AttributedSequence& query) {
    return oneshot_label(m, index_gallery(m, gallery), query);
}

struct OneshotReport {
    double accuracy = 0.0;
    std::map<std::string, double> per_class;
    std::size_t n_queries = 0;
};

inline OneshotReport oneshot_eval(const OlasModel& m, const Gallery& gallery,
                                  const std::vector<AttributedSequence>& queries) {
    GalleryIndex idx = index_gallery(m, gallery);
    OneshotReport report;
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_class;  // hits, total
    for (const auto& q : queries) {
        if (!q.labeled()) throw ConfigError("oneshot_eval: unlabeled query " + q.id);
        std::string predicted = oneshot_label(m, idx, q);
        auto& [hits, total] = per_class[q.label];
        ++total;
        if (predicted == q.label) {
            ++hits;
            report.accuracy += 1.0;
        }
    }
    report.n_queries = queries.size();
    if (!queries.empty()) report.accuracy /= static_cast<double>(queries.size());
    for (auto& [label, counts] : per_class)
        report.per_class[label] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    return report;
}

}  // namespace attrseq
