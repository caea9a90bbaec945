#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "attrseq/core/errors.hpp"
#include "attrseq/core/tensor.hpp"

namespace attrseq {

/// Embeddings with optional class labels, one row per id.
struct EmbeddingSet {
    std::vector<std::string> ids;
    Matrix vectors;                   // n x d
    std::vector<std::string> labels;  // empty or one per row

    std::size_t size() const { return ids.size(); }
    std::size_t dim() const { return vectors.cols(); }

    void validate() const {
        if (vectors.rows() != ids.size()) throw DimensionError("EmbeddingSet: rows != ids");
        if (!labels.empty() && labels.size() != ids.size())
            throw DimensionError("EmbeddingSet: labels != ids");
        vectors.check_finite();
    }
};

inline double row_distance(const Matrix& m, std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double diff = m(a, c) - m(b, c);
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

/// k-NN outlier score: Euclidean distance to the k-th nearest neighbor.
inline std::vector<double> knn_outlier_scores(const EmbeddingSet& emb, std::size_t k) {
    const std::size_t n = emb.size();
    if (k < 1 || k >= n) throw ConfigError("knn_outlier_scores: need 1 <= k < n");
    std::vector<double> scores(n);
    std::vector<double> dists;
    for (std::size_t i = 0; i < n; ++i) {
        dists.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) dists.push_back(row_distance(emb.vectors, i, j));
        std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
        scores[i] = dists[k - 1];
    }
    return scores;
}

/// Exact rank-statistic AUC: the probability that a random positive outscores
/// a random negative, ties counted one half.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw DimensionError("roc_auc: length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int l : labels) (l ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("roc_auc: both classes required");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // ranks are 1-based
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]]) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Normalized mutual information between two labelings, MI over the
/// arithmetic mean of the entropies. Permutation-invariant in label names.
inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw DimensionError("nmi: length mismatch");
    if (a.empty()) throw DimensionError("nmi: empty labelings");
    const double n = static_cast<double>(a.size());

    std::map<int, double> pa, pb;
    std::map<std::pair<int, int>, double> pab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
        pab[{a[i], b[i]}] += 1.0;
    }
    // Entropy and MI terms are summed in sorted order so that nmi(a,b) and
    // nmi(b,a) add the same multiset of doubles and stay bitwise equal.
    auto sorted_sum = [](std::vector<double>& terms) {
        std::sort(terms.begin(), terms.end());
        double acc = 0.0;
        for (double t : terms) acc += t;
        return acc;
    };
    std::vector<double> ha_terms, hb_terms, mi_terms;
    for (auto& [k, c] : pa) ha_terms.push_back(-(c / n) * std::log(c / n));
    for (auto& [k, c] : pb) hb_terms.push_back(-(c / n) * std::log(c / n));
    for (auto& [kk, c] : pab) {
        const double pxy = c / n;
        mi_terms.push_back(pxy * std::log(pxy / ((pa[kk.first] / n) * (pb[kk.second] / n))));
    }
    const double ha = sorted_sum(ha_terms);
    const double hb = sorted_sum(hb_terms);
    const double mi = sorted_sum(mi_terms);
    if (ha == 0.0 && hb == 0.0) return 1.0;  // two trivial partitions are identical
    const double denom = 0.5 * (ha + hb);
    if (denom == 0.0) return 0.0;
    double v = mi / denom;
    return std::clamp(v, 0.0, 1.0);
}

/// Deterministic density clustering: connected components of the
/// radius-neighbor graph; components below min_cluster_size become noise (-1).
/// Cluster ids follow the order of each component's first member.
inline std::vector<int> density_cluster(const EmbeddingSet& emb, std::size_t min_cluster_size,
                                        double radius) {
    if (min_cluster_size < 2) throw ConfigError("density_cluster: min_cluster_size must be >= 2");
    if (!(radius > 0.0)) throw ConfigError("density_cluster: radius must be > 0");
    const std::size_t n = emb.size();
    std::vector<int> component(n, -1);
    int next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
        if (component[i] != -1) continue;
        component[i] = next;
        stack.assign(1, i);
        while (!stack.empty()) {
            std::size_t cur = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j) {
                if (component[j] == -1 && row_distance(emb.vectors, cur, j) <= radius) {
                    component[j] = next;
                    stack.push_back(j);
                }
            }
        }
        ++next;
    }
    std::vector<std::size_t> sizes(static_cast<std::size_t>(next), 0);
    for (int c : component) sizes[static_cast<std::size_t>(c)]++;
    std::vector<int> remap(static_cast<std::size_t>(next), -1);
    int cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t comp = static_cast<std::size_t>(component[i]);
        if (sizes[comp] >= min_cluster_size && remap[comp] == -1) remap[comp] = cluster++;
    }
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = remap[static_cast<std::size_t>(component[i])];
    return labels;
}

/// Mean silhouette coefficient over all points; singleton-cluster points
/// contribute 0, coincident clusters land at 0 via the max(a,b)=0 guard.
inline double silhouette(const EmbeddingSet& emb, const std::vector<int>& labels) {
    const std::size_t n = emb.size();
    if (labels.size() != n) throw DimensionError("silhouette: labels != rows");
    std::map<int, std::size_t> counts;
    for (int l : labels) counts[l]++;
    if (counts.size() < 2) throw UndefinedMetricError("silhouette: need at least 2 clusters");

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] == 1) continue;  // s(i) = 0
        std::map<int, double> sum_dist;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sum_dist[labels[j]] += row_distance(emb.vectors, i, j);
        }
        const double a = sum_dist[labels[i]] / static_cast<double>(counts[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (auto& [label, s] : sum_dist) {
            if (label == labels[i]) continue;
            b = std::min(b, s / static_cast<double>(counts[label]));
        }
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(n);
}

inline double accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& truths) {
    if (preds.size() != truths.size()) throw DimensionError("accuracy: length mismatch");
    if (preds.empty()) throw DimensionError("accuracy: empty inputs");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == truths[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

/// Map string labels onto dense ints (first occurrence order), for the
/// metrics that take integer labelings.
inline std::vector<int> labels_to_ints(const std::vector<std::string>& labels) {
    std::vector<int> out;
    std::map<std::string, int> seen;
    int next = 0;
    for (const auto& l : labels) {
        auto it = seen.find(l);
        if (it == seen.end()) it = seen.emplace(l, next++).first;
        out.push_back(it->second);
    }
    return out;
}

}  // namespace attrseq
