#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "attrseq/core/rng.hpp"
#include "attrseq/data/record.hpp"

namespace attrseq {

/// Synthetic attributed-sequence corpus. Each class owns a prototype
/// attribute vector and a first-order Markov chain over its item pool, so
/// both the attribute side and the item ordering carry class signal. The
/// default widths mirror a mid-sized clickstream log (u=11, r=288, average
/// sequence length around 18); tests override them with desk-scale values.
struct SyntheticConfig {
    std::size_t n_classes = 2;
    std::size_t per_class = 25;
    std::size_t attr_width = 11;   // u
    std::size_t vocab_size = 288;  // r
    std::size_t len_min = 12;
    std::size_t len_max = 24;
    double noise = 0.0;            // probability of replacing an item/attribute with a uniform draw
    bool shared_chain = false;     // one chain for all classes: class signal lives in attributes only
    double outlier_fraction = 0.0; // extra records labeled "outlier" with uniform content
    double attr_jitter = 0.05;     // per-record wiggle around the class prototype
    double chain_sharpness = 8.0;  // concentration of the chain rows; higher = more deterministic walks
};

namespace detail {

struct MarkovChain {
    std::vector<std::size_t> pool;          // item indices this chain walks over
    std::vector<double> initial;            // over pool
    std::vector<std::vector<double>> trans; // row per pool entry

    std::size_t draw(Rng& rng, const std::vector<double>& dist) const {
        double u = rng.uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            acc += dist[i];
            if (u < acc) return i;
        }
        return dist.size() - 1;
    }

    std::vector<std::size_t> walk(Rng& rng, std::size_t len) const {
        std::vector<std::size_t> seq;
        seq.reserve(len);
        std::size_t state = draw(rng, initial);
        for (std::size_t t = 0; t < len; ++t) {
            seq.push_back(pool[state]);
            state = draw(rng, trans[state]);
        }
        return seq;
    }
};

inline std::vector<double> random_distribution(Rng& rng, std::size_t n, double sharpness) {
    // exp(s*(u-1)) weights: probability ratios scale with exp(s * gap), so
    // sharpness walks the chain from near-uniform to near-deterministic
    std::vector<double> d(n);
    double sum = 0.0;
    for (double& x : d) {
        x = std::exp(sharpness * (rng.uniform() - 1.0));
        sum += x;
    }
    for (double& x : d) x /= sum;
    return d;
}

inline MarkovChain make_chain(Rng& rng, std::vector<std::size_t> pool, double sharpness) {
    MarkovChain c;
    c.pool = std::move(pool);
    c.initial = random_distribution(rng, c.pool.size(), sharpness);
    c.trans.reserve(c.pool.size());
    for (std::size_t i = 0; i < c.pool.size(); ++i)
        c.trans.push_back(random_distribution(rng, c.pool.size(), sharpness));
    return c;
}

}  // namespace detail

inline Dataset generate_synthetic(Rng& rng, const SyntheticConfig& cfg) {
    if (cfg.n_classes < 1) throw ConfigError("generate_synthetic: need at least one class");
    if (cfg.len_min == 0 || cfg.len_min > cfg.len_max)
        throw ConfigError("generate_synthetic: empty length range");
    if (cfg.noise < 0.0 || cfg.noise > 1.0) throw ConfigError("generate_synthetic: noise outside [0,1]");
    if (cfg.vocab_size < cfg.n_classes && !cfg.shared_chain)
        throw ConfigError("generate_synthetic: vocabulary smaller than class count");

    Rng proto_rng = rng.split(1);
    Rng chain_rng = rng.split(2);
    Rng record_rng = rng.split(3);

    Dataset ds;
    for (std::size_t i = 0; i < cfg.vocab_size; ++i) ds.vocab.add("item_" + std::to_string(i));
    ds.attr_width = cfg.attr_width;
    for (std::size_t j = 0; j < cfg.attr_width; ++j) {
        AttributeSchema::Field f;
        f.key = "a" + std::to_string(j);
        f.numeric = true;
        f.min = 0.0;
        f.max = 1.0;
        ds.schema.fields.push_back(std::move(f));
    }

    std::vector<Vector> prototypes;
    for (std::size_t c = 0; c < cfg.n_classes; ++c) {
        Vector p(cfg.attr_width);
        for (std::size_t j = 0; j < cfg.attr_width; ++j) p[j] = 0.15 + 0.7 * proto_rng.uniform();
        prototypes.push_back(std::move(p));
    }

    std::vector<detail::MarkovChain> chains;
    if (cfg.shared_chain) {
        std::vector<std::size_t> all(cfg.vocab_size);
        for (std::size_t i = 0; i < cfg.vocab_size; ++i) all[i] = i;
        chains.push_back(detail::make_chain(chain_rng, all, cfg.chain_sharpness));
    } else {
        for (std::size_t c = 0; c < cfg.n_classes; ++c) {
            std::vector<std::size_t> pool;
            for (std::size_t i = c; i < cfg.vocab_size; i += cfg.n_classes) pool.push_back(i);
            chains.push_back(detail::make_chain(chain_rng, std::move(pool), cfg.chain_sharpness));
        }
    }

    std::size_t next_id = 0;
    auto make_id = [&]() {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "r%05zu", next_id++);
        return std::string(buf);
    };

    for (std::size_t c = 0; c < cfg.n_classes; ++c) {
        const detail::MarkovChain& chain = cfg.shared_chain ? chains[0] : chains[c];
        for (std::size_t k = 0; k < cfg.per_class; ++k) {
            AttributedSequence rec;
            rec.id = make_id();
            rec.label = "class_" + std::to_string(c);
            rec.attributes = Vector(cfg.attr_width);
            for (std::size_t j = 0; j < cfg.attr_width; ++j) {
                double v = prototypes[c][j] + cfg.attr_jitter * (2.0 * record_rng.uniform() - 1.0);
                if (cfg.noise > 0.0 && record_rng.uniform() < cfg.noise) v = record_rng.uniform();
                rec.attributes[j] = std::clamp(v, 0.0, 1.0);
            }
            std::size_t len = cfg.len_min + record_rng.below(cfg.len_max - cfg.len_min + 1);
            rec.items = chain.walk(record_rng, len);
            if (cfg.noise > 0.0)
                for (std::size_t& item : rec.items)
                    if (record_rng.uniform() < cfg.noise) item = record_rng.below(cfg.vocab_size);
            ds.records.push_back(std::move(rec));
        }
    }

    const std::size_t n_outliers =
        static_cast<std::size_t>(cfg.outlier_fraction * static_cast<double>(cfg.n_classes * cfg.per_class) + 0.5);
    for (std::size_t k = 0; k < n_outliers; ++k) {
        AttributedSequence rec;
        rec.id = make_id();
        rec.label = "outlier";
        rec.attributes = Vector(cfg.attr_width);
        for (std::size_t j = 0; j < cfg.attr_width; ++j) rec.attributes[j] = record_rng.uniform();
        std::size_t len = cfg.len_min + record_rng.below(cfg.len_max - cfg.len_min + 1);
        rec.items.resize(len);
        for (std::size_t& item : rec.items) item = record_rng.below(cfg.vocab_size);
        ds.records.push_back(std::move(rec));
    }

    ds.recompute_max_len();
    return ds;
}

inline Dataset generate_synthetic(Rng& rng, std::size_t n_classes, std::size_t per_class,
                                  std::size_t attr_width, std::size_t vocab_size,
                                  std::size_t len_min, std::size_t len_max, double noise) {
    SyntheticConfig cfg;
    cfg.n_classes = n_classes;
    cfg.per_class = per_class;
    cfg.attr_width = attr_width;
    cfg.vocab_size = vocab_size;
    cfg.len_min = len_min;
    cfg.len_max = len_max;
    cfg.noise = noise;
    return generate_synthetic(rng, cfg);
}

}  // namespace attrseq
