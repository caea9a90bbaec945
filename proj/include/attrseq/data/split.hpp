#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "attrseq/core/rng.hpp"
#include "attrseq/data/record.hpp"

namespace attrseq {

/// Seeded shuffle split into (train, validation); `fraction` is the
/// validation share. Disjoint, union = input, sizes within 1 of the split.
inline std::pair<Dataset, Dataset> split_train_validation(const Dataset& ds, double fraction, Rng& rng) {
    if (!(fraction > 0.0) || !(fraction < 1.0))
        throw ConfigError("split_train_validation: fraction must lie in (0,1)");
    std::vector<std::size_t> order(ds.records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::size_t n_val = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(ds.records.size())));
    n_val = std::min(n_val, ds.records.size());
    std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
    std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());
    // keep record order stable within each side
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    return {ds.subset(train_idx), ds.subset(val_idx)};
}

/// Class-level split for one-shot protocols: the train and one-shot sides
/// see disjoint class sets and every record follows its class.
inline std::pair<Dataset, Dataset> split_classes_for_oneshot(const Dataset& ds, double train_fraction,
                                                             Rng& rng) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw ConfigError("split_classes_for_oneshot: fraction must lie in (0,1)");
    std::vector<std::string> classes = ds.class_labels();
    if (classes.size() < 2) throw ConfigError("split_classes_for_oneshot: need at least 2 classes");
    rng.shuffle(classes);
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(classes.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, classes.size() - 1);
    std::vector<std::string> train_classes(classes.begin(), classes.begin() + n_train);

    auto in_train = [&](const std::string& label) {
        return std::find(train_classes.begin(), train_classes.end(), label) != train_classes.end();
    };
    std::vector<std::size_t> train_idx, oneshot_idx;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        if (!ds.records[i].labeled()) throw ConfigError("split_classes_for_oneshot: dataset must be labeled");
        (in_train(ds.records[i].label) ? train_idx : oneshot_idx).push_back(i);
    }
    return {ds.subset(train_idx), ds.subset(oneshot_idx)};
}

}  // namespace attrseq
