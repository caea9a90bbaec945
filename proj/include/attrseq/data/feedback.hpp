#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "attrseq/core/rng.hpp"
#include "attrseq/data/record.hpp"

namespace attrseq {

/// Pair of record ids plus a similarity label: 0 = same class, 1 = different.
struct FeedbackTriplet {
    std::string left_id, right_id;
    int label = 0;
};

/// Balanced feedback generation from class labels: half the pairs share a
/// class (label 0), half cross classes (label 1). A record is never paired
/// with itself.
inline std::vector<FeedbackTriplet> make_feedback(const Dataset& ds, Rng& rng, std::size_t n_pairs) {
    if (n_pairs < 2) throw ConfigError("make_feedback: need at least 2 pairs");
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        if (!ds.records[i].labeled()) throw ConfigError("make_feedback: dataset must be labeled");
        by_class[ds.records[i].label].push_back(i);
    }
    if (by_class.size() < 2) throw ConfigError("make_feedback: need at least 2 classes");

    std::vector<std::string> classes;
    for (const auto& [label, members] : by_class) classes.push_back(label);
    std::vector<std::string> rich_classes;  // classes able to supply same-class pairs
    for (const auto& [label, members] : by_class)
        if (members.size() >= 2) rich_classes.push_back(label);
    if (rich_classes.empty()) throw ConfigError("make_feedback: no class has two records");

    std::vector<FeedbackTriplet> out;
    const std::size_t n_similar = n_pairs / 2;
    for (std::size_t k = 0; k < n_similar; ++k) {
        const auto& members = by_class[rich_classes[rng.below(rich_classes.size())]];
        std::size_t a = rng.below(members.size());
        std::size_t b = rng.below(members.size() - 1);
        if (b >= a) ++b;
        out.push_back({ds.records[members[a]].id, ds.records[members[b]].id, 0});
    }
    for (std::size_t k = n_similar; k < n_pairs; ++k) {
        std::size_t ca = rng.below(classes.size());
        std::size_t cb = rng.below(classes.size() - 1);
        if (cb >= ca) ++cb;
        const auto& ma = by_class[classes[ca]];
        const auto& mb = by_class[classes[cb]];
        out.push_back({ds.records[ma[rng.below(ma.size())]].id,
                       ds.records[mb[rng.below(mb.size())]].id, 1});
    }
    return out;
}

inline void write_feedback_jsonl(const std::vector<FeedbackTriplet>& pairs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& p : pairs) {
        out << "{\"left\":" << nlohmann::json(p.left_id).dump()
            << ",\"right\":" << nlohmann::json(p.right_id).dump() << ",\"label\":" << p.label << "}\n";
    }
}

inline std::vector<FeedbackTriplet> load_feedback_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<FeedbackTriplet> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        FeedbackTriplet t;
        t.left_id = j.at("left").get<std::string>();
        t.right_id = j.at("right").get<std::string>();
        t.label = j.at("label").get<int>();
        if (t.label != 0 && t.label != 1)
            throw ParseError(path + ":" + std::to_string(lineno) + ": label must be 0 or 1");
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace attrseq
