#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "attrseq/core/tensor.hpp"
#include "attrseq/data/schema.hpp"
#include "attrseq/data/vocabulary.hpp"

namespace attrseq {

/// One attributed sequence: a fixed-width numeric attribute vector plus a
/// variable-length list of vocabulary indices, optionally labeled.
struct AttributedSequence {
    std::string id;
    Vector attributes;
    std::vector<std::size_t> items;
    std::string label;  // empty = unlabeled

    bool labeled() const { return !label.empty(); }
    std::size_t length() const { return items.size(); }
};

struct Dataset {
    Vocabulary vocab;
    std::size_t attr_width = 0;  // u, constant across records
    std::vector<AttributedSequence> records;
    std::size_t max_len = 0;  // t_max over the records
    AttributeSchema schema;   // how raw attributes were encoded

    std::size_t vocab_size() const { return vocab.size(); }

    void recompute_max_len() {
        max_len = 0;
        for (const auto& r : records) max_len = std::max(max_len, r.length());
    }

    void validate() const {
        for (const auto& r : records) {
            if (r.attributes.size() != attr_width)
                throw DimensionError("record " + r.id + ": attribute width mismatch");
            for (std::size_t idx : r.items)
                if (idx >= vocab.size())
                    throw VocabError("record " + r.id + ": item index out of vocabulary");
        }
    }

    const AttributedSequence& by_id(const std::string& id) const {
        for (const auto& r : records)
            if (r.id == id) return r;
        throw ConfigError("unknown record id: " + id);
    }

    std::unordered_map<std::string, std::size_t> index_by_id() const {
        std::unordered_map<std::string, std::size_t> idx;
        for (std::size_t i = 0; i < records.size(); ++i) idx.emplace(records[i].id, i);
        return idx;
    }

    /// Distinct class labels in first-occurrence order (unlabeled records skipped).
    std::vector<std::string> class_labels() const {
        std::vector<std::string> out;
        for (const auto& r : records) {
            if (!r.labeled()) continue;
            if (std::find(out.begin(), out.end(), r.label) == out.end()) out.push_back(r.label);
        }
        return out;
    }

    /// Shallow copy carrying vocab/schema/width/t_max but only the chosen records.
    Dataset subset(const std::vector<std::size_t>& indices) const {
        Dataset out;
        out.vocab = vocab;
        out.attr_width = attr_width;
        out.schema = schema;
        out.max_len = max_len;  // keep the parent padding target for consistent encoding
        out.records.reserve(indices.size());
        for (std::size_t i : indices) out.records.push_back(records[i]);
        return out;
    }
};

}  // namespace attrseq
