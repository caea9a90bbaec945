#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "attrseq/core/errors.hpp"

namespace attrseq {

/// Ordered set of item strings. Order is first occurrence so that streaming
/// ingestion is stable; the order is persisted in checkpoints.
class Vocabulary {
public:
    /// Returns the index of `item`, inserting it if unseen.
    std::size_t add(const std::string& item) {
        auto it = index_.find(item);
        if (it != index_.end()) return it->second;
        items_.push_back(item);
        index_.emplace(item, items_.size() - 1);
        return items_.size() - 1;
    }

    std::optional<std::size_t> find(const std::string& item) const {
        auto it = index_.find(item);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return items_.size(); }
    const std::string& item(std::size_t i) const { return items_.at(i); }
    const std::vector<std::string>& items() const { return items_; }

    static Vocabulary from_items(const std::vector<std::string>& items) {
        Vocabulary v;
        for (const auto& s : items)
            if (v.add(s) != v.size() - 1) throw VocabError("duplicate vocabulary item: " + s);
        return v;
    }

    bool operator==(const Vocabulary& o) const { return items_ == o.items_; }

private:
    std::vector<std::string> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace attrseq
