#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "attrseq/core/errors.hpp"
#include "attrseq/data/record.hpp"

namespace attrseq {

namespace detail {

struct RawRecord {
    std::string id;
    nlohmann::json attrs;
    std::vector<std::string> items;
    std::string label;
};

inline std::vector<RawRecord> parse_jsonl_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<RawRecord> raw;
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
        if (!j.is_object() || !j.contains("id") || !j.contains("attributes") || !j.contains("sequence"))
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected object with id/attributes/sequence");
        RawRecord r;
        r.id = j.at("id").get<std::string>();
        r.attrs = j.at("attributes");
        if (!r.attrs.is_object())
            throw ParseError(path + ":" + std::to_string(lineno) + ": attributes must be an object");
        for (const auto& item : j.at("sequence")) {
            if (!item.is_string())
                throw ParseError(path + ":" + std::to_string(lineno) + ": sequence items must be strings");
            r.items.push_back(item.get<std::string>());
        }
        if (j.contains("label") && !j.at("label").is_null()) r.label = j.at("label").get<std::string>();
        raw.push_back(std::move(r));
    }
    return raw;
}

}  // namespace detail

/// Load a dataset from JSONL (one object per line). The vocabulary is built
/// in first-occurrence order; categorical attributes one-hot expand and
/// numeric attributes min-max scale to [0,1]. Pure function of the file bytes.
inline Dataset load_jsonl(const std::string& path) {
    auto raw = detail::parse_jsonl_lines(path);
    Dataset ds;
    if (raw.empty()) return ds;

    // Attribute keys come from the first record (sorted for determinism);
    // every other record must carry exactly the same key set.
    std::vector<std::string> keys;
    for (auto it = raw[0].attrs.begin(); it != raw[0].attrs.end(); ++it) keys.push_back(it.key());
    std::sort(keys.begin(), keys.end());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        std::vector<std::string> got;
        for (auto it = raw[i].attrs.begin(); it != raw[i].attrs.end(); ++it) got.push_back(it.key());
        std::sort(got.begin(), got.end());
        if (got != keys)
            throw SchemaError(path + ": record " + raw[i].id + " has inconsistent attribute keys");
    }

    for (const auto& key : keys) {
        AttributeSchema::Field f;
        f.key = key;
        bool saw_number = false, saw_string = false;
        for (const auto& r : raw) {
            const auto& v = r.attrs.at(key);
            if (v.is_number())
                saw_number = true;
            else if (v.is_string())
                saw_string = true;
            else
                throw SchemaError(path + ": attribute " + key + " must be string or number");
        }
        if (saw_number && saw_string)
            throw SchemaError(path + ": attribute " + key + " mixes strings and numbers");
        f.numeric = saw_number;
        if (f.numeric) {
            f.min = raw[0].attrs.at(key).get<double>();
            f.max = f.min;
            for (const auto& r : raw) {
                double v = r.attrs.at(key).get<double>();
                f.min = std::min(f.min, v);
                f.max = std::max(f.max, v);
            }
        } else {
            for (const auto& r : raw) {
                const std::string s = r.attrs.at(key).get<std::string>();
                if (std::find(f.categories.begin(), f.categories.end(), s) == f.categories.end())
                    f.categories.push_back(s);
            }
        }
        ds.schema.fields.push_back(std::move(f));
    }
    ds.attr_width = ds.schema.width();

    for (const auto& r : raw) {
        AttributedSequence rec;
        rec.id = r.id;
        rec.label = r.label;
        rec.attributes = ds.schema.encode(r.attrs);
        for (const auto& item : r.items) rec.items.push_back(ds.vocab.add(item));
        ds.records.push_back(std::move(rec));
    }
    ds.recompute_max_len();
    ds.validate();
    return ds;
}

/// Load a dataset re-encoded through a fixed schema and vocabulary (the
/// ones persisted with a checkpoint), so new data maps into exactly the
/// numeric space the model was trained in. Unknown items are rejected.
inline Dataset load_jsonl_with(const std::string& path, const AttributeSchema& schema,
                               const Vocabulary& vocab) {
    auto raw = detail::parse_jsonl_lines(path);
    Dataset ds;
    ds.schema = schema;
    ds.vocab = vocab;
    ds.attr_width = schema.width();
    for (const auto& r : raw) {
        AttributedSequence rec;
        rec.id = r.id;
        rec.label = r.label;
        rec.attributes = ds.schema.encode(r.attrs);
        for (const auto& item : r.items) {
            auto idx = ds.vocab.find(item);
            if (!idx) throw VocabError(path + ": record " + r.id + " uses unknown item " + item);
            rec.items.push_back(*idx);
        }
        ds.records.push_back(std::move(rec));
    }
    ds.recompute_max_len();
    ds.validate();
    return ds;
}

/// Serialize with full double precision so reload reproduces the values.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Write a dataset as JSONL. Attribute vectors are emitted through the
/// schema's field names; synthetic datasets use numeric fields a0..a{u-1}.
inline void write_jsonl(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& r : ds.records) {
        std::ostringstream line;
        line << "{\"id\":" << nlohmann::json(r.id).dump() << ",\"attributes\":{";
        std::size_t pos = 0;
        bool first = true;
        for (const auto& f : ds.schema.fields) {
            if (!first) line << ",";
            first = false;
            line << nlohmann::json(f.key).dump() << ":";
            if (f.numeric) {
                // invert the min-max scaling so the raw value round-trips
                double raw = f.min + r.attributes[pos] * (f.max - f.min);
                line << format_double(raw);
                pos += 1;
            } else {
                std::size_t hit = 0;
                for (std::size_t c = 0; c < f.categories.size(); ++c)
                    if (r.attributes[pos + c] == 1.0) hit = c;
                line << nlohmann::json(f.categories[hit]).dump();
                pos += f.categories.size();
            }
        }
        line << "},\"sequence\":[";
        for (std::size_t t = 0; t < r.items.size(); ++t) {
            if (t) line << ",";
            line << nlohmann::json(ds.vocab.item(r.items[t])).dump();
        }
        line << "]";
        if (r.labeled()) line << ",\"label\":" << nlohmann::json(r.label).dump();
        line << "}";
        out << line.str() << "\n";
    }
}

}  // namespace attrseq
