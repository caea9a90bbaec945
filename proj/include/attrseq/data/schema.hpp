#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "attrseq/core/errors.hpp"
#include "attrseq/core/tensor.hpp"

namespace attrseq {

/// How raw attribute values map to the numeric vector the networks consume.
/// Numeric fields are min-max scaled to [0,1]; categorical fields expand to
/// one-hot blocks whose categories are kept in first-occurrence order. The
/// schema is persisted next to checkpoints so new data encodes identically.
struct AttributeSchema {
    struct Field {
        std::string key;
        bool numeric = true;
        double min = 0.0, max = 1.0;              // numeric only
        std::vector<std::string> categories;      // categorical only
    };
    std::vector<Field> fields;

    std::size_t width() const {
        std::size_t w = 0;
        for (const auto& f : fields) w += f.numeric ? 1 : f.categories.size();
        return w;
    }

    /// Encode one record's raw attribute object.
    Vector encode(const nlohmann::json& attrs) const {
        Vector out(width());
        std::size_t pos = 0;
        for (const auto& f : fields) {
            if (!attrs.contains(f.key)) throw SchemaError("missing attribute key: " + f.key);
            const auto& v = attrs.at(f.key);
            if (f.numeric) {
                if (!v.is_number()) throw SchemaError("attribute " + f.key + " expected numeric");
                const double span = f.max - f.min;
                out[pos] = span > 0.0 ? (v.get<double>() - f.min) / span : 0.0;
                pos += 1;
            } else {
                if (!v.is_string()) throw SchemaError("attribute " + f.key + " expected string");
                const std::string s = v.get<std::string>();
                bool hit = false;
                for (std::size_t c = 0; c < f.categories.size(); ++c) {
                    if (f.categories[c] == s) {
                        out[pos + c] = 1.0;
                        hit = true;
                        break;
                    }
                }
                if (!hit) throw SchemaError("attribute " + f.key + ": unseen category " + s);
                pos += f.categories.size();
            }
        }
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& f : fields) {
            nlohmann::json j;
            j["key"] = f.key;
            j["kind"] = f.numeric ? "numeric" : "categorical";
            if (f.numeric) {
                j["min"] = f.min;
                j["max"] = f.max;
            } else {
                j["categories"] = f.categories;
            }
            arr.push_back(j);
        }
        return arr;
    }

    static AttributeSchema from_json(const nlohmann::json& arr) {
        AttributeSchema s;
        for (const auto& j : arr) {
            Field f;
            f.key = j.at("key").get<std::string>();
            f.numeric = j.at("kind").get<std::string>() == "numeric";
            if (f.numeric) {
                f.min = j.at("min").get<double>();
                f.max = j.at("max").get<double>();
            } else {
                f.categories = j.at("categories").get<std::vector<std::string>>();
            }
            s.fields.push_back(std::move(f));
        }
        return s;
    }
};

}  // namespace attrseq
