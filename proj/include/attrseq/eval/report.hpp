#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "attrseq/core/errors.hpp"

namespace attrseq {

/// One evaluation result: metric name, value, parameters and sample count.
struct MetricReport {
    std::string metric;
    double value = 0.0;
    std::map<std::string, std::string> params;
    std::size_t n = 0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["metric"] = metric;
        j["value"] = value;
        j["params"] = params;
        j["n"] = n;
        return j;
    }
};

inline void write_reports_jsonl(const std::vector<MetricReport>& reports, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& r : reports) out << r.to_json().dump() << "\n";
}

}  // namespace attrseq
