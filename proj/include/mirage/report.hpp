#ifndef MIRAGE_REPORT_HPP
#define MIRAGE_REPORT_HPP

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirage/error.hpp"

namespace mirage {

struct DeltaRow {
    std::string metric;
    double baseline = 0.0;
    double ours = 0.0;
    double delta_percent = 0.0;   // (ours - baseline) / baseline * 100
    std::string rendered;         // two decimals, e.g. "-93.54"
};

inline std::string render_percent(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

/// Relative-improvement table: Delta% = (ours - baseline)/baseline * 100.
/// Negative means improvement for lower-is-better metrics.
inline std::vector<DeltaRow> delta_report(const std::map<std::string, double>& baseline,
                                          const std::map<std::string, double>& ours,
                                          const std::vector<std::string>& metrics) {
    std::vector<DeltaRow> rows;
    for (const std::string& key : metrics) {
        auto bi = baseline.find(key);
        auto oi = ours.find(key);
        if (bi == baseline.end() || oi == ours.end())
            fail("MissingMetric", "metric '" + key + "' absent from one result set");
        if (bi->second == 0.0) fail("ZeroBaseline", "metric '" + key + "' has zero baseline");
        DeltaRow r;
        r.metric = key;
        r.baseline = bi->second;
        r.ours = oi->second;
        r.delta_percent = (oi->second - bi->second) / bi->second * 100.0;
        r.rendered = render_percent(r.delta_percent);
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Pulls comparable numeric metrics out of a results document: the
/// "aggregate" object if present, else all numeric top-level fields.
inline std::map<std::string, double> extract_metrics(const nlohmann::json& doc) {
    std::map<std::string, double> out;
    const nlohmann::json* src = &doc;
    if (doc.is_object() && doc.contains("aggregate") && doc["aggregate"].is_object())
        src = &doc["aggregate"];
    if (!src->is_object()) fail("SchemaError", "results document has no metric object");
    for (auto it = src->begin(); it != src->end(); ++it)
        if (it.value().is_number()) out[it.key()] = it.value().get<double>();
    if (out.empty()) fail("MissingMetric", "results document has no numeric metrics");
    return out;
}

} // namespace mirage

#endif
