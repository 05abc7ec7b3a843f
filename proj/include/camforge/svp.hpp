#pragma once

#include <map>
#include <string>
#include <vector>

namespace camforge::drift {

// Pivoted metric x variant table assembled from externally computed scores.
// No metric is computed here; the artifact only ingests and tabulates.
struct SvpTable {
    std::vector<std::string> metrics;   // known metrics first, then unknown (input order)
    std::vector<std::string> variants;  // first-seen order
    std::map<std::string, std::map<std::string, double>> values;  // metric -> variant -> value
    std::vector<std::string> unknown_metrics;
    std::vector<std::string> warnings;

    bool has(const std::string& metric, const std::string& variant) const;
    double at(const std::string& metric, const std::string& variant) const;
};

// CSV with header metric,variant,value. Duplicate (metric,variant) pairs are
// last-wins with a warning; unknown metric names are kept and listed.
SvpTable svp_ingest(const std::string& csv_path);
SvpTable svp_ingest_text(const std::string& csv_text);

std::string svp_table_csv(const SvpTable& table);
std::string svp_table_pretty(const SvpTable& table);

}  // namespace camforge::drift
