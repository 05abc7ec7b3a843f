#include "camforge/svp.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "camforge/errors.hpp"

namespace camforge::drift {

namespace {

// Row order of the quantitative comparison table.
constexpr std::array<const char*, 8> kKnownMetrics{
    "X-CLIP Score",       "VQA Score",        "Subject Consistency", "Background Consistency",
    "Motion Smoothness",  "Dynamic Degree",   "Aesthetic Quality",   "Imaging Quality",
};

bool is_known(const std::string& metric) {
    for (const char* m : kKnownMetrics) {
        if (metric == m) return true;
    }
    return false;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

bool SvpTable::has(const std::string& metric, const std::string& variant) const {
    auto it = values.find(metric);
    return it != values.end() && it->second.count(variant) != 0;
}

double SvpTable::at(const std::string& metric, const std::string& variant) const {
    return values.at(metric).at(variant);
}

SvpTable svp_ingest_text(const std::string& csv_text) {
    SvpTable table;
    std::istringstream in(csv_text);
    std::string line;
    bool first = true;
    int line_no = 0;
    std::vector<std::string> metric_order;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        if (first) {
            first = false;
            if (stripped.rfind("metric", 0) == 0) continue;  // header row
        }
        std::istringstream ls(stripped);
        std::string metric, variant, value_str;
        if (!std::getline(ls, metric, ',') || !std::getline(ls, variant, ',') ||
            !std::getline(ls, value_str, ',')) {
            table.warnings.push_back("line " + std::to_string(line_no) + ": malformed row");
            continue;
        }
        metric = trim(metric);
        variant = trim(variant);
        double value;
        try {
            value = std::stod(trim(value_str));
        } catch (const std::exception&) {
            table.warnings.push_back("line " + std::to_string(line_no) + ": bad value '" +
                                     value_str + "'");
            continue;
        }

        if (table.values.count(metric) == 0) metric_order.push_back(metric);
        if (table.values[metric].count(variant) != 0) {
            table.warnings.push_back("duplicate (" + metric + ", " + variant +
                                     "): keeping the last value");
        }
        table.values[metric][variant] = value;
        if (std::find(table.variants.begin(), table.variants.end(), variant) ==
            table.variants.end()) {
            table.variants.push_back(variant);
        }
        if (!is_known(metric) &&
            std::find(table.unknown_metrics.begin(), table.unknown_metrics.end(), metric) ==
                table.unknown_metrics.end()) {
            table.unknown_metrics.push_back(metric);
        }
    }

    // known metrics in canonical order, then unknown ones as they appeared
    for (const char* m : kKnownMetrics) {
        if (table.values.count(m)) table.metrics.push_back(m);
    }
    for (const auto& m : metric_order) {
        if (!is_known(m)) table.metrics.push_back(m);
    }
    if (table.metrics.empty()) {
        table.warnings.push_back("no rows ingested: table is empty");
    }
    return table;
}

SvpTable svp_ingest(const std::string& csv_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw IoError("cannot read scores: " + csv_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return svp_ingest_text(text);
}

std::string svp_table_csv(const SvpTable& table) {
    std::ostringstream os;
    os.precision(17);
    os << "metric";
    for (const auto& v : table.variants) os << ',' << v;
    os << '\n';
    for (const auto& m : table.metrics) {
        os << m;
        for (const auto& v : table.variants) {
            os << ',';
            if (table.has(m, v)) os << table.at(m, v);
        }
        os << '\n';
    }
    return os.str();
}

std::string svp_table_pretty(const SvpTable& table) {
    std::size_t name_w = 6;
    for (const auto& m : table.metrics) name_w = std::max(name_w, m.size());

    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(name_w) + 2) << "metric";
    for (const auto& v : table.variants) os << std::right << std::setw(14) << v;
    os << '\n';
    for (const auto& m : table.metrics) {
        os << std::left << std::setw(static_cast<int>(name_w) + 2) << m;
        for (const auto& v : table.variants) {
            if (table.has(m, v)) {
                os << std::right << std::setw(14) << std::fixed << std::setprecision(3)
                   << table.at(m, v);
            } else {
                os << std::right << std::setw(14) << "-";
            }
        }
        os << '\n';
    }
    for (const auto& u : table.unknown_metrics) {
        os << "note: metric not in the standard suite: " << u << '\n';
    }
    for (const auto& w : table.warnings) {
        os << "warning: " << w << '\n';
    }
    return os.str();
}

}  // namespace camforge::drift
