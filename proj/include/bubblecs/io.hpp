#pragma once

#include "bubblecs/errors.hpp"
#include "bubblecs/model.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bubblecs {

struct PriceRecord {
    std::chrono::year_month_day date;
    double price = 0.0;
};

/// Column selection for price files. Empty names pick the first and second columns.
struct ColumnSpec {
    std::string date_column;
    std::string price_column;
};

/// Observation index <-> calendar date, both directions.
class DateIndex {
public:
    DateIndex() = default;
    explicit DateIndex(std::vector<std::chrono::year_month_day> dates) : dates_(std::move(dates)) {
        for (std::size_t i = 0; i < dates_.size(); ++i) lookup_[std::chrono::sys_days(dates_[i])] = static_cast<int>(i);
    }

    std::size_t size() const { return dates_.size(); }
    std::chrono::year_month_day date(int index) const {
        if (index < 0 || static_cast<std::size_t>(index) >= dates_.size())
            throw RangeError("observation index " + std::to_string(index) + " outside the sample");
        return dates_[static_cast<std::size_t>(index)];
    }
    std::string label(int index) const { return format_date(date(index)); }

    int index(std::chrono::year_month_day d) const {
        const auto it = lookup_.find(std::chrono::sys_days(d));
        if (it == lookup_.end()) throw RangeError("date " + format_date(d) + " not in the sample");
        return it->second;
    }

    static std::string format_date(std::chrono::year_month_day d) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                      static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
        return buf;
    }

private:
    std::vector<std::chrono::year_month_day> dates_;
    std::map<std::chrono::sys_days, int> lookup_;
};

struct PriceData {
    std::vector<PriceRecord> records;
    Series series;
    DateIndex index;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

/// Parses YYYY-MM-DD.
inline std::chrono::year_month_day parse_date(const std::string& s) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
        throw DataError("unparseable date '" + s + "' (expected YYYY-MM-DD)");
    const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(m), std::chrono::day(d)};
    if (!ymd.ok()) throw DataError("invalid calendar date '" + s + "'");
    return ymd;
}

/// Reads a CSV of dated prices. Prices must be positive when log_transform
/// is set; dates must be strictly increasing. Errors carry the line number.
inline PriceData ingest(std::istream& in, const ColumnSpec& cols = {}, bool log_transform = true) {
    std::string line;
    int lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty() || line[0] == '#') continue;
        header = detail::split_csv(line);
        break;
    }
    if (header.empty()) throw DataError("input has no header row");

    auto column = [&](const std::string& name, std::size_t fallback) {
        if (name.empty()) {
            if (fallback >= header.size()) throw DataError("input needs at least two columns");
            return fallback;
        }
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("column '" + name + "' not found in header");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t dc = column(cols.date_column, 0);
    const std::size_t pc = column(cols.price_column, 1);

    PriceData data;
    std::vector<double> y;
    std::vector<std::chrono::year_month_day> dates;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty() || line[0] == '#') continue;
        const auto cells = detail::split_csv(line);
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (cells.size() <= std::max(dc, pc)) throw DataError(where + "too few fields");
        std::chrono::year_month_day date;
        try {
            date = parse_date(cells[dc]);
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        }
        double price = 0.0;
        const auto& p = cells[pc];
        const auto res = std::from_chars(p.data(), p.data() + p.size(), price);
        if (p.empty() || res.ec != std::errc() || res.ptr != p.data() + p.size() || !std::isfinite(price))
            throw DataError(where + "unparseable price '" + p + "'");
        if (!dates.empty() && std::chrono::sys_days(date) <= std::chrono::sys_days(dates.back()))
            throw DataError(where + "dates must be strictly increasing");
        if (log_transform && !(price > 0.0))
            throw DataError(where + "price must be positive to take logs, got " + p);
        data.records.push_back({date, price});
        dates.push_back(date);
        y.push_back(log_transform ? std::log(price) : price);
    }
    if (y.empty()) throw DataError("input has no data rows");
    data.series = Series(std::move(y));
    data.index = DateIndex(std::move(dates));
    return data;
}

inline PriceData ingest(const std::string& path, const ColumnSpec& cols = {}, bool log_transform = true) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return ingest(in, cols, log_transform);
}

/// Reproducibility header: `# key=value` lines ahead of CSV content.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

inline void write_config_header(std::ostream& os, const ConfigEntries& cfg) {
    for (const auto& [k, v] : cfg) os << "# " << k << '=' << v << '\n';
}

}  // namespace bubblecs
