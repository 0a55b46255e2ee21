#include "battpoa/series_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace battpoa {

std::int64_t days_from_civil(int year, int month, int day) {
    // Howard Hinnant's algorithm.
    const std::int64_t y = static_cast<std::int64_t>(year) - (month <= 2 ? 1 : 0);
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;
    const std::int64_t mp = (month + 9) % 12;
    const std::int64_t doy = (153 * mp + 2) / 5 + day - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

namespace {

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    year = static_cast<int>(yoe + era * 400 + (month <= 2 ? 1 : 0));
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

// Reads exactly `width` digits at pos.
int digits(std::string_view s, std::size_t& pos, std::size_t width) {
    if (pos + width > s.size()) throw std::invalid_argument("truncated timestamp");
    int v = 0;
    const auto* first = s.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + width, v);
    if (ec != std::errc() || ptr != first + width)
        throw std::invalid_argument("expected digits in timestamp");
    pos += width;
    return v;
}

void expect(std::string_view s, std::size_t& pos, char c) {
    if (pos >= s.size() || s[pos] != c)
        throw std::invalid_argument(std::string("expected '") + c + "' in timestamp");
    ++pos;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

Timestamp Timestamp::parse(std::string_view text) {
    const std::string_view s = trim(text);
    Timestamp t;
    std::size_t pos = 0;
    t.year = digits(s, pos, 4);
    expect(s, pos, '-');
    t.month = digits(s, pos, 2);
    expect(s, pos, '-');
    t.day = digits(s, pos, 2);
    if (pos >= s.size() || (s[pos] != 'T' && s[pos] != ' '))
        throw std::invalid_argument("expected 'T' between date and time");
    ++pos;
    t.hour = digits(s, pos, 2);
    expect(s, pos, ':');
    t.minute = digits(s, pos, 2);
    if (pos < s.size() && s[pos] == ':') {
        ++pos;
        t.second = digits(s, pos, 2);
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        }
    }
    if (pos >= s.size()) throw std::invalid_argument("timestamp lacks a UTC offset");
    if (s[pos] == 'Z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        ++pos;
        const int oh = digits(s, pos, 2);
        if (pos < s.size() && s[pos] == ':') ++pos;
        const int om = digits(s, pos, 2);
        if (oh > 23 || om > 59) throw std::invalid_argument("UTC offset out of range");
        t.offset_minutes = sign * (oh * 60 + om);
    } else {
        throw std::invalid_argument("malformed UTC offset");
    }
    if (pos != s.size()) throw std::invalid_argument("trailing characters after timestamp");
    if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > days_in_month(t.year, t.month) ||
        t.hour > 23 || t.minute > 59 || t.second > 60)
        throw std::invalid_argument("timestamp field out of range");
    return t;
}

std::int64_t Timestamp::local_day() const { return days_from_civil(year, month, day); }

std::int64_t Timestamp::utc_seconds() const {
    return local_day() * 86400 + hour * 3600 + minute * 60 + second -
           static_cast<std::int64_t>(offset_minutes) * 60;
}

std::string Timestamp::to_iso() const {
    char buf[40];
    if (offset_minutes == 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", year, month, day, hour,
                      minute, second);
    } else {
        const int a = offset_minutes < 0 ? -offset_minutes : offset_minutes;
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d%c%02d:%02d", year, month,
                      day, hour, minute, second, offset_minutes < 0 ? '-' : '+', a / 60, a % 60);
    }
    return buf;
}

Timestamp timestamp_from_local(std::int64_t local_day, int hour, int offset_minutes) {
    Timestamp t;
    civil_from_days(local_day, t.year, t.month, t.day);
    t.hour = hour;
    t.offset_minutes = offset_minutes;
    return t;
}

HourlySeries::HourlySeries(std::vector<HourlyRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (!std::isfinite(records_[i].net_demand_mw))
            throw std::invalid_argument("net demand must be finite (record " +
                                        std::to_string(i + 1) + ")");
        if (i > 0 && records_[i].time.utc_seconds() <= records_[i - 1].time.utc_seconds())
            throw std::invalid_argument("timestamps must be strictly increasing (record " +
                                        std::to_string(i + 1) + ")");
    }
}

std::size_t HourlySeries::priced_count() const {
    std::size_t n = 0;
    for (const auto& r : records_) n += r.da_price.has_value() ? 1 : 0;
    return n;
}

IngestError::IngestError(std::size_t row, const std::string& what)
    : std::runtime_error(row == 0 ? "header: " + what : "row " + std::to_string(row) + ": " + what),
      row_(row) {}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

double parse_number(std::string_view s, std::size_t row, const char* column) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw IngestError(row, std::string("malformed ") + column + " '" + std::string(s) + "'");
    return v;
}

}  // namespace

HourlySeries read_series_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IngestError(0, "empty input");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_csv(line);
    int ts_col = -1, demand_col = -1, price_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "timestamp") ts_col = static_cast<int>(i);
        else if (header[i] == "net_demand_mw") demand_col = static_cast<int>(i);
        else if (header[i] == "da_price_usd_per_mwh") price_col = static_cast<int>(i);
    }
    if (ts_col < 0 || demand_col < 0)
        throw IngestError(0, "expected columns timestamp,net_demand_mw[,da_price_usd_per_mwh]");

    std::vector<HourlyRecord> records;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw IngestError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                       std::to_string(cells.size()));
        HourlyRecord rec;
        try {
            rec.time = Timestamp::parse(cells[static_cast<std::size_t>(ts_col)]);
        } catch (const std::invalid_argument& e) {
            throw IngestError(row, std::string("malformed timestamp: ") + e.what());
        }
        rec.net_demand_mw = parse_number(cells[static_cast<std::size_t>(demand_col)], row,
                                         "net_demand_mw");
        if (price_col >= 0 && !cells[static_cast<std::size_t>(price_col)].empty())
            rec.da_price = parse_number(cells[static_cast<std::size_t>(price_col)], row,
                                        "da_price_usd_per_mwh");
        if (!records.empty() && rec.time.utc_seconds() <= records.back().time.utc_seconds())
            throw IngestError(row, "timestamps must be strictly increasing");
        records.push_back(rec);
    }
    return HourlySeries(std::move(records));
}

HourlySeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_series_csv(in);
}

void write_series_csv(std::ostream& out, const HourlySeries& series) {
    const bool priced = series.priced_count() > 0;
    out << "timestamp,net_demand_mw";
    if (priced) out << ",da_price_usd_per_mwh";
    out << '\n';
    char buf[64];
    for (const auto& r : series.records()) {
        out << r.time.to_iso();
        std::snprintf(buf, sizeof buf, ",%.6f", r.net_demand_mw);
        out << buf;
        if (priced) {
            out << ',';
            if (r.da_price) {
                std::snprintf(buf, sizeof buf, "%.6f", *r.da_price);
                out << buf;
            }
        }
        out << '\n';
    }
}

FuelMix parse_fuel_mix(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("fuel mix is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("shares") || !j["shares"].is_object())
        throw std::invalid_argument("fuel mix needs an object field \"shares\"");
    FuelMix mix;
    for (const auto& [fuel, share] : j["shares"].items()) {
        if (!share.is_number()) throw std::invalid_argument("share of " + fuel + " is not a number");
        const double v = share.get<double>();
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("share of " + fuel + " must be >= 0");
        mix.shares[fuel] = v;
    }
    if (j.contains("fast_fuels")) {
        if (!j["fast_fuels"].is_array())
            throw std::invalid_argument("\"fast_fuels\" must be an array of fuel names");
        for (const auto& f : j["fast_fuels"]) {
            if (!f.is_string()) throw std::invalid_argument("fast fuel names must be strings");
            mix.fast_fuels.insert(f.get<std::string>());
        }
    }
    return mix;
}

FuelMix read_fuel_mix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_fuel_mix(ss.str());
}

}  // namespace battpoa
