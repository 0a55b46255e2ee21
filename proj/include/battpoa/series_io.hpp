#ifndef BATTPOA_SERIES_IO_HPP
#define BATTPOA_SERIES_IO_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace battpoa {

// Local wall-clock time with a fixed UTC offset, as written in ISO-8601
// ("2023-07-01T19:00:00-07:00", "...Z").
struct Timestamp {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;
    int offset_minutes = 0;

    // Throws std::invalid_argument on malformed input.
    static Timestamp parse(std::string_view text);

    std::int64_t utc_seconds() const;
    // Days since 1970-01-01 of the local calendar date.
    std::int64_t local_day() const;
    int quarter() const { return (month - 1) / 3 + 1; }
    std::string to_iso() const;
};

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int year, int month, int day);
Timestamp timestamp_from_local(std::int64_t local_day, int hour, int offset_minutes);

struct HourlyRecord {
    Timestamp time;
    double net_demand_mw = 0.0;
    std::optional<double> da_price;
};

class HourlySeries {
public:
    HourlySeries() = default;
    // Throws std::invalid_argument unless timestamps strictly increase and
    // demand is finite.
    explicit HourlySeries(std::vector<HourlyRecord> records);

    const std::vector<HourlyRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    std::size_t priced_count() const;

private:
    std::vector<HourlyRecord> records_;
};

// Ingestion failure with the 1-based data row (header excluded); row 0
// means the header.
class IngestError : public std::runtime_error {
public:
    IngestError(std::size_t row, const std::string& what);
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

// Header: timestamp,net_demand_mw[,da_price_usd_per_mwh]
HourlySeries read_series_csv(std::istream& in);
HourlySeries read_series_csv(const std::string& path);
void write_series_csv(std::ostream& out, const HourlySeries& series);

struct FuelMix {
    std::map<std::string, double> shares;  // percent of total energy
    std::set<std::string> fast_fuels;
};

// {"shares": {"<fuel>": <percent>}, "fast_fuels": ["<fuel>", ...]}
FuelMix parse_fuel_mix(std::string_view json_text);
FuelMix read_fuel_mix(const std::string& path);

}  // namespace battpoa

#endif  // BATTPOA_SERIES_IO_HPP
