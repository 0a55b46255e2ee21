#ifndef BATTPOA_CALIBRATION_HPP
#define BATTPOA_CALIBRATION_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "battpoa/demand.hpp"
#include "battpoa/regimes.hpp"
#include "battpoa/series_io.hpp"

namespace battpoa {

// Which records feed the supply-curve regression.
enum class LadPool { all_hours, model_hours };

struct CalibrationConfig {
    int peak_hour = 19;
    int offpeak_hour = 12;
    std::size_t bin_count = EmpiricalJointDemand::kDefaultBins;
    LadPool lad_pool = LadPool::all_hours;
};

// Throws std::invalid_argument if hours are out of range or equal.
void validate(const CalibrationConfig& cfg);

struct SupplyFit {
    double alpha = 0.0;
    double beta = 0.0;
    bool converged = false;
    int iterations = 0;
    double l1_loss = 0.0;
    std::vector<std::string> warnings;
};

// Least-absolute-deviations line price = alpha + beta * demand.
//
// Iteratively reweighted least squares from the least-squares start, with
// residuals floored at 1e-6 times the mean absolute price and a 200
// iteration cap. The IRLS point is then polished to the best line through
// two of the closest observations; among equal losses the smallest beta,
// then the smallest alpha, wins.
SupplyFit fit_lad(std::span<const double> demand, std::span<const double> price);

// Pools records carrying a price; `hours` restricts to those clock hours.
SupplyFit fit_supply_curve(const HourlySeries& series,
                           std::span<const int> hours = {});

// Share of fast conventional energy among all listed conventional fuels.
double estimate_kf(const FuelMix& mix);

struct MomentEstimate {
    DemandMoments moments;  // rho_s set to |rho| (normal assumption)
    EmpiricalJointDemand empirical;
    std::size_t days = 0;
};

// Daily (peak-hour, off-peak-hour) net demand pairs. An hour's demand is the
// mean of the records in that clock hour of the local day.
std::vector<DemandPair> daily_pairs(const HourlySeries& series, const CalibrationConfig& cfg,
                                    std::optional<int> quarter = std::nullopt);

// quarter in 1..4 (calendar quarters of local time).
MomentEstimate estimate_moments(const HourlySeries& series, const CalibrationConfig& cfg,
                                int quarter);

// Mean net demand by local clock hour. Throws if any hour is missing.
std::array<double, 24> hourly_means(const HourlySeries& series);

// (hour of max mean, hour of min mean), ties to the earlier hour.
std::pair<int, int> detect_peak_hours(const HourlySeries& series);

struct SupplyOverrides {
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> k_f;
};

struct QuarterResult {
    int quarter = 0;
    std::size_t days = 0;
    DemandMoments moments;
    RegimeReport report;
};

struct CalibrationResult {
    double alpha = 0.0;  // as fitted or overridden
    double beta = 0.0;
    double k_f = 0.0;
    bool supply_fitted = false;
    bool lad_converged = false;
    int peak_hour = 0;
    int offpeak_hour = 0;
    std::vector<QuarterResult> quarters;
    std::optional<double> annual_poa;  // mean of the defined quarterly values
    std::vector<std::string> warnings;
};

// Runs the full pipeline for every calendar quarter present in the data.
CalibrationResult quarterly_report(const HourlySeries& series, const FuelMix& mix,
                                   const CalibrationConfig& cfg,
                                   const SupplyOverrides& overrides = {});

}  // namespace battpoa

#endif  // BATTPOA_CALIBRATION_HPP
