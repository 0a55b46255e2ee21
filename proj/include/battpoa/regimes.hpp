#ifndef BATTPOA_REGIMES_HPP
#define BATTPOA_REGIMES_HPP

#include <optional>

#include "battpoa/demand.hpp"
#include "battpoa/market.hpp"

namespace battpoa {

// Generation cost with no battery.
double cost_no_battery(const SupplyCurve& curve, const DemandMoments& m);

// Cost-minimizing schedule: equalizes day-ahead net demand and the
// expected real-time net demands of the two periods.
DispatchSchedule centralized_schedule(const JointDemand& dist);
DispatchSchedule centralized_schedule(const DemandMoments& m);
double cost_centralized(const SupplyCurve& curve, const DemandMoments& m);

// Profit-maximizing schedule of a price-setting battery.
DispatchSchedule decentralized_schedule(const SupplyCurve& curve, const JointDemand& dist);
DispatchSchedule decentralized_schedule(const SupplyCurve& curve, const DemandMoments& m);
double cost_decentralized(const SupplyCurve& curve, const DemandMoments& m);

struct DistortionMetrics {
    double withhold_qty = 0.0;    // 1 - total DCN discharge / total CN discharge
    double shift_da_rt = 0.0;     // share of DCN expected discharge moved to real time
    double resp_reduction = 0.0;  // shrinkage of the real-time shock response
};

// k_f in [0, 1]; k_f = 0 is the slow-generator limit.
DistortionMetrics distortion_metrics(double k_f);

// Whole-percent rounding used in report tables (0.465 -> 47).
int to_percent(double fraction);

struct CostGaps {
    double gap_cn = 0.0;   // Cost(NB) - Cost(CN)
    double gap_dcn = 0.0;  // Cost(NB) - Cost(DCN)
};

// Mean/variance decomposition of the cost reductions. Requires normal
// moments (rho_s == |rho|); throws std::invalid_argument otherwise.
CostGaps cost_gaps(const SupplyCurve& curve, const DemandMoments& m);

// Same decomposition for any distribution, with (sigma1 - rho sigma2)^2
// replaced by E[((D1 - mu1) - (mu_{2|D1} - mu2))^2].
CostGaps cost_gaps_general(const SupplyCurve& curve, const DemandMoments& m);

// (Cost(NB) - Cost(CN)) / (Cost(NB) - Cost(DCN)); empty when the
// decentralized cost reduction vanishes.
std::optional<double> price_of_anarchy(const SupplyCurve& curve, const DemandMoments& m);

struct RegimeReport {
    double cost_nb = 0.0;
    double cost_cn = 0.0;
    double cost_dcn = 0.0;
    double gap_cn = 0.0;
    double gap_dcn = 0.0;
    std::optional<double> poa;
    double withhold_qty = 0.0;
    double shift_da_rt = 0.0;
    double resp_reduction = 0.0;
};

RegimeReport regime_report(const SupplyCurve& curve, const DemandMoments& m);

}  // namespace battpoa

#endif  // BATTPOA_REGIMES_HPP
