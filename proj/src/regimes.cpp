#include "battpoa/regimes.hpp"

#include <cmath>
#include <stdexcept>

namespace battpoa {

double cost_no_battery(const SupplyCurve& curve, const DemandMoments& m) {
    const double a = curve.alpha(), b = curve.beta(), kf = curve.k_f();
    return a * (m.mu1 + m.mu2) + b * ((m.mu1 * m.mu1 + m.mu2 * m.mu2) / 2.0 +
                                      (m.sigma1 * m.sigma1 + m.sigma2 * m.sigma2) / (2.0 * kf));
}

DispatchSchedule centralized_schedule(const DemandMoments& m) {
    DispatchSchedule s;
    s.z1_da = m.delta_mu() / 2.0;
    s.z1_rt = RtPolicy{0.0, 0.5, -0.5, m.mu1, m.mu2};
    return s;
}

DispatchSchedule centralized_schedule(const JointDemand& dist) {
    return centralized_schedule(moments(dist));
}

double cost_centralized(const SupplyCurve& curve, const DemandMoments& m) {
    const double a = curve.alpha(), b = curve.beta(), kf = curve.k_f();
    const double total = m.mu1 + m.mu2;
    const double s1 = m.sigma1, s2 = m.sigma2;
    return a * total + b / 4.0 * total * total +
           b / (4.0 * kf) *
               (s1 * s1 + (2.0 - m.rho_s * m.rho_s) * s2 * s2 + 2.0 * m.rho * s1 * s2);
}

DispatchSchedule decentralized_schedule(const SupplyCurve& curve, const DemandMoments& m) {
    const double kf = curve.k_f();
    const double dmu = m.delta_mu();
    DispatchSchedule s;
    s.z1_da = (2.0 - kf) / (2.0 * (4.0 - kf)) * dmu;
    s.z1_rt = RtPolicy{kf / (2.0 * (4.0 - kf)) * dmu, 0.25, -0.25, m.mu1, m.mu2};
    return s;
}

DispatchSchedule decentralized_schedule(const SupplyCurve& curve, const JointDemand& dist) {
    return decentralized_schedule(curve, moments(dist));
}

double cost_decentralized(const SupplyCurve& curve, const DemandMoments& m) {
    const double a = curve.alpha(), b = curve.beta(), kf = curve.k_f();
    const double den = (4.0 - kf) * (4.0 - kf);
    const double s1 = m.sigma1, s2 = m.sigma2;
    const double square_coef = (20.0 - 11.0 * kf + kf * kf) / (4.0 * den);
    const double cross_coef = (12.0 - 5.0 * kf + kf * kf) / (2.0 * den);
    const double var_term =
        (5.0 * s1 * s1 + (8.0 - 3.0 * m.rho_s * m.rho_s) * s2 * s2 + 6.0 * m.rho * s1 * s2) /
        (16.0 * kf);
    return a * (m.mu1 + m.mu2) +
           b * (square_coef * (m.mu1 * m.mu1 + m.mu2 * m.mu2) + cross_coef * m.mu1 * m.mu2 +
                var_term);
}

DistortionMetrics distortion_metrics(double k_f) {
    if (!(k_f >= 0.0 && k_f <= 1.0))
        throw std::invalid_argument("k_f must lie in [0, 1] for distortion metrics");
    return {(2.0 - k_f) / (4.0 - k_f), k_f / 2.0, 0.5};
}

int to_percent(double fraction) {
    return static_cast<int>(std::floor(fraction * 100.0 + 0.5 + 1e-9));
}

namespace {

// Mean-gap multiplier of the decentralized cost reduction.
double dcn_mean_coef(double kf) {
    return (12.0 - 5.0 * kf + kf * kf) / (4.0 * (4.0 - kf) * (4.0 - kf));
}

}  // namespace

CostGaps cost_gaps_general(const SupplyCurve& curve, const DemandMoments& m) {
    const double b = curve.beta(), kf = curve.k_f();
    const double dmu2 = m.delta_mu() * m.delta_mu();
    const double lin = m.sigma1 - m.rho * m.sigma2;
    const double spread =
        lin * lin + (m.rho_s * m.rho_s - m.rho * m.rho) * m.sigma2 * m.sigma2;
    return {b / 4.0 * dmu2 + b / (4.0 * kf) * spread,
            b * dcn_mean_coef(kf) * dmu2 + 3.0 * b / (16.0 * kf) * spread};
}

CostGaps cost_gaps(const SupplyCurve& curve, const DemandMoments& m) {
    if (std::abs(m.rho_s - std::abs(m.rho)) > 1e-12)
        throw std::invalid_argument(
            "cost gap decomposition requires jointly normal moments (rho_s == |rho|)");
    return cost_gaps_general(curve, m);
}

std::optional<double> price_of_anarchy(const SupplyCurve& curve, const DemandMoments& m) {
    const auto gaps = cost_gaps_general(curve, m);
    const double scale =
        curve.beta() * (m.mu1 * m.mu1 + m.mu2 * m.mu2 +
                        (m.sigma1 * m.sigma1 + m.sigma2 * m.sigma2) / curve.k_f());
    if (!(scale > 0.0) || !(gaps.gap_dcn > 1e-13 * scale)) return std::nullopt;
    return gaps.gap_cn / gaps.gap_dcn;
}

RegimeReport regime_report(const SupplyCurve& curve, const DemandMoments& m) {
    RegimeReport r;
    r.cost_nb = cost_no_battery(curve, m);
    r.cost_cn = cost_centralized(curve, m);
    r.cost_dcn = cost_decentralized(curve, m);
    const auto gaps = cost_gaps_general(curve, m);
    r.gap_cn = gaps.gap_cn;
    r.gap_dcn = gaps.gap_dcn;
    r.poa = price_of_anarchy(curve, m);
    const auto d = distortion_metrics(curve.k_f());
    r.withhold_qty = d.withhold_qty;
    r.shift_da_rt = d.shift_da_rt;
    r.resp_reduction = d.resp_reduction;
    return r;
}

}  // namespace battpoa
