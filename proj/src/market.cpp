#include "battpoa/market.hpp"

#include <cmath>
#include <stdexcept>

namespace battpoa {

SupplyCurve::SupplyCurve(double alpha, double beta, double k_f)
    : alpha_(alpha), beta_(beta), k_f_(k_f) {
    if (!std::isfinite(alpha) || alpha < 0.0)
        throw std::invalid_argument("supply curve intercept alpha must be finite and >= 0");
    if (!std::isfinite(beta) || beta < 0.0)
        throw std::invalid_argument("supply curve slope beta must be finite and >= 0");
    if (!std::isfinite(k_f) || k_f <= 0.0 || k_f > 1.0)
        throw std::invalid_argument("fast-generator share k_f must lie in (0, 1]");
}

MarketOutcome outcome(const SupplyCurve& curve, double z1_da, double z1_rt, double mu1, double mu2,
                      double d1, double d2) {
    MarketOutcome o;
    o.d1_da = mu1 - z1_da;
    o.d2_da = mu2 + z1_da;
    o.d1_rt = d1 - mu1 - z1_rt;
    o.d2_rt = d2 - mu2 + z1_rt;
    o.dtilde1_da = o.d1_da;
    o.dtilde2_da = o.d2_da;
    o.dtilde1_rt = o.d1_da + o.d1_rt / curve.k_f();
    o.dtilde2_rt = o.d2_da + o.d2_rt / curve.k_f();
    o.lambda1_da = curve.price(o.dtilde1_da);
    o.lambda2_da = curve.price(o.dtilde2_da);
    o.lambda1_rt = curve.price(o.dtilde1_rt);
    o.lambda2_rt = curve.price(o.dtilde2_rt);
    return o;
}

MarketOutcome outcome(const SupplyCurve& curve, const DispatchSchedule& schedule,
                      const JointDemand& dist, double d1, double d2) {
    const auto m = moments(dist);
    const double z_rt = schedule.z1_rt(d1, conditional_moments(dist, d1).mu2_given_d1);
    return outcome(curve, schedule.z1_da, z_rt, m.mu1, m.mu2, d1, d2);
}

namespace {

double stage_cost(const SupplyCurve& c, double q) {
    return c.alpha() * q + 0.5 * c.beta() * q * q;
}

// c0 + cy (D1 - mu1) + cm (mu_{2|D1} - mu2) + cx (D2 - mu2)
struct ShockAffine {
    double c0 = 0.0, cy = 0.0, cm = 0.0, cx = 0.0;
};

// E[a b] from the conditional identities:
// Var(D1) = s1^2, Var(M) = Cov(M, D2) = rho_s^2 s2^2, Cov(D1, M) = Cov(D1, D2) = rho s1 s2.
double expect_product(const ShockAffine& a, const ShockAffine& b, const DemandMoments& m) {
    const double vy = m.sigma1 * m.sigma1;
    const double vx = m.sigma2 * m.sigma2;
    const double vm = m.rho_s * m.rho_s * vx;
    const double cyx = m.rho * m.sigma1 * m.sigma2;
    return a.c0 * b.c0 + a.cy * b.cy * vy + a.cm * b.cm * vm + a.cx * b.cx * vx +
           (a.cy * b.cm + a.cm * b.cy) * cyx + (a.cy * b.cx + a.cx * b.cy) * cyx +
           (a.cm * b.cx + a.cx * b.cm) * vm;
}

struct ModifiedRtDemands {
    ShockAffine first, second;
};

ModifiedRtDemands modified_rt(const SupplyCurve& c, const DispatchSchedule& s,
                              const DemandMoments& m) {
    const auto& p = s.z1_rt;
    // Re-express the policy around the distribution's own means.
    const double a = p.offset + p.d1_slope * (m.mu1 - p.mu1) + p.cond_slope * (m.mu2 - p.mu2);
    const double inv = 1.0 / c.k_f();
    ModifiedRtDemands out;
    out.first = {m.mu1 - s.z1_da - a * inv, (1.0 - p.d1_slope) * inv, -p.cond_slope * inv, 0.0};
    out.second = {m.mu2 + s.z1_da + a * inv, p.d1_slope * inv, p.cond_slope * inv, inv};
    return out;
}

}  // namespace

double realized_cost(const SupplyCurve& curve, const MarketOutcome& o) {
    return curve.k_s() * (stage_cost(curve, o.dtilde1_da) + stage_cost(curve, o.dtilde2_da)) +
           curve.k_f() * (stage_cost(curve, o.dtilde1_rt) + stage_cost(curve, o.dtilde2_rt));
}

double realized_profit(const MarketOutcome& o, double z1_da, double z1_rt) {
    return (o.lambda1_da - o.lambda2_da) * z1_da + (o.lambda1_rt - o.lambda2_rt) * z1_rt;
}

double generation_cost(const SupplyCurve& curve, const DispatchSchedule& schedule,
                       const JointDemand& dist) {
    if (const auto* emp = std::get_if<EmpiricalJointDemand>(&dist)) {
        const auto& m = emp->moments();
        const auto pairs = emp->pairs();
        const auto fitted = emp->fitted_conditional_means();
        double sum = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double z_rt = schedule.z1_rt(pairs[i].d1, fitted[i]);
            sum += realized_cost(curve, outcome(curve, schedule.z1_da, z_rt, m.mu1, m.mu2,
                                                pairs[i].d1, pairs[i].d2));
        }
        return sum / static_cast<double>(pairs.size());
    }

    const auto& m = std::get<NormalJointDemand>(dist).moments();
    const auto rt = modified_rt(curve, schedule, m);
    const double da1 = m.mu1 - schedule.z1_da;
    const double da2 = m.mu2 + schedule.z1_da;
    auto expected_stage = [&](const ShockAffine& q) {
        return curve.alpha() * q.c0 + 0.5 * curve.beta() * expect_product(q, q, m);
    };
    return curve.k_s() * (stage_cost(curve, da1) + stage_cost(curve, da2)) +
           curve.k_f() * (expected_stage(rt.first) + expected_stage(rt.second));
}

double battery_profit(const SupplyCurve& curve, const DispatchSchedule& schedule,
                      const JointDemand& dist) {
    if (const auto* emp = std::get_if<EmpiricalJointDemand>(&dist)) {
        const auto& m = emp->moments();
        const auto pairs = emp->pairs();
        const auto fitted = emp->fitted_conditional_means();
        double sum = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double z_rt = schedule.z1_rt(pairs[i].d1, fitted[i]);
            sum += realized_profit(outcome(curve, schedule.z1_da, z_rt, m.mu1, m.mu2,
                                           pairs[i].d1, pairs[i].d2),
                                   schedule.z1_da, z_rt);
        }
        return sum / static_cast<double>(pairs.size());
    }

    const auto& m = std::get<NormalJointDemand>(dist).moments();
    const auto rt = modified_rt(curve, schedule, m);
    const double da_spread = curve.beta() * ((m.mu1 - schedule.z1_da) - (m.mu2 + schedule.z1_da));
    const auto& p = schedule.z1_rt;
    const double a = p.offset + p.d1_slope * (m.mu1 - p.mu1) + p.cond_slope * (m.mu2 - p.mu2);
    const ShockAffine spread{curve.beta() * (rt.first.c0 - rt.second.c0),
                             curve.beta() * (rt.first.cy - rt.second.cy),
                             curve.beta() * (rt.first.cm - rt.second.cm),
                             curve.beta() * (rt.first.cx - rt.second.cx)};
    const ShockAffine discharge{a, p.d1_slope, p.cond_slope, 0.0};
    return da_spread * schedule.z1_da + expect_product(spread, discharge, m);
}

}  // namespace battpoa
