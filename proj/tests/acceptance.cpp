// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "battpoa/calibration.hpp"
#include "battpoa/oracle.hpp"
#include "battpoa/regimes.hpp"
#include "battpoa/synth.hpp"

using namespace battpoa;

namespace {

// Tolerances.
constexpr double kScheduleRel = 1e-6;
constexpr double kCostRel = 1e-8;
constexpr double kFoc = 1e-10;
constexpr double kOracleSeconds = 30.0;
constexpr double kMonteCarloSeconds = 60.0;
constexpr std::size_t kSamples = 1'000'000;
constexpr double kSigmas = 4.0;
constexpr double kTable1 = 1e-12;
constexpr double kBoundSlack = 1e-9;
constexpr double kNineEighths = 1e-12;
constexpr double kSlowLimit = 0.005;
constexpr double kMeanDominated = 1e-3;
constexpr double kSupplyRel = 0.02;
constexpr double kMomentSe = 3.0;
constexpr double kQuarterSpread = 0.01;
constexpr std::uint64_t kSeed = 20230701;

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<FixtureComparison> comparisons;

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto fixtures = random_fixtures(kSeed, 100);
    double sched = 0, cost = 0;
    for (const auto& f : fixtures) {
        const auto c = compare_closed_form(f, 16);
        comparisons.push_back(c);
        sched = std::max({sched, c.schedule_rel_cn, c.schedule_rel_dcn});
        cost = std::max({cost, c.cost_rel_cn, c.cost_rel_dcn});
    }
    const double secs = seconds_since(t0);
    const bool ok = sched <= kScheduleRel && cost <= kCostRel && secs < kOracleSeconds;
    report(1, ok, fmt("schedule rel %.3e, cost rel %.3e over 100 fixtures, %.2f s", sched, cost, secs));
}

void criterion_2() {
    double cn = 0, dcn = 0;
    for (const auto& c : comparisons) {
        cn = std::max(cn, c.foc_cn);
        dcn = std::max(dcn, c.foc_dcn);
    }
    report(2, !comparisons.empty() && cn < kFoc && dcn < kFoc,
           fmt("max FOC residual centralized %.3e MW, decentralized %.3e MW", cn, dcn));
}

void criterion_3() {
    const auto t0 = std::chrono::steady_clock::now();
    const SupplyCurve curve(1, 2, 0.5);
    const JointDemand dist{NormalJointDemand(3, 1, 1, 1, 0.5)};
    const auto cost = monte_carlo_cost(curve, DispatchSchedule::idle(), dist, kSamples, kSeed);
    const auto profit = monte_carlo_profit(curve, centralized_schedule(dist), dist, kSamples, kSeed + 1);
    const double z_cost = std::abs(cost.mean - 18.0) / cost.std_error;
    const double z_profit = std::abs(profit.mean) / profit.std_error;
    const double secs = seconds_since(t0);
    report(3, z_cost <= kSigmas && z_profit <= kSigmas && secs < kMonteCarloSeconds,
           fmt("no-battery cost %.5f (z %.2f), centralized profit z %.2f, %.2f s", cost.mean, z_cost,
               z_profit, secs));
}

void criterion_4() {
    const auto d0 = distortion_metrics(0.0);
    const auto d1 = distortion_metrics(1.0);
    bool ok = d0.withhold_qty == 0.5 && d0.shift_da_rt == 0.0 && d0.resp_reduction == 0.5 &&
              d1.withhold_qty == 1.0 / 3.0 && d1.shift_da_rt == 0.5 && d1.resp_reduction == 0.5;

    // Decentralized totals from the schedules, Delta mu = 6. The slow limit is
    // approached with the smallest admissible k_f.
    const DemandMoments m{6, 0, 0, 0, 0, 0};
    auto total = [&](double k) {
        const auto s = decentralized_schedule(SupplyCurve(0, 1, k), m);
        return s.z1_da + s.z1_rt.offset;
    };
    const double slow = total(1e-14), fast = total(1.0);
    const auto cn = centralized_schedule(m);
    ok = ok && std::abs(slow - 6.0 / 4.0) <= kTable1 && std::abs(fast - 6.0 / 3.0) <= kTable1 &&
         std::abs(cn.z1_da + cn.z1_rt.offset - 3.0) <= kTable1;
    report(4, ok, fmt("DCN total / dmu: k_f->0 %.15f, k_f=1 %.15f", slow / 6, fast / 6));
}

void criterion_5() {
    const int n = 50;
    const double beta = 0.01, sigma2 = 1000.0, rho = 0.5;
    double lo = 10, hi = 0;
    int points = 0;
    bool ordered = true, defined = true;
    double worst_98 = 0;
    double slow_limit = 0;
    for (int i = 0; i < n; ++i) {
        const double k = 0.01 + (1.0 - 0.01) * i / (n - 1);
        const SupplyCurve curve(5.0, beta, k);
        for (int a = 0; a < n; ++a) {
            const double M = 1e8 * a / (n - 1);
            for (int b = 0; b < n; ++b) {
                const double V = 1e8 * b / (n - 1);
                if (M == 0 && V == 0) continue;
                // Delta mu = sqrt(M); sigma1 - rho sigma2 = sqrt(V).
                const DemandMoments m{30000.0, 30000.0 - std::sqrt(M), std::sqrt(V) + rho * sigma2, sigma2,
                                      rho, rho};
                const auto r = regime_report(curve, m);
                ++points;
                if (!r.poa) {
                    defined = false;
                    continue;
                }
                lo = std::min(lo, *r.poa);
                hi = std::max(hi, *r.poa);
                const double slack = 1e-12 * r.cost_nb;
                if (!(r.cost_nb + slack >= r.cost_dcn && r.cost_dcn + slack >= r.cost_cn)) ordered = false;
                if (b == 0 && i == n - 1) worst_98 = std::max(worst_98, std::abs(*r.poa - 9.0 / 8.0));
                if (b == 0 && i == 0 && a == n - 1) slow_limit = *r.poa;
            }
        }
    }
    const bool ok = defined && ordered && lo >= 9.0 / 8.0 - kBoundSlack && hi <= 4.0 / 3.0 + kBoundSlack &&
                    worst_98 <= kNineEighths && std::abs(slow_limit - 4.0 / 3.0) <= kSlowLimit;
    report(5, ok,
           fmt("%.0f points, PoA in [%.12f, %.12f], |PoA(k_f=1,V=0) - 9/8| %.1e", points, lo, hi, worst_98) +
               fmt(", PoA(k_f=0.01,V=0) %.6f", slow_limit) + (ordered ? ", costs ordered" : ", ORDER VIOLATED"));
}

void criterion_6() {
    const double la = estimate_kf(read_fuel_mix(BATTPOA_DATA_DIR "/fuel_mix_la.json"));
    const double hou = estimate_kf(read_fuel_mix(BATTPOA_DATA_DIR "/fuel_mix_houston.json"));
    const double la2 = std::round(la * 100) / 100, hou2 = std::round(hou * 100) / 100;
    report(6, la2 == 0.93 && hou2 == 0.66, fmt("LA %.4f -> %.2f, Houston %.4f -> %.2f", la, la2, hou, hou2));
}

void criterion_7() {
    const auto a = distortion_metrics(0.93), b = distortion_metrics(0.66);
    const bool ok = to_percent(a.withhold_qty) == 35 && to_percent(a.shift_da_rt) == 47 &&
                    to_percent(a.resp_reduction) == 50 && to_percent(b.withhold_qty) == 40 &&
                    to_percent(b.shift_da_rt) == 33 && to_percent(b.resp_reduction) == 50;
    char buf[128];
    std::snprintf(buf, sizeof buf, "k_f=0.93: %d%%/%d%%/%d%%, k_f=0.66: %d%%/%d%%/%d%%", to_percent(a.withhold_qty),
                  to_percent(a.shift_da_rt), to_percent(a.resp_reduction), to_percent(b.withhold_qty),
                  to_percent(b.shift_da_rt), to_percent(b.resp_reduction));
    report(7, ok, buf);
}

void criterion_8() {
    // (a) V = 0 isolates the mean term.
    const double k = 0.93;
    const DemandMoments mean_only{20000, 8000, 1200, 1500, 0.8, 0.8};
    const auto poa = price_of_anarchy(SupplyCurve(5, 0.01, k), mean_only);
    const double expected = (4 - k) * (4 - k) / (12 - 5 * k + k * k);
    const bool a_ok = poa && std::abs(*poa - expected) <= kMeanDominated && std::round(*poa * 100) / 100 == 1.15;

    // (b) any (M, V) at k_f = 0.66 lands in [1.221, 4/3].
    double lo = 10, hi = 0;
    const SupplyCurve hou(5, 0.01, 0.66);
    for (int a = 0; a <= 40; ++a)
        for (int b = 0; b <= 40; ++b) {
            if (a == 0 && b == 0) continue;
            const double M = std::pow(10.0, a / 5.0) - 1, V = std::pow(10.0, b / 5.0) - 1;
            const DemandMoments m{20000, 20000 - std::sqrt(M), std::sqrt(V), 0, 0, 0};
            const auto p = price_of_anarchy(hou, m);
            if (!p) continue;
            lo = std::min(lo, *p);
            hi = std::max(hi, *p);
        }
    const bool b_ok = lo >= 1.221 && hi <= 4.0 / 3.0 + kBoundSlack && lo <= 1.25 && hi >= 1.25;
    report(8, a_ok && b_ok,
           fmt("mean-dominated PoA %.6f vs %.6f; k_f=0.66 range [%.6f, %.6f]", poa.value_or(NAN), expected, lo,
               hi) +
               " (published quarterly values need unpublished moments; property checks substitute)");
}

void criterion_9() {
    const SynthConfig sc;  // seed 20230701, alpha 5, beta 0.01, rho 0.8
    const auto series = generate_synthetic_series(sc);
    const auto fit = fit_supply_curve(series);
    const double ea = std::abs(fit.alpha / sc.alpha - 1), eb = std::abs(fit.beta / sc.beta - 1);

    CalibrationConfig cc;
    cc.peak_hour = sc.peak_hour;
    cc.offpeak_hour = sc.offpeak_hour;
    const auto pairs = daily_pairs(series, cc);
    const auto m = EmpiricalJointDemand(pairs).moments();
    const double n = static_cast<double>(pairs.size());
    const double z_mu1 = std::abs(m.mu1 - sc.mu1) / (sc.sigma1 / std::sqrt(n));
    const double z_mu2 = std::abs(m.mu2 - sc.mu2) / (sc.sigma2 / std::sqrt(n));
    const double z_s1 = std::abs(m.sigma1 - sc.sigma1) / (sc.sigma1 / std::sqrt(2 * n));
    const double z_s2 = std::abs(m.sigma2 - sc.sigma2) / (sc.sigma2 / std::sqrt(2 * n));
    const double z_rho = std::abs(m.rho - sc.rho) / ((1 - sc.rho * sc.rho) / std::sqrt(n));
    const double z = std::max({z_mu1, z_mu2, z_s1, z_s2, z_rho});

    const auto res = quarterly_report(series, read_fuel_mix(BATTPOA_DATA_DIR "/fuel_mix_la.json"), cc);
    double lo = 10, hi = 0;
    bool all = res.quarters.size() == 4;
    for (const auto& q : res.quarters) {
        if (!q.report.poa) {
            all = false;
            continue;
        }
        lo = std::min(lo, *q.report.poa);
        hi = std::max(hi, *q.report.poa);
    }
    const bool ok = ea <= kSupplyRel && eb <= kSupplyRel && z <= kMomentSe && all && hi - lo < kQuarterSpread;
    report(9, ok,
           fmt("alpha err %.2f%%, beta err %.3f%%, max moment z %.2f, ", 100 * ea, 100 * eb, z) +
               fmt("quarterly PoA spread %.5f", hi - lo));
}

void criterion_10() {
    int checks = 0, passed = 0;
    double worst = 0;
    int k = 0;
    for (double rho : {-0.5, 0.0, 0.8}) {
        const JointDemand dist{NormalJointDemand(3, 1, 1, 2, rho)};
        for (const auto& c : check_conditional_identities(dist, kSamples, kSeed + 2 + k)) {
            ++checks;
            if (c.passes(kSigmas)) ++passed;
            if (c.std_error > 0) worst = std::max(worst, std::abs(c.estimate - c.expected) / c.std_error);
        }
        ++k;
    }
    report(10, checks == 21 && passed == checks, fmt("%.0f/%.0f identity checks, max z %.2f", passed, checks, worst));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
