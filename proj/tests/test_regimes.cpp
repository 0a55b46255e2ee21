#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "battpoa/regimes.hpp"

using namespace battpoa;

namespace {

// Moments with M = dmu^2 and V = (sigma1 - rho sigma2)^2 under normality.
DemandMoments mv_moments(double M, double V) {
    return {std::sqrt(M), 0.0, std::sqrt(V), 0.0, 0.0, 0.0};
}

DemandMoments random_normal(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    DemandMoments m{1e3 * u(rng), 1e3 * u(rng), 100 * u(rng), 100 * u(rng), 2 * u(rng) - 1, 0};
    m.rho_s = std::abs(m.rho);
    return m;
}

}  // namespace

TEST_CASE("no-battery cost") {
    CHECK(cost_no_battery(SupplyCurve(0, 1, 1), {2, 0, 0, 0, 0, 0}) == 2.0);
    CHECK(cost_no_battery(SupplyCurve(1, 2, 0.5), {3, 1, 1, 1, 0.3, 0.3}) == doctest::Approx(18));
    const DemandMoments m{3, 1, 1, 1, 0, 0};
    CHECK(cost_no_battery(SupplyCurve(1, 2, 0.8), m) < cost_no_battery(SupplyCurve(1, 2, 0.4), m));
}

TEST_CASE("centralized schedule") {
    SUBCASE("equal means, independent demand") {
        const JointDemand d{NormalJointDemand(5, 5, 2, 1, 0)};
        const auto s = centralized_schedule(d);
        CHECK(s.z1_da == 0.0);
        for (double d1 : {1.0, 5.0, 8.0})
            CHECK(s.z1_rt(d1, conditional_moments(d, d1).mu2_given_d1) == doctest::Approx((d1 - 5) / 2));
    }
    SUBCASE("D2 = D1 discharges nothing in real time") {
        std::vector<DemandPair> pairs;
        for (int i = 0; i < 40; ++i) pairs.push_back({10.0 + i, 10.0 + i});
        const JointDemand d{EmpiricalJointDemand(pairs)};
        const auto s = centralized_schedule(d);
        for (const auto& p : pairs)
            CHECK(s.z1_rt(p.d1, conditional_moments(d, p.d1).mu2_given_d1) ==
                  doctest::Approx(0.0).scale(1.0));
    }
    SUBCASE("rho = 0.5 two sd above the mean") {
        const JointDemand d{NormalJointDemand(10, 4, 1, 1, 0.5)};
        const auto s = centralized_schedule(d);
        CHECK(s.z1_rt(12, conditional_moments(d, 12).mu2_given_d1) == doctest::Approx(0.5));
    }
    SUBCASE("equalizes net demands") {
        std::mt19937_64 rng(1);
        for (int i = 0; i < 50; ++i) {
            const auto m = random_normal(rng);
            const JointDemand d{NormalJointDemand(m)};
            const auto s = centralized_schedule(d);
            CHECK(m.mu1 - s.z1_da == doctest::Approx(m.mu2 + s.z1_da));
            for (double y : {-2.0, 0.0, 1.5}) {
                const double d1 = m.mu1 + y * m.sigma1;
                const double cm = conditional_moments(d, d1).mu2_given_d1;
                const double r = s.z1_rt(d1, cm);
                CHECK((d1 - m.mu1) - r == doctest::Approx((cm - m.mu2) + r).scale(1e3));
            }
        }
    }
}

TEST_CASE("closed-form costs") {
    CHECK(cost_centralized(SupplyCurve(2, 3, 0.5), {5, 1, 0, 0, 0, 0}) ==
          doctest::Approx(2 * 6 + 0.75 * 36));
    CHECK(cost_centralized(SupplyCurve(0, 1, 1), {4, 0, 1, 1, 0, 0}) == doctest::Approx(4.75));
    CHECK(cost_decentralized(SupplyCurve(0, 1, 1), {4, 0, 0, 0, 0, 0}) == doctest::Approx(40.0 / 9.0));
}

TEST_CASE("decentralized schedule") {
    SUBCASE("fast generators, delta mu = 6") {
        const SupplyCurve c(0, 1, 1);
        const auto s = decentralized_schedule(c, DemandMoments{6, 0, 0, 0, 0, 0});
        CHECK(s.z1_da == doctest::Approx(1.0));
        CHECK(s.z1_rt.offset == doctest::Approx(1.0));
    }
    SUBCASE("slow-generator limit, delta mu = 4") {
        const auto s = decentralized_schedule(SupplyCurve(0, 1, 0.01), DemandMoments{4, 0, 0, 0, 0, 0});
        CHECK(s.z1_da == doctest::Approx(1.99 * 4 / 7.98).epsilon(1e-14));
        CHECK(s.z1_rt.offset == doctest::Approx(0.01 * 4 / 7.98).epsilon(1e-14));
        const auto tiny = decentralized_schedule(SupplyCurve(0, 1, 1e-12), DemandMoments{4, 0, 0, 0, 0, 0});
        CHECK(tiny.z1_da == doctest::Approx(1.0).epsilon(1e-11));
        CHECK(tiny.z1_rt.offset == doctest::Approx(0.0).scale(1.0));
    }
    SUBCASE("random component is half the centralized one") {
        const JointDemand d{NormalJointDemand(30, 10, 3, 2, 0.4)};
        const auto cn = centralized_schedule(d);
        const auto dcn = decentralized_schedule(SupplyCurve(1, 1, 0.7), d);
        CHECK(dcn.z1_rt.d1_slope == doctest::Approx(cn.z1_rt.d1_slope / 2));
        CHECK(dcn.z1_rt.cond_slope == doctest::Approx(cn.z1_rt.cond_slope / 2));
    }
    SUBCASE("totals") {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(0, 1);
        for (int i = 0; i < 50; ++i) {
            const auto m = random_normal(rng);
            const double kf = 0.01 + 0.99 * u(rng);
            const auto s = decentralized_schedule(SupplyCurve(1, 1, kf), m);
            const double dmu = m.delta_mu();
            CHECK(s.z1_da + s.z1_rt.offset == doctest::Approx(dmu / (4 - kf)).scale(1.0));
            CHECK(s.z1_rt.offset == doctest::Approx(kf * dmu / (2 * (4 - kf))).scale(1.0));
        }
    }
}

TEST_CASE("distortion metrics") {
    const auto slow = distortion_metrics(0.0);
    CHECK(slow.withhold_qty == 0.5);
    CHECK(slow.shift_da_rt == 0.0);
    CHECK(slow.resp_reduction == 0.5);
    const auto fast = distortion_metrics(1.0);
    CHECK(fast.withhold_qty == 1.0 / 3.0);
    CHECK(fast.shift_da_rt == 0.5);
    CHECK(fast.resp_reduction == 0.5);

    const auto la = distortion_metrics(0.93);
    CHECK(la.withhold_qty == doctest::Approx(1.07 / 3.07));
    CHECK(la.shift_da_rt == doctest::Approx(0.465));
    CHECK(to_percent(la.withhold_qty) == 35);
    CHECK(to_percent(la.shift_da_rt) == 47);
    CHECK(to_percent(la.resp_reduction) == 50);

    const auto hou = distortion_metrics(0.66);
    CHECK(to_percent(hou.withhold_qty) == 40);
    CHECK(to_percent(hou.shift_da_rt) == 33);
    CHECK(to_percent(hou.resp_reduction) == 50);

    CHECK_THROWS_AS(distortion_metrics(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(distortion_metrics(1.1), std::invalid_argument);
}

TEST_CASE("cost gaps") {
    SUBCASE("equality case") {
        const DemandMoments m{7, 7, 1, 2, 0.5, 0.5};
        const auto g = cost_gaps(SupplyCurve(1, 1, 0.5), m);
        CHECK(g.gap_cn == doctest::Approx(0.0).scale(1.0));
        CHECK(g.gap_dcn == doctest::Approx(0.0).scale(1.0));
        CHECK_FALSE(price_of_anarchy(SupplyCurve(1, 1, 0.5), m).has_value());
        CHECK(cost_decentralized(SupplyCurve(1, 1, 0.5), m) ==
              doctest::Approx(cost_no_battery(SupplyCurve(1, 1, 0.5), m)));
        CHECK(cost_centralized(SupplyCurve(1, 1, 0.5), m) ==
              doctest::Approx(cost_no_battery(SupplyCurve(1, 1, 0.5), m)));
    }
    SUBCASE("gaps equal cost differences") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0, 1);
        for (int i = 0; i < 100; ++i) {
            const auto m = random_normal(rng);
            const SupplyCurve c(10 * u(rng), 0.01 + u(rng), 0.05 + 0.95 * u(rng));
            const auto g = cost_gaps(c, m);
            const double nb = cost_no_battery(c, m);
            CHECK(g.gap_cn == doctest::Approx(nb - cost_centralized(c, m)).epsilon(1e-9).scale(nb * 1e-3));
            CHECK(g.gap_dcn == doctest::Approx(nb - cost_decentralized(c, m)).epsilon(1e-9).scale(nb * 1e-3));
        }
    }
    SUBCASE("variance-only ratio is 4/3") {
        for (double kf : {0.05, 0.5, 1.0}) {
            const auto g = cost_gaps(SupplyCurve(0, 1, kf), DemandMoments{5, 5, 3, 1, 0.2, 0.2});
            CHECK(g.gap_cn / g.gap_dcn == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
        }
    }
    SUBCASE("non-normal moments are rejected") {
        CHECK_THROWS_AS(cost_gaps(SupplyCurve(0, 1, 1), DemandMoments{1, 0, 1, 1, 0.2, 0.5}),
                        std::invalid_argument);
        CHECK_NOTHROW(cost_gaps_general(SupplyCurve(0, 1, 1), DemandMoments{1, 0, 1, 1, 0.2, 0.5}));
    }
}

TEST_CASE("price of anarchy") {
    CHECK(*price_of_anarchy(SupplyCurve(0, 1, 1), DemandMoments{4, 0, 1, 2, 0.5, 0.5}) ==
          doctest::Approx(9.0 / 8.0).epsilon(1e-14));
    const double slow = *price_of_anarchy(SupplyCurve(0, 1, 1e-6), mv_moments(1, 0));
    CHECK(slow == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
    const double k = 0.93;
    CHECK(*price_of_anarchy(SupplyCurve(0, 1, k), mv_moments(1, 0)) ==
          doctest::Approx((4 - k) * (4 - k) / (12 - 5 * k + k * k)).epsilon(1e-13));
    CHECK(*price_of_anarchy(SupplyCurve(0, 1, k), mv_moments(1, 0)) == doctest::Approx(1.147).epsilon(1e-3));
    CHECK_FALSE(price_of_anarchy(SupplyCurve(0, 0, 1), mv_moments(1, 1)).has_value());
}

TEST_CASE("ordering and bounds over random normal fixtures") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 2000; ++i) {
        const auto m = random_normal(rng);
        const SupplyCurve c(10 * u(rng), 0.01 + u(rng), 0.01 + 0.99 * u(rng));
        const auto r = regime_report(c, m);
        const double slack = 1e-12 * r.cost_nb;
        CHECK(r.cost_nb >= r.cost_dcn - slack);
        CHECK(r.cost_dcn >= r.cost_cn - slack);
        if (r.poa) {
            CHECK(*r.poa >= 9.0 / 8.0 - 1e-9);
            CHECK(*r.poa <= 4.0 / 3.0 + 1e-9);
        }
    }
}

TEST_CASE("PoA monotonicity") {
    const double Vs[] = {0, 0.3, 1, 4, 20};
    const double Ms[] = {0, 0.3, 1, 4, 20};
    for (double kf : {0.1, 0.5, 0.93}) {
        const SupplyCurve c(0, 1, kf);
        for (double V : Vs) {
            double prev = HUGE_VAL;
            for (double M : Ms) {
                const auto p = price_of_anarchy(c, mv_moments(M, V));
                if (!p) continue;
                CHECK(*p <= prev + 1e-12);
                prev = *p;
            }
        }
        for (double M : Ms) {
            double prev = 0.0;
            for (double V : Vs) {
                const auto p = price_of_anarchy(c, mv_moments(M, V));
                if (!p) continue;
                CHECK(*p >= prev - 1e-12);
                prev = *p;
            }
        }
    }
    for (double M : {0.5, 2.0}) {
        double prev = HUGE_VAL;
        for (double kf = 0.01; kf <= 1.0; kf += 0.01) {
            const double p = *price_of_anarchy(SupplyCurve(0, 1, kf), mv_moments(M, 1));
            CHECK(p <= prev + 1e-12);
            prev = p;
        }
    }
}

TEST_CASE("report rounding helper") {
    CHECK(to_percent(0.465) == 47);
    CHECK(to_percent(1.0 / 3.0) == 33);
    CHECK(to_percent(0.5) == 50);
    CHECK(to_percent(0.0) == 0);
    CHECK(to_percent(0.1475) == 15);
}
