#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "battpoa/calibration.hpp"
#include "battpoa/synth.hpp"

using namespace battpoa;

namespace {

// Records at the two model hours only, one pair per day starting on `first`.
void add_days(std::vector<HourlyRecord>& out, std::int64_t first, const std::vector<DemandPair>& days,
              int peak = 19, int off = 12) {
    for (std::size_t i = 0; i < days.size(); ++i) {
        const auto day = first + static_cast<std::int64_t>(i);
        HourlyRecord a{timestamp_from_local(day, off, 0), days[i].d2, std::nullopt};
        HourlyRecord b{timestamp_from_local(day, peak, 0), days[i].d1, std::nullopt};
        if (off < peak) {
            out.push_back(a);
            out.push_back(b);
        } else {
            out.push_back(b);
            out.push_back(a);
        }
    }
}

FuelMix all_fast(double share = 1.0) {
    FuelMix m;
    m.shares["gas"] = share;
    m.fast_fuels.insert("gas");
    return m;
}

}  // namespace

TEST_CASE("LAD fit") {
    std::vector<double> x, y;
    for (int i = 0; i < 200; ++i) {
        x.push_back(8000 + 70.0 * i);
        y.push_back(5 + 0.01 * x.back());
    }
    SUBCASE("exact line") {
        const auto f = fit_lad(x, y);
        CHECK(f.alpha == doctest::Approx(5).epsilon(1e-9));
        CHECK(f.beta == doctest::Approx(0.01).epsilon(1e-12));
        CHECK(f.l1_loss == doctest::Approx(0).scale(1e-6));
    }
    SUBCASE("one extreme outlier") {
        y[57] += 1e5;
        const auto f = fit_lad(x, y);
        CHECK(f.alpha == doctest::Approx(5).epsilon(1e-9));
        CHECK(f.beta == doctest::Approx(0.01).epsilon(1e-12));
    }
    SUBCASE("degenerate inputs") {
        CHECK_THROWS_AS(fit_lad(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
        CHECK_THROWS_AS(fit_lad(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}),
                        std::invalid_argument);
    }
}

TEST_CASE("LAD fit under Laplace noise") {
    std::mt19937_64 rng(2023);
    std::uniform_real_distribution<double> u(5000, 25000);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> x, y;
    for (int i = 0; i < 10'000; ++i) {
        x.push_back(u(rng));
        y.push_back(5 + 0.01 * x.back() + e(rng) - e(rng));
    }
    const auto f = fit_lad(x, y);
    CHECK(f.converged);
    CHECK(std::abs(f.alpha / 5 - 1) < 0.02);
    CHECK(std::abs(f.beta / 0.01 - 1) < 0.02);

    SUBCASE("equivariance") {
        std::vector<double> xs, yp;
        for (std::size_t i = 0; i < x.size(); ++i) {
            xs.push_back(2.5 * x[i]);
            yp.push_back(y[i] + 7.0);
        }
        const auto scaled = fit_lad(xs, y);
        CHECK(scaled.beta == doctest::Approx(f.beta / 2.5).epsilon(1e-6));
        CHECK(scaled.alpha == doctest::Approx(f.alpha).epsilon(1e-6));
        const auto shifted = fit_lad(x, yp);
        CHECK(shifted.alpha == doctest::Approx(f.alpha + 7).epsilon(1e-6));
        CHECK(shifted.beta == doctest::Approx(f.beta).epsilon(1e-6));
    }
}

TEST_CASE("fast share") {
    FuelMix la;
    la.shares = {{"natural_gas", 56.5}, {"large_hydro", 10.2}, {"nuclear", 4.9}};
    la.fast_fuels = {"natural_gas", "large_hydro"};
    CHECK(std::round(estimate_kf(la) * 100) / 100 == 0.93);

    FuelMix hou;
    hou.shares = {{"cc_gas", 37}, {"gas", 8}, {"nuclear", 9}, {"coal", 14}};
    hou.fast_fuels = {"cc_gas", "gas"};
    CHECK(std::round(estimate_kf(hou) * 100) / 100 == 0.66);

    CHECK(estimate_kf(all_fast()) == 1.0);

    FuelMix scaled = hou;
    for (auto& [k, v] : scaled.shares) v *= 3.7;
    CHECK(estimate_kf(scaled) == doctest::Approx(estimate_kf(hou)).epsilon(1e-15));

    FuelMix slow;
    slow.shares = {{"coal", 1}};
    CHECK_THROWS_AS(estimate_kf(slow), std::invalid_argument);
    CHECK_THROWS_AS(estimate_kf(FuelMix{}), std::invalid_argument);
}

TEST_CASE("bundled fuel-mix files") {
    CHECK(std::round(estimate_kf(read_fuel_mix(BATTPOA_DATA_DIR "/fuel_mix_la.json")) * 100) / 100 == 0.93);
    CHECK(std::round(estimate_kf(read_fuel_mix(BATTPOA_DATA_DIR "/fuel_mix_houston.json")) * 100) / 100 ==
          0.66);
}

TEST_CASE("daily pairs average within the clock hour") {
    std::vector<HourlyRecord> r;
    const auto day = days_from_civil(2023, 4, 3);
    auto at = [&](int h, int m, double v) {
        Timestamp t = timestamp_from_local(day, h, -300);
        t.minute = m;
        r.push_back({t, v, std::nullopt});
    };
    at(12, 0, 10);
    at(12, 30, 20);
    at(13, 0, 99);
    at(19, 0, 50);
    at(19, 45, 54);
    const auto pairs = daily_pairs(HourlySeries(r), CalibrationConfig{});
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].d1 == 52);
    CHECK(pairs[0].d2 == 15);
}

TEST_CASE("moment estimation") {
    SUBCASE("constant series") {
        std::vector<HourlyRecord> r;
        add_days(r, days_from_civil(2023, 1, 1), std::vector<DemandPair>(30, {100, 40}));
        const auto est = estimate_moments(HourlySeries(r), CalibrationConfig{}, 1);
        CHECK(est.moments.sigma1 == 0.0);
        CHECK(est.moments.sigma2 == 0.0);
        CHECK(est.moments.rho == 0.0);
        CHECK(est.days == 30);
    }
    SUBCASE("off-peak is the peak shifted by a constant") {
        std::vector<DemandPair> days;
        for (int i = 0; i < 40; ++i) days.push_back({1000.0 + 13 * (i % 17), 1000.0 + 13 * (i % 17) - 600});
        std::vector<HourlyRecord> r;
        add_days(r, days_from_civil(2023, 1, 1), days);
        const auto est = estimate_moments(HourlySeries(r), CalibrationConfig{}, 1);
        CHECK(est.moments.rho == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(est.moments.rho_s == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("bivariate normal days recover the generator") {
        SynthConfig sc;
        sc.days = 90;
        const auto est = estimate_moments(generate_synthetic_series(sc), CalibrationConfig{}, 1);
        const double n = static_cast<double>(est.days);
        CHECK(est.days == 90);
        CHECK(std::abs(est.moments.mu1 - sc.mu1) < 3 * sc.sigma1 / std::sqrt(n));
        CHECK(std::abs(est.moments.mu2 - sc.mu2) < 3 * sc.sigma2 / std::sqrt(n));
        CHECK(std::abs(est.moments.sigma1 - sc.sigma1) < 3 * sc.sigma1 / std::sqrt(2 * n));
        CHECK(std::abs(est.moments.sigma2 - sc.sigma2) < 3 * sc.sigma2 / std::sqrt(2 * n));
        CHECK(std::abs(est.moments.rho - sc.rho) < 3 * (1 - sc.rho * sc.rho) / std::sqrt(n));
    }
    SUBCASE("too few days") {
        std::vector<HourlyRecord> r;
        add_days(r, days_from_civil(2023, 1, 1), {{1, 2}});
        CHECK_THROWS_AS(estimate_moments(HourlySeries(r), CalibrationConfig{}, 1), std::invalid_argument);
        CHECK_THROWS_AS(estimate_moments(HourlySeries(r), CalibrationConfig{}, 5), std::invalid_argument);
    }
}

TEST_CASE("peak detection") {
    SynthConfig sc;
    sc.days = 30;
    CHECK(detect_peak_hours(generate_synthetic_series(sc)) == std::pair{19, 12});
    sc.offpeak_hour = 9;
    CHECK(detect_peak_hours(generate_synthetic_series(sc)) == std::pair{19, 9});

    std::vector<HourlyRecord> flat;
    for (int h = 0; h < 48; ++h) flat.push_back({timestamp_from_local(19000 + h / 24, h % 24, 0), 5.0, {}});
    CHECK_THROWS_AS(detect_peak_hours(HourlySeries(flat)), std::invalid_argument);

    std::vector<HourlyRecord> gap(flat.begin(), flat.begin() + 23);
    gap.push_back({timestamp_from_local(19001, 0, 0), 1.0, {}});
    CHECK_THROWS_AS(hourly_means(HourlySeries(gap)), std::invalid_argument);
}

TEST_CASE("calibration config validation") {
    CalibrationConfig c;
    c.peak_hour = 12;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c.peak_hour = 24;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c.peak_hour = 19;
    c.bin_count = 0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("quarterly report") {
    SUBCASE("identical quarters give identical PoA") {
        std::mt19937_64 rng(8);
        std::normal_distribution<double> z;
        std::vector<DemandPair> days;
        for (int i = 0; i < 90; ++i) {
            const double a = z(rng), b = z(rng);
            days.push_back({20000 + 1500 * a, 8000 + 1200 * (0.5 * a + 0.8 * b)});
        }
        std::vector<HourlyRecord> r;
        for (int m : {1, 4, 7, 10}) add_days(r, days_from_civil(2023, m, 1), days);
        const auto res = quarterly_report(HourlySeries(r), all_fast(), CalibrationConfig{}, {1.0, 0.01, 0.93});
        REQUIRE(res.quarters.size() == 4);
        for (const auto& q : res.quarters) {
            REQUIRE(q.report.poa.has_value());
            CHECK(*q.report.poa == doctest::Approx(*res.quarters[0].report.poa).epsilon(1e-12));
        }
        CHECK(*res.annual_poa == doctest::Approx(*res.quarters[0].report.poa).epsilon(1e-12));
        CHECK_FALSE(res.supply_fitted);
        CHECK(res.k_f == 0.93);
    }
    SUBCASE("mean-dominated data, k_f = 0.93") {
        std::vector<DemandPair> days;
        for (int i = 0; i < 60; ++i) days.push_back({20000.0 + 37 * (i % 11), 8000.0 + 37 * (i % 11)});
        std::vector<HourlyRecord> r;
        for (int m : {1, 4, 7, 10}) add_days(r, days_from_civil(2023, m, 1), days);
        const auto res = quarterly_report(HourlySeries(r), all_fast(), CalibrationConfig{}, {0.0, 0.01, 0.93});
        const double k = 0.93;
        for (const auto& q : res.quarters)
            CHECK(*q.report.poa == doctest::Approx((4 - k) * (4 - k) / (12 - 5 * k + k * k)).epsilon(1e-9));
    }
    SUBCASE("synthetic data, k_f = 0.66") {
        SynthConfig sc;
        const auto res = quarterly_report(generate_synthetic_series(sc), all_fast(), CalibrationConfig{},
                                          {std::nullopt, std::nullopt, 0.66});
        CHECK(res.supply_fitted);
        for (const auto& q : res.quarters) {
            CHECK(*q.report.poa > 1.221);
            CHECK(*q.report.poa < 4.0 / 3.0);
        }
    }
    SUBCASE("negative fitted alpha warns and evaluates with zero") {
        SynthConfig sc;
        sc.days = 200;
        sc.alpha = -50;
        const auto res = quarterly_report(generate_synthetic_series(sc), all_fast(), CalibrationConfig{});
        CHECK(res.alpha < 0);
        CHECK_FALSE(res.warnings.empty());
        const auto& q = res.quarters[0];
        CHECK(q.report.cost_nb == doctest::Approx(cost_no_battery(SupplyCurve(0, res.beta, 1), q.moments)));
    }
    SUBCASE("no prices and no overrides") {
        SynthConfig sc;
        sc.days = 40;
        sc.prices = false;
        CHECK_THROWS_AS(quarterly_report(generate_synthetic_series(sc), all_fast(), CalibrationConfig{}),
                        std::invalid_argument);
        CHECK_NOTHROW(quarterly_report(generate_synthetic_series(sc), all_fast(), CalibrationConfig{},
                                       {5.0, 0.01, std::nullopt}));
    }
    SUBCASE("supply fit pooled over the model hours only") {
        SynthConfig sc;
        sc.days = 120;
        CalibrationConfig cc;
        cc.lad_pool = LadPool::model_hours;
        const auto res = quarterly_report(generate_synthetic_series(sc), all_fast(), cc);
        CHECK(std::abs(res.beta / 0.01 - 1) < 0.05);
    }
}
