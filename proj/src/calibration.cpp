#include "battpoa/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace battpoa {

void validate(const CalibrationConfig& cfg) {
    if (cfg.peak_hour < 0 || cfg.peak_hour > 23 || cfg.offpeak_hour < 0 || cfg.offpeak_hour > 23)
        throw std::invalid_argument("peak and off-peak hours must be in 0..23");
    if (cfg.peak_hour == cfg.offpeak_hour)
        throw std::invalid_argument("peak hour must differ from off-peak hour");
    if (cfg.bin_count < 1) throw std::invalid_argument("bin count must be >= 1");
}

namespace {

struct Line {
    double alpha = 0.0;
    double beta = 0.0;
};

double l1_loss(const Line& l, std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(y[i] - (l.alpha + l.beta * x[i]));
    return s;
}

// Weighted least squares; the design is centered for conditioning.
Line weighted_ls(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w) {
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - xbar;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (y[i] - ybar);
    }
    const double beta = sxx > 0.0 ? sxy / sxx : 0.0;
    return {ybar - beta * xbar, beta};
}

}  // namespace

SupplyFit fit_lad(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("demand and price lengths differ");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("supply-curve fit needs at least 2 priced records");
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    if (*xmin == *xmax)
        throw std::invalid_argument("supply-curve fit is degenerate: all demands are identical");

    double price_scale = 0.0;
    for (double v : y) price_scale += std::abs(v);
    price_scale /= static_cast<double>(n);
    if (price_scale == 0.0) price_scale = 1.0;
    const double eps = 1e-6 * price_scale;

    std::vector<double> w(n, 1.0);
    Line line = weighted_ls(x, y, w);
    SupplyFit fit;
    constexpr int kMaxIterations = 200;
    for (int it = 1; it <= kMaxIterations; ++it) {
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 1.0 / std::max(std::abs(y[i] - (line.alpha + line.beta * x[i])), eps);
        const Line next = weighted_ls(x, y, w);
        const double change = std::max(std::abs(next.alpha - line.alpha + (next.beta - line.beta) * *xmin),
                                        std::abs(next.alpha - line.alpha + (next.beta - line.beta) * *xmax));
        line = next;
        fit.iterations = it;
        if (change <= 1e-10 * price_scale) {
            fit.converged = true;
            break;
        }
    }

    // Polish to a vertex of the L1 problem: lines through two observations
    // among those closest to the IRLS line.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto resid = [&](std::size_t i) { return std::abs(y[i] - (line.alpha + line.beta * x[i])); };
    const std::size_t k = std::min<std::size_t>(n, 12);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double ra = resid(a), rb = resid(b);
                          return ra < rb || (ra == rb && a < b);
                      });

    Line best = line;
    double best_loss = l1_loss(line, x, y);
    const double tie = 1e-12 * price_scale * static_cast<double>(n);
    auto consider = [&](const Line& cand) {
        const double loss = l1_loss(cand, x, y);
        const bool better = loss < best_loss - tie;
        const bool tied = !better && loss <= best_loss + tie;
        if (better || (tied && (cand.beta < best.beta ||
                                (cand.beta == best.beta && cand.alpha < best.alpha)))) {
            best = cand;
            best_loss = std::min(loss, best_loss);
        }
    };
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            const std::size_t i = idx[a], j = idx[b];
            if (x[i] == x[j]) continue;
            const double beta = (y[j] - y[i]) / (x[j] - x[i]);
            consider({y[i] - beta * x[i], beta});
        }

    fit.alpha = best.alpha;
    fit.beta = best.beta;
    fit.l1_loss = best_loss;
    if (!fit.converged) fit.warnings.push_back("LAD iterations hit the 200-iteration cap");
    if (fit.alpha < 0.0) fit.warnings.push_back("fitted intercept alpha is negative");
    if (fit.beta < 0.0) fit.warnings.push_back("fitted slope beta is negative");
    return fit;
}

SupplyFit fit_supply_curve(const HourlySeries& series, std::span<const int> hours) {
    std::vector<double> x, y;
    for (const auto& r : series.records()) {
        if (!r.da_price) continue;
        if (!hours.empty() && std::find(hours.begin(), hours.end(), r.time.hour) == hours.end())
            continue;
        x.push_back(r.net_demand_mw);
        y.push_back(*r.da_price);
    }
    return fit_lad(x, y);
}

double estimate_kf(const FuelMix& mix) {
    double fast = 0.0, total = 0.0;
    for (const auto& [fuel, share] : mix.shares) {
        if (share < 0.0) throw std::invalid_argument("fuel shares must be >= 0");
        total += share;
        if (mix.fast_fuels.count(fuel)) fast += share;
    }
    if (!(total > 0.0)) throw std::invalid_argument("conventional fuel shares sum to zero");
    if (!(fast > 0.0)) throw std::invalid_argument("no fast conventional generation; k_f would be 0");
    return fast / total;
}

std::vector<DemandPair> daily_pairs(const HourlySeries& series, const CalibrationConfig& cfg,
                                    std::optional<int> quarter) {
    validate(cfg);
    struct Acc {
        double peak = 0.0, off = 0.0;
        int npeak = 0, noff = 0;
    };
    std::map<std::int64_t, Acc> days;
    for (const auto& r : series.records()) {
        if (quarter && r.time.quarter() != *quarter) continue;
        if (r.time.hour == cfg.peak_hour) {
            auto& a = days[r.time.local_day()];
            a.peak += r.net_demand_mw;
            ++a.npeak;
        } else if (r.time.hour == cfg.offpeak_hour) {
            auto& a = days[r.time.local_day()];
            a.off += r.net_demand_mw;
            ++a.noff;
        }
    }
    std::vector<DemandPair> out;
    for (const auto& [day, a] : days)
        if (a.npeak > 0 && a.noff > 0) out.push_back({a.peak / a.npeak, a.off / a.noff});
    return out;
}

MomentEstimate estimate_moments(const HourlySeries& series, const CalibrationConfig& cfg,
                                int quarter) {
    if (quarter < 1 || quarter > 4) throw std::invalid_argument("quarter must be in 1..4");
    auto pairs = daily_pairs(series, cfg, quarter);
    if (pairs.size() < 2)
        throw std::invalid_argument("quarter " + std::to_string(quarter) +
                                    " has fewer than 2 days with both peak and off-peak hours");
    std::set<double> distinct;
    for (const auto& p : pairs) distinct.insert(p.d1);
    const std::size_t bins = std::min(cfg.bin_count, distinct.size());
    const std::size_t days = pairs.size();
    EmpiricalJointDemand emp(std::move(pairs), bins);
    DemandMoments m = emp.moments();
    m.rho_s = std::abs(m.rho);
    return {m, std::move(emp), days};
}

std::array<double, 24> hourly_means(const HourlySeries& series) {
    std::array<double, 24> sum{};
    std::array<std::size_t, 24> count{};
    for (const auto& r : series.records()) {
        sum[static_cast<std::size_t>(r.time.hour)] += r.net_demand_mw;
        ++count[static_cast<std::size_t>(r.time.hour)];
    }
    std::array<double, 24> mean{};
    for (std::size_t h = 0; h < 24; ++h) {
        if (count[h] == 0)
            throw std::invalid_argument("no records for hour " + std::to_string(h));
        mean[h] = sum[h] / static_cast<double>(count[h]);
    }
    return mean;
}

std::pair<int, int> detect_peak_hours(const HourlySeries& series) {
    if (series.size() < 24) throw std::invalid_argument("peak detection needs >= 24 records");
    const auto mean = hourly_means(series);
    int peak = 0, trough = 0;
    for (int h = 1; h < 24; ++h) {
        if (mean[static_cast<std::size_t>(h)] > mean[static_cast<std::size_t>(peak)]) peak = h;
        if (mean[static_cast<std::size_t>(h)] < mean[static_cast<std::size_t>(trough)]) trough = h;
    }
    if (peak == trough)
        throw std::invalid_argument("flat hourly profile: peak and off-peak hours coincide");
    return {peak, trough};
}

CalibrationResult quarterly_report(const HourlySeries& series, const FuelMix& mix,
                                   const CalibrationConfig& cfg,
                                   const SupplyOverrides& overrides) {
    validate(cfg);
    CalibrationResult out;
    out.peak_hour = cfg.peak_hour;
    out.offpeak_hour = cfg.offpeak_hour;
    out.k_f = overrides.k_f ? *overrides.k_f : estimate_kf(mix);

    if (overrides.alpha && overrides.beta) {
        out.alpha = *overrides.alpha;
        out.beta = *overrides.beta;
    } else {
        if (series.priced_count() < 2)
            throw std::invalid_argument(
                "series carries no day-ahead prices; supply alpha and beta explicitly");
        const int model_hours[] = {cfg.peak_hour, cfg.offpeak_hour};
        const auto fit = cfg.lad_pool == LadPool::all_hours
                             ? fit_supply_curve(series)
                             : fit_supply_curve(series, model_hours);
        out.supply_fitted = true;
        out.lad_converged = fit.converged;
        out.alpha = overrides.alpha ? *overrides.alpha : fit.alpha;
        out.beta = overrides.beta ? *overrides.beta : fit.beta;
        out.warnings = fit.warnings;
    }
    if (out.beta < 0.0)
        throw std::invalid_argument("supply slope beta is negative; the model needs beta >= 0");
    double alpha = out.alpha;
    if (alpha < 0.0) {
        out.warnings.push_back("negative alpha; regime costs are evaluated with alpha = 0");
        alpha = 0.0;
    }
    const SupplyCurve curve(alpha, out.beta, out.k_f);

    std::set<int> present;
    for (const auto& r : series.records()) present.insert(r.time.quarter());
    double poa_sum = 0.0;
    int poa_count = 0;
    for (int q : present) {
        auto est = estimate_moments(series, cfg, q);
        QuarterResult qr{q, est.days, est.moments, regime_report(curve, est.moments)};
        if (qr.report.poa) {
            poa_sum += *qr.report.poa;
            ++poa_count;
        }
        out.quarters.push_back(std::move(qr));
    }
    if (poa_count > 0) out.annual_poa = poa_sum / poa_count;
    return out;
}

}  // namespace battpoa
