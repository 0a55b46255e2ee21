#include "battpoa/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace battpoa {

double duck_weight(const SynthConfig& cfg, int hour) {
    const int rise = ((cfg.peak_hour - cfg.offpeak_hour) % 24 + 24) % 24;
    const int t = ((hour - cfg.offpeak_hour) % 24 + 24) % 24;
    if (t <= rise) return static_cast<double>(t) / rise;
    return 1.0 - static_cast<double>(t - rise) / (24 - rise);
}

HourlySeries generate_synthetic_series(const SynthConfig& cfg) {
    if (cfg.days < 1) throw std::invalid_argument("synthetic series needs at least one day");
    if (cfg.peak_hour < 0 || cfg.peak_hour > 23 || cfg.offpeak_hour < 0 ||
        cfg.offpeak_hour > 23 || cfg.peak_hour == cfg.offpeak_hour)
        throw std::invalid_argument("peak and off-peak hours must be distinct hours in 0..23");
    if (cfg.sigma1 < 0.0 || cfg.sigma2 < 0.0 || cfg.rho < -1.0 || cfg.rho > 1.0 ||
        cfg.price_noise < 0.0)
        throw std::invalid_argument("invalid synthetic demand parameters");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> z;
    std::exponential_distribution<double> expo(1.0);
    const double tail = std::sqrt(1.0 - cfg.rho * cfg.rho);
    const auto first_day = days_from_civil(cfg.year, 1, 1);

    std::vector<HourlyRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.days) * 24);
    for (int d = 0; d < cfg.days; ++d) {
        const double z1 = z(rng), z2 = z(rng);
        const double d1 = cfg.mu1 + cfg.sigma1 * z1;
        const double d2 = cfg.mu2 + cfg.sigma2 * (cfg.rho * z1 + tail * z2);
        for (int h = 0; h < 24; ++h) {
            const double u = duck_weight(cfg, h);
            HourlyRecord rec;
            rec.time = timestamp_from_local(first_day + d, h, cfg.utc_offset_minutes);
            rec.net_demand_mw = u * d1 + (1.0 - u) * d2;
            // Drawn even without prices so demand depends only on the seed.
            const double noise = cfg.price_noise * (expo(rng) - expo(rng));
            if (cfg.prices) rec.da_price = cfg.alpha + cfg.beta * rec.net_demand_mw + noise;
            records.push_back(rec);
        }
    }
    return HourlySeries(std::move(records));
}

}  // namespace battpoa
