#ifndef BATTPOA_SYNTH_HPP
#define BATTPOA_SYNTH_HPP

#include <cstdint>

#include "battpoa/series_io.hpp"

namespace battpoa {

// Synthetic hourly net demand with a duck-shaped daily profile.
//
// Each day draws (D1, D2) from a bivariate normal. The value at hour h is
// u(h) D1 + (1 - u(h)) D2, where u rises linearly from 0 at the off-peak
// hour to 1 at the peak hour and falls linearly back around the clock.
// Prices are alpha + beta * demand plus Laplace noise.
struct SynthConfig {
    int year = 2023;
    int days = 365;
    int utc_offset_minutes = -480;
    int peak_hour = 19;
    int offpeak_hour = 12;
    double mu1 = 20000.0;
    double mu2 = 8000.0;
    double sigma1 = 1500.0;
    double sigma2 = 1200.0;
    double rho = 0.8;
    double alpha = 5.0;
    double beta = 0.01;
    double price_noise = 1.0;  // Laplace scale, $/MWh
    bool prices = true;
    std::uint64_t seed = 20230701;
};

// Weight u(h) of the peak draw at clock hour h.
double duck_weight(const SynthConfig& cfg, int hour);

HourlySeries generate_synthetic_series(const SynthConfig& cfg);

}  // namespace battpoa

#endif  // BATTPOA_SYNTH_HPP
