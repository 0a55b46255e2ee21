#ifndef BATTPOA_CLI_HPP
#define BATTPOA_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "battpoa/calibration.hpp"
#include "battpoa/regimes.hpp"

namespace battpoa {

inline constexpr std::uint64_t kDefaultSeed = 20230701;

enum class ExitCode : int { ok = 0, failure = 1, io_error = 2 };

enum class OutputFormat { json, csv, text };

struct RunConfig {
    std::string command;

    std::optional<double> alpha, beta, k_f;
    std::optional<double> mu1, mu2, sigma1, sigma2, rho, rho_s;

    std::string input;
    std::string fuel_mix;
    std::string output;
    std::string duck_csv;

    std::uint64_t seed = kDefaultSeed;
    std::size_t fixtures = 100;
    std::size_t samples = 1'000'000;
    std::optional<double> tolerance;
    OutputFormat format = OutputFormat::text;

    std::optional<int> peak_hour, offpeak_hour;
    std::size_t bins = EmpiricalJointDemand::kDefaultBins;
    LadPool lad_pool = LadPool::all_hours;

    // synth
    int days = 365;
    int year = 2023;
    int utc_offset_minutes = -480;
    double price_noise = 1.0;
    bool no_prices = false;

    // report
    std::size_t kf_points = 100;
};

nlohmann::ordered_json to_json(const RegimeReport& r);
nlohmann::ordered_json to_json(const DemandMoments& m);
nlohmann::ordered_json to_json(const CalibrationResult& r);

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_calibrate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses arguments (including --config JSON files) and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace battpoa

#endif  // BATTPOA_CLI_HPP
