#include "battpoa/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "battpoa/oracle.hpp"
#include "battpoa/series_io.hpp"
#include "battpoa/synth.hpp"

namespace battpoa {

using nlohmann::ordered_json;

namespace {

// Unreadable or unwritable paths; mapped to exit code 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string strf(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string strf(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

std::string num(double v) { return strf("%.10g", v); }
std::string pct(double fraction) { return std::to_string(to_percent(fraction)) + "%"; }

// Left-aligned text table with two spaces between columns.
class Table {
public:
    void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

    void render(std::ostream& out, const std::string& indent = "") const {
        std::vector<std::size_t> width;
        for (const auto& r : rows_)
            for (std::size_t c = 0; c < r.size(); ++c) {
                if (width.size() <= c) width.push_back(0);
                width[c] = std::max(width[c], r[c].size());
            }
        for (const auto& r : rows_) {
            std::string line = indent;
            for (std::size_t c = 0; c < r.size(); ++c) {
                line += r[c];
                if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
            }
            out << line << '\n';
        }
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << body;
    if (!f) throw IoError("cannot write " + path);
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& body) {
    if (cfg.output.empty())
        out << body;
    else
        write_text_file(cfg.output, body);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json optional_number(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> poa_percent(const std::optional<double>& poa) {
    if (!poa) return std::nullopt;
    return (*poa - 1.0) * 100.0;
}

std::string poa_text(const std::optional<double>& poa) {
    if (!poa) return "n/a";
    return strf("%.4f (%d%%)", *poa, to_percent(*poa - 1.0));
}

std::string distortion_line(const DistortionMetrics& d) {
    return pct(d.withhold_qty) + " / " + pct(d.shift_da_rt) + " / " + pct(d.resp_reduction);
}

ordered_json to_json(const DispatchSchedule& s) {
    return ordered_json{{"z1_da", s.z1_da},
                        {"rt_offset", s.z1_rt.offset},
                        {"rt_d1_slope", s.z1_rt.d1_slope},
                        {"rt_cond_slope", s.z1_rt.cond_slope},
                        {"expected_z1_rt", s.z1_rt.offset},
                        {"expected_total", s.z1_da + s.z1_rt.offset}};
}

ordered_json distortion_json(const DistortionMetrics& d) {
    return ordered_json{{"withhold_qty", to_percent(d.withhold_qty)},
                        {"shift_da_rt", to_percent(d.shift_da_rt)},
                        {"resp_reduction", to_percent(d.resp_reduction)}};
}

void require(const std::optional<double>& v, const char* flag) {
    if (!v) throw std::invalid_argument(std::string("missing required parameter --") + flag);
}

// Moment inputs of solve/report. rho_s defaults to |rho|.
DemandMoments moments_from(const RunConfig& cfg) {
    require(cfg.mu1, "mu1");
    require(cfg.mu2, "mu2");
    require(cfg.sigma1, "sigma1");
    require(cfg.sigma2, "sigma2");
    // Correlation is undefined without variance, so rho may be omitted then.
    const bool degenerate = *cfg.sigma1 == 0.0 || *cfg.sigma2 == 0.0;
    if (!degenerate) require(cfg.rho, "rho");
    const double rho = cfg.rho.value_or(0.0);
    DemandMoments m{*cfg.mu1, *cfg.mu2, *cfg.sigma1, *cfg.sigma2, rho,
                    cfg.rho_s ? *cfg.rho_s : std::abs(rho)};
    if (degenerate) {
        if (cfg.rho_s && *cfg.rho_s != 0.0)
            throw std::invalid_argument("rho_s must be 0 when a standard deviation is 0");
        m.rho = 0.0;
        m.rho_s = 0.0;
    }
    validate(m);
    return m;
}

// Text rendering of the per-regime expected discharge, Table 1 style.
void discharge_table(std::ostream& out, const DispatchSchedule& dcn, const DispatchSchedule& cn,
                     const RegimeReport& r) {
    Table t;
    t.row({"regime", "DA discharge", "RT discharge", "total discharge", "quantity withholding",
           "shift from DA to RT"});
    t.row({"decentralized", num(dcn.z1_da), num(dcn.z1_rt.offset), num(dcn.z1_da + dcn.z1_rt.offset),
           pct(r.withhold_qty), pct(r.shift_da_rt)});
    t.row({"centralized", num(cn.z1_da), num(cn.z1_rt.offset), num(cn.z1_da + cn.z1_rt.offset), "0%",
           "0%"});
    t.render(out, "  ");
}

// ---------------------------------------------------------------- solve

int solve_impl(const RunConfig& cfg, std::ostream& out) {
    require(cfg.alpha, "alpha");
    require(cfg.beta, "beta");
    require(cfg.k_f, "kf");
    const DemandMoments m = moments_from(cfg);
    const SupplyCurve curve(*cfg.alpha, *cfg.beta, *cfg.k_f);
    const auto cn = centralized_schedule(m);
    const auto dcn = decentralized_schedule(curve, m);
    const auto report = regime_report(curve, m);
    const DistortionMetrics dist{report.withhold_qty, report.shift_da_rt, report.resp_reduction};

    std::ostringstream body;
    switch (cfg.format) {
    case OutputFormat::json: {
        ordered_json j;
        j["parameters"] = ordered_json{{"alpha", curve.alpha()}, {"beta", curve.beta()},
                                       {"k_f", curve.k_f()}, {"moments", to_json(m)}};
        j["schedules"] = ordered_json{{"centralized", to_json(cn)}, {"decentralized", to_json(dcn)}};
        j["report"] = to_json(report);
        j["distortion_percent"] = distortion_json(dist);
        body << dump(j);
        break;
    }
    case OutputFormat::csv: {
        body << "metric,value\n";
        auto line = [&](const std::string& k, const std::string& v) { body << k << ',' << v << '\n'; };
        line("cost_nb", num(report.cost_nb));
        line("cost_cn", num(report.cost_cn));
        line("cost_dcn", num(report.cost_dcn));
        line("gap_cn", num(report.gap_cn));
        line("gap_dcn", num(report.gap_dcn));
        line("poa", report.poa ? num(*report.poa) : "");
        line("cn_z1_da", num(cn.z1_da));
        line("cn_rt_offset", num(cn.z1_rt.offset));
        line("cn_rt_d1_slope", num(cn.z1_rt.d1_slope));
        line("cn_rt_cond_slope", num(cn.z1_rt.cond_slope));
        line("dcn_z1_da", num(dcn.z1_da));
        line("dcn_rt_offset", num(dcn.z1_rt.offset));
        line("dcn_rt_d1_slope", num(dcn.z1_rt.d1_slope));
        line("dcn_rt_cond_slope", num(dcn.z1_rt.cond_slope));
        line("withhold_qty", num(report.withhold_qty));
        line("shift_da_rt", num(report.shift_da_rt));
        line("resp_reduction", num(report.resp_reduction));
        break;
    }
    case OutputFormat::text: {
        body << "parameters: alpha=" << num(curve.alpha()) << " beta=" << num(curve.beta())
             << " k_f=" << num(curve.k_f()) << "  mu1=" << num(m.mu1) << " mu2=" << num(m.mu2)
             << " sigma1=" << num(m.sigma1) << " sigma2=" << num(m.sigma2) << " rho=" << num(m.rho)
             << " rho_s=" << num(m.rho_s) << "\n\n";
        body << "expected battery discharge in period 1 (MW)\n";
        discharge_table(body, dcn, cn, report);
        body << "\nreal-time policy z1_rt(d1) = offset + a (d1 - mu1) + b (mu2|d1 - mu2)\n";
        Table p;
        p.row({"regime", "offset", "a", "b"});
        p.row({"decentralized", num(dcn.z1_rt.offset), num(dcn.z1_rt.d1_slope),
               num(dcn.z1_rt.cond_slope)});
        p.row({"centralized", num(cn.z1_rt.offset), num(cn.z1_rt.d1_slope),
               num(cn.z1_rt.cond_slope)});
        p.render(body, "  ");
        body << "\nexpected generation cost ($)\n";
        Table c;
        c.row({"no battery", num(report.cost_nb)});
        c.row({"centralized", num(report.cost_cn)});
        c.row({"decentralized", num(report.cost_dcn)});
        c.render(body, "  ");
        body << "\n";
        Table s;
        s.row({"PoA", "quantity withholding / shift from DA to RT / reduction in RT responsiveness"});
        s.row({poa_text(report.poa), distortion_line(dist)});
        s.render(body, "  ");
        break;
    }
    }
    emit(cfg, out, body.str());
    return 0;
}

// ---------------------------------------------------------------- verify

struct CheckLine {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string reproduce;  // failing fixture, empty when passing
};

std::string fixture_text(std::size_t index, const OracleFixture& f) {
    const auto& m = f.moments;
    return strf("fixture %zu: --alpha %.17g --beta %.17g --kf %.17g --mu1 %.17g --mu2 %.17g "
                "--sigma1 %.17g --sigma2 %.17g --rho %.17g",
                index, f.alpha, f.beta, f.k_f, m.mu1, m.mu2, m.sigma1, m.sigma2, m.rho);
}

CheckLine mc_line(const std::string& name, const IdentityCheck& c, double sigmas) {
    const double diff = std::abs(c.estimate - c.expected);
    const double z = c.std_error > 0.0 ? diff / c.std_error : (diff == 0.0 ? 0.0 : HUGE_VAL);
    return {name, z, sigmas, c.passes(sigmas), {}};
}

int verify_impl(const RunConfig& cfg, std::ostream& out) {
    if (cfg.samples < 2) throw std::invalid_argument("--samples must be >= 2");
    if (cfg.tolerance && !(*cfg.tolerance >= 0.0))
        throw std::invalid_argument("--tolerance must be >= 0");
    const double tol_schedule = cfg.tolerance.value_or(1e-6);
    const double tol_cost = cfg.tolerance.value_or(1e-8);
    const double tol_foc = cfg.tolerance.value_or(1e-10);
    constexpr double kSigmas = 4.0;

    std::vector<CheckLine> checks;
    const auto fixtures = random_fixtures(cfg.seed, cfg.fixtures);
    std::vector<FixtureComparison> cmp;
    cmp.reserve(fixtures.size());
    for (const auto& f : fixtures) cmp.push_back(compare_closed_form(f));

    auto fixture_check = [&](const std::string& name, double FixtureComparison::*field, double tol) {
        double worst = 0.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < cmp.size(); ++i)
            if (cmp[i].*field > worst || i == 0) {
                worst = cmp[i].*field;
                arg = i;
            }
        CheckLine c{name, worst, tol, !(worst > tol) && std::isfinite(worst), {}};
        if (!c.pass && !fixtures.empty()) c.reproduce = fixture_text(arg, fixtures[arg]);
        checks.push_back(std::move(c));
    };
    fixture_check("centralized schedule vs numeric optimum (max rel)",
                  &FixtureComparison::schedule_rel_cn, tol_schedule);
    fixture_check("decentralized schedule vs numeric optimum (max rel)",
                  &FixtureComparison::schedule_rel_dcn, tol_schedule);
    fixture_check("centralized cost vs numeric optimum (max rel)", &FixtureComparison::cost_rel_cn,
                  tol_cost);
    fixture_check("decentralized cost vs numeric optimum (max rel)",
                  &FixtureComparison::cost_rel_dcn, tol_cost);
    fixture_check("centralized FOC residual, MW (max)", &FixtureComparison::foc_cn, tol_foc);
    fixture_check("decentralized FOC residual, MW (max)", &FixtureComparison::foc_dcn, tol_foc);

    // Monte Carlo on the small reference case; values are z-scores.
    const SupplyCurve curve(1.0, 2.0, 0.5);
    const NormalJointDemand ref(3.0, 1.0, 1.0, 1.0, 0.5);
    const JointDemand dist{ref};
    const auto nb = monte_carlo_cost(curve, DispatchSchedule::idle(), dist, cfg.samples, cfg.seed);
    checks.push_back(mc_line("Monte Carlo no-battery cost vs closed form (z)",
                             {"", nb.mean, nb.std_error, cost_no_battery(curve, ref.moments())},
                             kSigmas));
    const auto profit =
        monte_carlo_profit(curve, centralized_schedule(dist), dist, cfg.samples, cfg.seed + 1);
    checks.push_back(mc_line("Monte Carlo centralized battery profit vs 0 (z)",
                             {"", profit.mean, profit.std_error, 0.0}, kSigmas));

    const double rhos[] = {-0.5, 0.0, 0.8};
    for (std::size_t k = 0; k < 3; ++k) {
        const NormalJointDemand d(3.0, 1.0, 1.0, 2.0, rhos[k]);
        for (const auto& id : check_conditional_identities(d, cfg.samples, cfg.seed + 2 + k))
            checks.push_back(mc_line(strf("rho=%+.1f %s (z)", rhos[k], id.name.c_str()), id, kSigmas));
    }

    const bool ok = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    std::ostringstream body;
    if (cfg.format == OutputFormat::json) {
        ordered_json j;
        j["seed"] = cfg.seed;
        j["fixtures"] = cfg.fixtures;
        j["samples"] = cfg.samples;
        j["checks"] = ordered_json::array();
        for (const auto& c : checks) {
            ordered_json e{{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance},
                           {"pass", c.pass}};
            if (!c.reproduce.empty()) e["reproduce"] = c.reproduce;
            j["checks"].push_back(std::move(e));
        }
        j["passed"] = ok;
        body << dump(j);
    } else if (cfg.format == OutputFormat::csv) {
        body << "check,value,tolerance,status\n";
        for (const auto& c : checks)
            body << '"' << c.name << "\"," << strf("%.6e,%.6e,", c.value, c.tolerance)
                 << (c.pass ? "PASS" : "FAIL") << '\n';
    } else {
        body << strf("seed %llu, %zu fixtures, %zu Monte Carlo samples\n\n",
                     static_cast<unsigned long long>(cfg.seed), cfg.fixtures, cfg.samples);
        Table t;
        t.row({"check", "value", "tolerance", "status"});
        for (const auto& c : checks)
            t.row({c.name, strf("%.3e", c.value), strf("%.3e", c.tolerance), c.pass ? "PASS" : "FAIL"});
        t.render(body);
        for (const auto& c : checks)
            if (!c.reproduce.empty()) body << "\nFAIL " << c.name << "\n  worst " << c.reproduce << '\n';
        body << '\n' << (ok ? "all checks passed" : "verification FAILED") << '\n';
    }
    emit(cfg, out, body.str());
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------- calibrate

HourlySeries load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_series_csv(in);
}

FuelMix load_fuel_mix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_fuel_mix(ss.str());
}

std::string duck_path(const RunConfig& cfg) {
    if (!cfg.duck_csv.empty()) return cfg.duck_csv;
    if (cfg.output.empty()) return {};
    const std::filesystem::path p(cfg.output);
    return (p.parent_path() / (p.stem().string() + "_duck.csv")).string();
}

int calibrate_impl(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.input.empty()) throw std::invalid_argument("missing required --input CSV");
    if (cfg.fuel_mix.empty() && !cfg.k_f)
        throw std::invalid_argument("missing --fuel-mix JSON (or --kf override)");
    const HourlySeries series = load_series(cfg.input);
    const FuelMix mix = cfg.fuel_mix.empty() ? FuelMix{} : load_fuel_mix(cfg.fuel_mix);

    CalibrationConfig cc;
    cc.bin_count = cfg.bins;
    cc.lad_pool = cfg.lad_pool;
    if (!cfg.peak_hour || !cfg.offpeak_hour) {
        const auto [peak, trough] = detect_peak_hours(series);
        cc.peak_hour = cfg.peak_hour.value_or(peak);
        cc.offpeak_hour = cfg.offpeak_hour.value_or(trough);
    } else {
        cc.peak_hour = *cfg.peak_hour;
        cc.offpeak_hour = *cfg.offpeak_hour;
    }

    const auto result = quarterly_report(series, mix, cc, {cfg.alpha, cfg.beta, cfg.k_f});
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';

    std::optional<std::array<double, 24>> hourly;
    try {
        hourly = hourly_means(series);
    } catch (const std::invalid_argument& e) {
        err << "warning: no duck-curve profile: " << e.what() << '\n';
    }
    const std::string duck = duck_path(cfg);
    if (hourly && !duck.empty()) {
        std::ostringstream csv;
        csv << "hour,mean_net_demand_mw\n";
        for (std::size_t h = 0; h < 24; ++h) csv << h << ',' << strf("%.6f", (*hourly)[h]) << '\n';
        write_text_file(duck, csv.str());
    }

    const DistortionMetrics dist = distortion_metrics(result.k_f);
    std::ostringstream body;
    if (cfg.format == OutputFormat::json) {
        ordered_json j = to_json(result);
        j["distortion_percent"] = distortion_json(dist);
        if (hourly) j["hourly_mean_net_demand_mw"] = *hourly;
        body << dump(j);
    } else if (cfg.format == OutputFormat::csv) {
        body << "quarter,days,mu1,mu2,sigma1,sigma2,rho,cost_nb,cost_cn,cost_dcn,poa\n";
        for (const auto& q : result.quarters) {
            const auto& m = q.moments;
            body << q.quarter << ',' << q.days << ',' << num(m.mu1) << ',' << num(m.mu2) << ','
                 << num(m.sigma1) << ',' << num(m.sigma2) << ',' << num(m.rho) << ','
                 << num(q.report.cost_nb) << ',' << num(q.report.cost_cn) << ','
                 << num(q.report.cost_dcn) << ',' << (q.report.poa ? num(*q.report.poa) : "")
                 << '\n';
        }
    } else {
        body << "supply curve: alpha=" << num(result.alpha) << " beta=" << num(result.beta)
             << (result.supply_fitted ? " (LAD fit)" : " (given)") << "\n";
        body << "k_f=" << strf("%.2f", result.k_f) << "  peak hour " << result.peak_hour
             << ", off-peak hour " << result.offpeak_hour << "\n\n";
        Table t;
        t.row({"quarter", "days", "mu1", "mu2", "sigma1", "sigma2", "rho", "PoA"});
        for (const auto& q : result.quarters) {
            const auto& m = q.moments;
            t.row({"Q" + std::to_string(q.quarter), std::to_string(q.days), strf("%.1f", m.mu1),
                   strf("%.1f", m.mu2), strf("%.1f", m.sigma1), strf("%.1f", m.sigma2),
                   strf("%.3f", m.rho), poa_text(q.report.poa)});
        }
        t.render(body, "  ");
        body << '\n';
        Table s;
        s.row({"", "PoA", "quantity withholding / shift from DA to RT / reduction in RT responsiveness"});
        s.row({"annual", poa_text(result.annual_poa), distortion_line(dist)});
        s.render(body, "  ");
    }
    emit(cfg, out, body.str());
    return 0;
}

// ---------------------------------------------------------------- report

int report_impl(const RunConfig& cfg, std::ostream& out) {
    if (cfg.kf_points < 2) throw std::invalid_argument("--kf-points must be >= 2");
    const DemandMoments m = moments_from(cfg);
    const double alpha = cfg.alpha.value_or(0.0), beta = cfg.beta.value_or(1.0);

    // Table 1: discharge in units of delta mu.
    const DemandMoments flat{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    struct Row {
        std::string label;
        double k_f;
    };
    const Row rows[] = {{"decentralized, slow gen. dominate (k_f ~ 0)", 0.0},
                        {"decentralized, fast gen. dominate (k_f ~ 1)", 1.0}};

    struct Point {
        double k_f;
        std::optional<double> poa;
        DistortionMetrics d;
    };
    std::vector<Point> curve;
    for (std::size_t i = 0; i < cfg.kf_points; ++i) {
        const double kf = 0.01 + 0.99 * static_cast<double>(i) / static_cast<double>(cfg.kf_points - 1);
        curve.push_back({kf, price_of_anarchy(SupplyCurve(alpha, beta, kf), m), distortion_metrics(kf)});
    }

    std::ostringstream body;
    if (cfg.format == OutputFormat::csv) {
        body << "k_f,poa,withhold_qty,shift_da_rt,resp_reduction\n";
        for (const auto& p : curve)
            body << strf("%.6f", p.k_f) << ',' << (p.poa ? strf("%.10f", *p.poa) : "") << ','
                 << num(p.d.withhold_qty) << ',' << num(p.d.shift_da_rt) << ','
                 << num(p.d.resp_reduction) << '\n';
        emit(cfg, out, body.str());
        return 0;
    }

    // Slow-generator limit: k_f = 0 is outside the supply-curve domain, so
    // the schedule coefficients are evaluated directly.
    auto dcn_da = [](double k) { return (2.0 - k) / (2.0 * (4.0 - k)); };
    auto dcn_rt = [](double k) { return k / (2.0 * (4.0 - k)); };
    const auto cn = centralized_schedule(flat);

    if (cfg.format == OutputFormat::json) {
        ordered_json j;
        j["table1"] = ordered_json::array();
        for (const auto& r : rows) {
            const auto d = distortion_metrics(r.k_f);
            j["table1"].push_back(ordered_json{{"regime", r.label},
                                               {"k_f", r.k_f},
                                               {"da_per_dmu", dcn_da(r.k_f)},
                                               {"rt_per_dmu", dcn_rt(r.k_f)},
                                               {"total_per_dmu", dcn_da(r.k_f) + dcn_rt(r.k_f)},
                                               {"withhold_qty", d.withhold_qty},
                                               {"shift_da_rt", d.shift_da_rt}});
        }
        j["table1"].push_back(ordered_json{{"regime", "centralized"},
                                           {"k_f", nullptr},
                                           {"da_per_dmu", cn.z1_da},
                                           {"rt_per_dmu", cn.z1_rt.offset},
                                           {"total_per_dmu", cn.z1_da + cn.z1_rt.offset},
                                           {"withhold_qty", 0.0},
                                           {"shift_da_rt", 0.0}});
        j["moments"] = to_json(m);
        j["poa_curve"] = ordered_json::array();
        for (const auto& p : curve)
            j["poa_curve"].push_back(ordered_json{{"k_f", p.k_f},
                                                  {"poa", optional_number(p.poa)},
                                                  {"withhold_qty", p.d.withhold_qty},
                                                  {"shift_da_rt", p.d.shift_da_rt},
                                                  {"resp_reduction", p.d.resp_reduction}});
        body << dump(j);
    } else {
        body << "non-random component of battery discharge (units of delta mu)\n";
        Table t;
        t.row({"regime", "DA discharge", "RT discharge", "total discharge", "quantity withholding",
               "shift from DA to RT"});
        for (const auto& r : rows) {
            const auto d = distortion_metrics(r.k_f);
            t.row({r.label, num(dcn_da(r.k_f)), num(dcn_rt(r.k_f)), num(dcn_da(r.k_f) + dcn_rt(r.k_f)),
                   strf("%.1f%%", 100.0 * d.withhold_qty), strf("%.0f%%", 100.0 * d.shift_da_rt)});
        }
        t.row({"centralized", num(cn.z1_da), num(cn.z1_rt.offset), num(cn.z1_da + cn.z1_rt.offset),
               "0%", "0%"});
        t.render(body, "  ");
        body << "\nPoA against k_f for mu1=" << num(m.mu1) << " mu2=" << num(m.mu2)
             << " sigma1=" << num(m.sigma1) << " sigma2=" << num(m.sigma2) << " rho=" << num(m.rho)
             << "\n";
        Table c;
        c.row({"k_f", "PoA", "distortions"});
        for (const auto& p : curve)
            c.row({strf("%.4f", p.k_f), poa_text(p.poa), distortion_line(p.d)});
        c.render(body, "  ");
    }
    emit(cfg, out, body.str());
    return 0;
}

// ---------------------------------------------------------------- synth

int synth_impl(const RunConfig& cfg, std::ostream& out) {
    SynthConfig sc;
    sc.year = cfg.year;
    sc.days = cfg.days;
    sc.utc_offset_minutes = cfg.utc_offset_minutes;
    if (cfg.peak_hour) sc.peak_hour = *cfg.peak_hour;
    if (cfg.offpeak_hour) sc.offpeak_hour = *cfg.offpeak_hour;
    if (cfg.mu1) sc.mu1 = *cfg.mu1;
    if (cfg.mu2) sc.mu2 = *cfg.mu2;
    if (cfg.sigma1) sc.sigma1 = *cfg.sigma1;
    if (cfg.sigma2) sc.sigma2 = *cfg.sigma2;
    if (cfg.rho) sc.rho = *cfg.rho;
    if (cfg.alpha) sc.alpha = *cfg.alpha;
    if (cfg.beta) sc.beta = *cfg.beta;
    sc.price_noise = cfg.price_noise;
    sc.prices = !cfg.no_prices;
    sc.seed = cfg.seed;
    std::ostringstream body;
    write_series_csv(body, generate_synthetic_series(sc));
    emit(cfg, out, body.str());
    return 0;
}

// Maps library exceptions to exit codes.
int guarded(const std::function<int()>& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::io_error);
    } catch (const IngestError& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::failure);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::failure);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::io_error);
    }
}

// --config files: a flat JSON object keyed by long option names.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        nlohmann::json j = nlohmann::json::object();
        for (const CLI::Option* opt : app->get_options()) {
            if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
            const std::string& name = opt->get_lnames().front();
            if (opt->count() > 0) {
                const auto& res = opt->results();
                j[name] = res.size() == 1 ? nlohmann::json(res.front()) : nlohmann::json(res);
            } else if (default_also && !opt->get_default_str().empty()) {
                j[name] = opt->get_default_str();
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(input);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    }

    static void collect(const nlohmann::json& j, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto p = parents;
                p.push_back(key);
                collect(value, p, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array())
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            else
                item.inputs.push_back(scalar(value));
            items.push_back(std::move(item));
        }
    }
};

}  // namespace

ordered_json to_json(const RegimeReport& r) {
    return ordered_json{{"cost_nb", r.cost_nb},
                        {"cost_cn", r.cost_cn},
                        {"cost_dcn", r.cost_dcn},
                        {"gap_cn", r.gap_cn},
                        {"gap_dcn", r.gap_dcn},
                        {"poa", optional_number(r.poa)},
                        {"poa_percent", optional_number(poa_percent(r.poa))},
                        {"withhold_qty", r.withhold_qty},
                        {"shift_da_rt", r.shift_da_rt},
                        {"resp_reduction", r.resp_reduction}};
}

ordered_json to_json(const DemandMoments& m) {
    return ordered_json{{"mu1", m.mu1},       {"mu2", m.mu2}, {"sigma1", m.sigma1},
                        {"sigma2", m.sigma2}, {"rho", m.rho}, {"rho_s", m.rho_s}};
}

ordered_json to_json(const CalibrationResult& r) {
    ordered_json j;
    j["alpha"] = r.alpha;
    j["beta"] = r.beta;
    j["k_f"] = r.k_f;
    j["supply_fitted"] = r.supply_fitted;
    j["lad_converged"] = r.lad_converged;
    j["peak_hour"] = r.peak_hour;
    j["offpeak_hour"] = r.offpeak_hour;
    j["quarters"] = ordered_json::array();
    for (const auto& q : r.quarters)
        j["quarters"].push_back(ordered_json{{"quarter", q.quarter},
                                             {"days", q.days},
                                             {"moments", to_json(q.moments)},
                                             {"report", to_json(q.report)}});
    j["annual_poa"] = optional_number(r.annual_poa);
    j["warnings"] = r.warnings;
    return j;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded([&] { return solve_impl(cfg, out); }, err);
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded([&] { return verify_impl(cfg, out); }, err);
}

int cmd_calibrate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded([&] { return calibrate_impl(cfg, out, err); }, err);
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded([&] { return report_impl(cfg, out); }, err);
}

int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded([&] { return synth_impl(cfg, out); }, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Battery market power in a two-settlement electricity market"};
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file of option values keyed by long flag name");

    app.add_option("command", cfg.command, "solve | verify | calibrate | report | synth")
        ->required()
        ->check(CLI::IsMember({"solve", "verify", "calibrate", "report", "synth"}));

    app.add_option("--alpha", cfg.alpha, "supply curve intercept ($/MWh)");
    app.add_option("--beta", cfg.beta, "supply curve slope ($/MWh per MW)");
    app.add_option("--kf", cfg.k_f, "share of fast generators, (0, 1]");
    app.add_option("--mu1", cfg.mu1, "mean peak net demand (MW)");
    app.add_option("--mu2", cfg.mu2, "mean off-peak net demand (MW)");
    app.add_option("--sigma1", cfg.sigma1, "sd of peak net demand (MW)");
    app.add_option("--sigma2", cfg.sigma2, "sd of off-peak net demand (MW)");
    app.add_option("--rho", cfg.rho, "Pearson correlation of peak and off-peak demand");
    app.add_option("--rho-s", cfg.rho_s, "sequential correlation (default |rho|)");

    app.add_option("--input", cfg.input, "hourly net-demand CSV");
    app.add_option("--fuel-mix", cfg.fuel_mix, "fuel-mix JSON");
    app.add_option("--output,-o", cfg.output, "write the result here instead of stdout");
    app.add_option("--duck-csv", cfg.duck_csv, "hourly mean net demand CSV (calibrate)");

    app.add_option("--seed", cfg.seed, "random seed")
        ->envname("BATTPOA_SEED")
        ->capture_default_str();
    app.add_option("--fixtures", cfg.fixtures, "random fixtures (verify)")->capture_default_str();
    app.add_option("--samples", cfg.samples, "Monte Carlo samples (verify)")->capture_default_str();
    app.add_option("--tolerance", cfg.tolerance,
                   "override the deterministic verify tolerances");
    const std::map<std::string, OutputFormat> formats{
        {"json", OutputFormat::json}, {"csv", OutputFormat::csv}, {"text", OutputFormat::text}};
    app.add_option("--format", cfg.format, "json | csv | text")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

    app.add_option("--peak-hour", cfg.peak_hour, "peak clock hour (auto-detected if omitted)")
        ->check(CLI::Range(0, 23));
    app.add_option("--offpeak-hour", cfg.offpeak_hour, "off-peak clock hour (auto-detected if omitted)")
        ->check(CLI::Range(0, 23));
    app.add_option("--bins", cfg.bins, "quantile bins for E[D2|D1]")->capture_default_str();
    const std::map<std::string, LadPool> pools{{"all", LadPool::all_hours},
                                               {"model", LadPool::model_hours}};
    app.add_option("--lad-pool", cfg.lad_pool, "records used by the supply fit: all | model")
        ->transform(CLI::CheckedTransformer(pools, CLI::ignore_case));

    app.add_option("--days", cfg.days, "days to generate (synth)")->check(CLI::PositiveNumber);
    app.add_option("--year", cfg.year, "first calendar year (synth)");
    app.add_option("--utc-offset", cfg.utc_offset_minutes, "UTC offset in minutes (synth)")
        ->check(CLI::Range(-1439, 1439));
    app.add_option("--price-noise", cfg.price_noise, "Laplace price noise scale (synth)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--no-prices", cfg.no_prices, "omit the price column (synth)");
    app.add_option("--kf-points", cfg.kf_points, "points on the PoA curve (report)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::io_error);
    }

    if (cfg.command == "solve") return cmd_solve(cfg, out, err);
    if (cfg.command == "verify") return cmd_verify(cfg, out, err);
    if (cfg.command == "calibrate") return cmd_calibrate(cfg, out, err);
    if (cfg.command == "report") return cmd_report(cfg, out, err);
    return cmd_synth(cfg, out, err);
}

}  // namespace battpoa
