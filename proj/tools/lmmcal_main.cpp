#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmmcal/basket.hpp"
#include "lmmcal/calibration.hpp"
#include "lmmcal/curve.hpp"
#include "lmmcal/io.hpp"
#include "lmmcal/mc.hpp"
#include "lmmcal/rank.hpp"
#include "lmmcal/vol.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "lmmcal 0.1.0";

struct InstrumentArgs {
    std::string curve_file;
    std::string vol_file;
    double start_years = 0.0;
    double end_years = 0.0;
    std::vector<double> strikes;
};

lmmcal::SwapSpec make_spec(const lmmcal::YieldCurve& curve, double start_years, double end_years) {
    int start = lmmcal::grid_index(curve, start_years);
    int end_grid = lmmcal::grid_index(curve, end_years);
    if (end_grid <= start)
        throw std::invalid_argument("end_years must be at least one period past start_years");
    return lmmcal::SwapSpec{start, end_grid - 1, curve.delta()};
}

void ensure_dir(const std::string& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw std::runtime_error(out + ": cannot create output directory");
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot write");
    f << j.dump(2) << "\n";
}

int run_price(const InstrumentArgs& in, int order, bool level_in_density,
              const std::string& out) {
    ensure_dir(out);
    auto curve = lmmcal::io::read_curve(in.curve_file);
    auto vols = lmmcal::io::read_vol_spec(in.vol_file);
    auto spec = make_spec(curve, in.start_years, in.end_years);
    auto [swap, level] = lmmcal::swap_rate_and_level(curve, spec);

    lmmcal::SwaptionOptions opts;
    opts.order = order;
    opts.level_in_density = level_in_density;

    json report;
    report["instruments"] = json::array();
    for (double k : in.strikes) {
        auto bd = lmmcal::price_swaption_breakdown(curve, spec, vols, k, opts);
        report["instruments"].push_back({{"start_years", in.start_years},
                                         {"end_years", in.end_years},
                                         {"strike", k},
                                         {"order", order},
                                         {"swap_rate", swap},
                                         {"level", level},
                                         {"variance", bd.variance},
                                         {"order_zero", bd.order_zero},
                                         {"order_one", bd.order_one},
                                         {"price", bd.total}});
    }
    write_json_file(out + "/prices.json", report);

    json cfg{{"curve", in.curve_file}, {"vols", in.vol_file},      {"start", in.start_years},
             {"end", in.end_years},    {"strikes", in.strikes},    {"order", order},
             {"level_in_density", level_in_density}};
    lmmcal::io::write_manifest(out, "price", {in.curve_file, in.vol_file}, cfg, 0);
    std::cerr << "priced " << in.strikes.size() << " instrument(s) -> " << out << "/prices.json\n";
    return 0;
}

int run_simulate(const InstrumentArgs& in, const lmmcal::SimConfig& sim, const std::string& out) {
    ensure_dir(out);
    auto curve = lmmcal::io::read_curve(in.curve_file);
    auto vols = lmmcal::io::read_vol_spec(in.vol_file);
    auto spec = make_spec(curve, in.start_years, in.end_years);

    std::vector<lmmcal::io::McRow> rows;
    json report;
    report["results"] = json::array();
    for (double k : in.strikes) {
        auto est = lmmcal::simulate_lmm_swaption(curve, vols, spec, k, sim);
        rows.push_back({k, est.price, est.std_error});
        report["results"].push_back({{"strike", k},
                                     {"price", est.price},
                                     {"std_error", est.std_error},
                                     {"paths_used", est.paths_used}});
    }
    lmmcal::io::write_mc_csv(out + "/mc.csv", rows);
    write_json_file(out + "/mc.json", report);

    json cfg{{"curve", in.curve_file},
             {"vols", in.vol_file},
             {"start", in.start_years},
             {"end", in.end_years},
             {"strikes", in.strikes},
             {"paths", sim.paths},
             {"steps_per_period", sim.steps_per_period},
             {"antithetic", sim.antithetic},
             {"rate_cap", sim.rate_cap},
             {"target_ci", sim.target_ci}};
    lmmcal::io::write_manifest(out, "simulate", {in.curve_file, in.vol_file}, cfg, sim.seed);
    std::cerr << "simulated " << in.strikes.size() << " strike(s) -> " << out << "/mc.csv\n";
    return 0;
}

int run_calibrate(const std::string& curve_file, const std::string& quotes_file,
                  const std::string& config_file, const std::string& out) {
    ensure_dir(out);
    auto curve = lmmcal::io::read_curve(curve_file);
    auto quotes = lmmcal::io::read_quotes(quotes_file, curve);
    auto cfg = lmmcal::io::read_config(config_file);
    auto instance = lmmcal::build_instance(curve, quotes, cfg.mode);
    auto result = lmmcal::solve(instance, cfg.objective, cfg.solver);

    lmmcal::io::write_result_json(out + "/result.json", result);
    lmmcal::io::write_spectrum_csv(out + "/spectrum.csv", result.X);
    std::vector<std::string> inputs{curve_file, quotes_file};
    if (!config_file.empty()) inputs.push_back(config_file);
    lmmcal::io::write_manifest(out, "calibrate", inputs, cfg.raw, 0);

    double worst = result.residuals.size() > 0 ? result.residuals.maxCoeff() : 0.0;
    std::cerr << "calibration " << result.status << " after " << result.iterations
              << " iteration(s), max residual " << worst << " -> " << out << "/result.json\n";
    return result.converged ? 0 : 3;
}

int run_bounds(const std::string& curve_file, const std::string& quotes_file,
               const std::string& config_file, double start_years, double end_years,
               double expiry, double strike, const std::string& out) {
    ensure_dir(out);
    auto curve = lmmcal::io::read_curve(curve_file);
    auto quotes = lmmcal::io::read_quotes(quotes_file, curve);
    auto cfg = lmmcal::io::read_config(config_file);
    auto instance = lmmcal::build_instance(curve, quotes);
    auto spec = make_spec(curve, start_years, end_years);
    double T = expiry > 0.0 ? expiry : start_years;
    auto b = lmmcal::price_bounds(instance, curve, spec, T, cfg.solver, strike);

    json j{{"target",
            {{"start_years", start_years},
             {"end_years", end_years},
             {"expiry_years", T},
             {"strike", strike < 0.0 ? json() : json(strike)}}},
           {"min_variance", b.min_variance},
           {"max_variance", b.bounded_above ? json(b.max_variance) : json()},
           {"min_price", b.min_price},
           {"max_price", b.bounded_above ? json(b.max_price) : json()},
           {"bounded_above", b.bounded_above},
           {"min_status", b.min_status},
           {"max_status", b.max_status}};
    write_json_file(out + "/bounds.json", j);

    std::vector<std::string> inputs{curve_file, quotes_file};
    if (!config_file.empty()) inputs.push_back(config_file);
    json mcfg = cfg.raw;
    mcfg["target"] = j["target"];
    lmmcal::io::write_manifest(out, "bounds", inputs, mcfg, 0);
    std::cerr << "bounds [" << b.min_price << ", "
              << (b.bounded_above ? std::to_string(b.max_price) : std::string("unbounded"))
              << "] -> " << out << "/bounds.json\n";
    bool solved = (b.min_status == "converged") &&
                  (b.max_status == "converged" || b.max_status == "unbounded");
    return solved ? 0 : 3;
}

int run_error_study(const std::string& curve_file, const std::string& quotes_file,
                    const std::string& config_file, const std::vector<std::string>& grid,
                    const lmmcal::SimConfig& sim, const std::string& out) {
    ensure_dir(out);
    auto curve = lmmcal::io::read_curve(curve_file);
    auto quotes = lmmcal::io::read_quotes(quotes_file, curve);
    auto cfg = lmmcal::io::read_config(config_file);
    auto instance = lmmcal::build_instance(curve, quotes, cfg.mode);
    auto result = lmmcal::solve(instance, cfg.objective, cfg.solver);
    if (!result.converged) {
        std::cerr << "calibration " << result.status << "; cannot run the error study\n";
        return 3;
    }
    auto vols = lmmcal::VolSpec::stationary(result.X, curve.tenor_grid().back());

    std::ostringstream csv;
    csv << "swaption,approx,mc,diff,mc_std_error\n";
    for (const auto& g : grid) {
        auto xpos = g.find('x');
        if (xpos == std::string::npos)
            throw std::invalid_argument("grid entry '" + g + "' must look like <start>x<length>");
        double s = std::stod(g.substr(0, xpos));
        double len = std::stod(g.substr(xpos + 1));
        auto spec = make_spec(curve, s, s + len);
        auto [swap, level] = lmmcal::swap_rate_and_level(curve, spec);
        (void)level;
        double approx = lmmcal::price_swaption(curve, spec, vols, swap);
        auto mc = lmmcal::simulate_lmm_swaption(curve, vols, spec, swap, sim);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g\n", g.c_str(), approx,
                      mc.price, approx - mc.price, mc.std_error);
        csv << buf;
    }
    std::ofstream f(out + "/error_study.csv", std::ios::binary);
    if (!f) throw std::runtime_error(out + "/error_study.csv: cannot write");
    f << csv.str();
    f.close();

    std::vector<std::string> inputs{curve_file, quotes_file};
    if (!config_file.empty()) inputs.push_back(config_file);
    json mcfg = cfg.raw;
    mcfg["grid"] = grid;
    mcfg["paths"] = sim.paths;
    mcfg["steps_per_period"] = sim.steps_per_period;
    lmmcal::io::write_manifest(out, "error-study", inputs, mcfg, sim.seed);
    std::cerr << "error study over " << grid.size() << " swaption(s) -> " << out
              << "/error_study.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Libor market model swaption pricing and covariance calibration"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    InstrumentArgs in;
    int order = 1;
    bool level_in_density = false;
    std::string out = "out";
    std::string curve_file, quotes_file, config_file;
    double start_years = 0.0, end_years = 0.0, expiry = -1.0, strike = -1.0;
    std::vector<std::string> grid;
    lmmcal::SimConfig sim;
    sim.steps_per_period = 8;

    auto* price = app.add_subcommand("price", "price swaptions as basket options (order 0/1)");
    price->add_option("--curve", in.curve_file, "curve CSV")->required()->check(CLI::ExistingFile);
    price->add_option("--vols", in.vol_file, "volatility JSON")->required()->check(CLI::ExistingFile);
    price->add_option("--start", in.start_years, "swap start, years")->required();
    price->add_option("--end", in.end_years, "swap end (final payment), years")->required();
    price->add_option("--strike", in.strikes, "strike(s)")->required();
    price->add_option("--order", order, "expansion order")->check(CLI::Range(0, 1));
    price->add_flag("--level-in-density", level_in_density,
                    "use ln(level/strike) inside the correction density");
    price->add_option("--out", out, "output directory");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo swaption pricing (full model)");
    simulate->add_option("--curve", in.curve_file, "curve CSV")->required()->check(CLI::ExistingFile);
    simulate->add_option("--vols", in.vol_file, "volatility JSON")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--start", in.start_years, "swap start, years")->required();
    simulate->add_option("--end", in.end_years, "swap end (final payment), years")->required();
    simulate->add_option("--strike", in.strikes, "strike(s)")->required();
    simulate->add_option("--paths", sim.paths, "Monte Carlo paths");
    simulate->add_option("--seed", sim.seed, "RNG seed");
    simulate->add_option("--steps-per-period", sim.steps_per_period, "Euler substeps per period");
    simulate->add_option("--target-ci", sim.target_ci,
                         "halve-width target: escalate paths until 1.96*SE <= target");
    simulate->add_option("--rate-cap", sim.rate_cap, "explosion guard on simulated rates");
    bool no_antithetic = false;
    simulate->add_flag("--no-antithetic", no_antithetic, "disable antithetic pairs");
    simulate->add_option("--out", out, "output directory");

    auto* calibrate =
        app.add_subcommand("calibrate", "fit a forward-rate covariance matrix to quotes");
    calibrate->add_option("--curve", curve_file, "curve CSV")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--quotes", quotes_file, "quotes CSV")
        ->required()
        ->check(CLI::ExistingFile);
    calibrate->add_option("--config", config_file, "solver/objective JSON")
        ->check(CLI::ExistingFile);
    calibrate->add_option("--out", out, "output directory");

    auto* bounds = app.add_subcommand("bounds", "arbitrage price bounds for a target swaption");
    bounds->add_option("--curve", curve_file, "curve CSV")->required()->check(CLI::ExistingFile);
    bounds->add_option("--quotes", quotes_file, "quotes CSV")->required()->check(CLI::ExistingFile);
    bounds->add_option("--config", config_file, "solver JSON")->check(CLI::ExistingFile);
    bounds->add_option("--start", start_years, "target swap start, years")->required();
    bounds->add_option("--end", end_years, "target swap end, years")->required();
    bounds->add_option("--expiry", expiry, "variance horizon, years (default: start)");
    bounds->add_option("--strike", strike, "target strike (default: ATM)");
    bounds->add_option("--out", out, "output directory");

    auto* study = app.add_subcommand("error-study",
                                     "approximation-vs-MC error table on a swaption grid");
    study->add_option("--curve", curve_file, "curve CSV")->required()->check(CLI::ExistingFile);
    study->add_option("--quotes", quotes_file, "quotes CSV")->required()->check(CLI::ExistingFile);
    study->add_option("--config", config_file, "solver/objective JSON")->check(CLI::ExistingFile);
    study->add_option("--grid", grid, "swaptions as <start>x<length>, e.g. 1x4")->required();
    study->add_option("--paths", sim.paths, "Monte Carlo paths");
    study->add_option("--seed", sim.seed, "RNG seed");
    study->add_option("--steps-per-period", sim.steps_per_period, "Euler substeps per period");
    study->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*simulate) sim.antithetic = !no_antithetic;
        if (*price) return run_price(in, order, level_in_density, out);
        if (*simulate) return run_simulate(in, sim, out);
        if (*calibrate) return run_calibrate(curve_file, quotes_file, config_file, out);
        if (*bounds)
            return run_bounds(curve_file, quotes_file, config_file, start_years, end_years, expiry,
                              strike, out);
        if (*study) return run_error_study(curve_file, quotes_file, config_file, grid, sim, out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
