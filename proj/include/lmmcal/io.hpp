#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lmmcal/calibration.hpp"
#include "lmmcal/curve.hpp"
#include "lmmcal/vol.hpp"

namespace lmmcal::io {

// CSV with header `tenor_years,discount_factor` (full grid T_1..T_{N+1}) or
// `tenor_years,forward_rate` (reset times T_1..T_N; the grid gains one period).
YieldCurve read_curve(const std::string& path);

// JSON volatility path. Vector form:
//   {"periods": [[0.0,1.0],[1.0,5.0]], "d": 2,
//    "vols": [asset][period] = [d numbers]}
// Covariance form (order-zero pricing input):
//   {"periods": [...], "gamma": [period] = [[n x n]]}
VolSpec read_vol_spec(const std::string& path);

// CSV `instrument,start_years,end_years,expiry_years,bid_vol,ask_vol`;
// end_years is the final payment date, so the last reset sits one period
// earlier. instrument is caplet or swaption.
std::vector<MarketQuote> read_quotes(const std::string& path, const YieldCurve& curve);

struct CalibConfig {
    SolverConfig solver;
    Objective objective = Objective::feasibility();
    CalibrationInstance::Mode mode = CalibrationInstance::Mode::single_matrix;
    nlohmann::json raw;  // as parsed, for hashing/manifests
};

// JSON config: tolerances, iteration caps, objective selection and weights.
// Empty path yields all defaults.
CalibConfig read_config(const std::string& path);

nlohmann::json result_to_json(const CovarianceResult& result);
void write_result_json(const std::string& path, const CovarianceResult& result);

// One row per eigenpair: index, eigenvalue, trace fraction, then the
// eigenvector components.
void write_spectrum_csv(const std::string& path, const Eigen::MatrixXd& X);

struct McRow {
    double strike = 0.0;
    double price = 0.0;
    double std_error = 0.0;
};
void write_mc_csv(const std::string& path, const std::vector<McRow>& rows);

// FNV-1a over the canonical dump, as a hex string.
std::string config_hash(const nlohmann::json& config);

// manifest.json dropped next to every command's outputs.
void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::vector<std::string>& inputs, const nlohmann::json& config,
                    std::uint64_t seed);

}  // namespace lmmcal::io
