#include "lmmcal/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lmmcal/rank.hpp"

namespace lmmcal::io {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
    throw std::invalid_argument(path + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& path, int line, const std::string& field) {
    double v = 0.0;
    std::size_t used = 0;
    try {
        v = std::stod(field, &used);
    } catch (const std::invalid_argument&) {
        fail(path, line, "expected a number, got '" + field + "'");
    } catch (const std::out_of_range&) {
        fail(path, line, "number out of range: '" + field + "'");
    }
    if (used != field.size()) fail(path, line, "trailing junk in number '" + field + "'");
    return v;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument(path + ": cannot open");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument(path + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

int quote_grid_index(const YieldCurve& curve, double years, const std::string& path, int line,
                     const char* what) {
    try {
        return grid_index(curve, years);
    } catch (const std::invalid_argument&) {
        fail(path, line,
             std::string(what) + " " + std::to_string(years) + " is off the tenor grid");
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot write");
    out << text;
    if (!out) throw std::runtime_error(path + ": write failed");
}

json matrix_to_json(const Eigen::MatrixXd& X) {
    json rows = json::array();
    for (int i = 0; i < X.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < X.cols(); ++j) row.push_back(X(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw std::invalid_argument(where + ": expected an array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.front().size());
    Eigen::MatrixXd X(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols)
            throw std::invalid_argument(where + ": ragged rows");
        for (int c = 0; c < cols; ++c) X(i, c) = j[i][c].get<double>();
    }
    return X;
}

}  // namespace

YieldCurve read_curve(const std::string& path) {
    auto lines = read_lines(path);
    int ln = 0;
    std::string header;
    std::size_t i = 0;
    for (; i < lines.size(); ++i) {
        ++ln;
        if (!trim(lines[i]).empty()) {
            header = trim(lines[i]);
            ++i;
            break;
        }
    }
    bool discount_form;
    if (header == "tenor_years,discount_factor")
        discount_form = true;
    else if (header == "tenor_years,forward_rate")
        discount_form = false;
    else
        fail(path, ln, "unknown curve header '" + header + "'");

    std::vector<double> tenors, values;
    for (; i < lines.size(); ++i) {
        ++ln;
        std::string line = trim(lines[i]);
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 2) fail(path, ln, "expected 2 fields, got " + std::to_string(f.size()));
        tenors.push_back(parse_double(path, ln, f[0]));
        values.push_back(parse_double(path, ln, f[1]));
    }
    if (tenors.size() < 2) fail(path, ln, "curve needs at least two rows");
    try {
        return discount_form ? YieldCurve(tenors, values) : YieldCurve::from_forwards(tenors, values);
    } catch (const std::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

VolSpec read_vol_spec(const std::string& path) {
    json j = parse_json_file(path);
    try {
        if (!j.contains("periods")) throw std::invalid_argument("missing 'periods'");
        std::vector<double> boundaries;
        for (const auto& p : j.at("periods")) {
            if (!p.is_array() || p.size() != 2)
                throw std::invalid_argument("each period must be [start, end]");
            double a = p[0].get<double>(), b = p[1].get<double>();
            if (boundaries.empty())
                boundaries.push_back(a);
            else if (std::abs(boundaries.back() - a) > 1e-12)
                throw std::invalid_argument("periods must be contiguous");
            boundaries.push_back(b);
        }
        const int P = static_cast<int>(boundaries.size()) - 1;

        if (j.contains("vols")) {
            const auto& vols = j.at("vols");
            const int assets = static_cast<int>(vols.size());
            if (assets == 0) throw std::invalid_argument("'vols' is empty");
            const int d = j.value("d", static_cast<int>(vols[0][0].size()));
            std::vector<Eigen::MatrixXd> per_period(static_cast<std::size_t>(P),
                                                    Eigen::MatrixXd(assets, d));
            for (int a = 0; a < assets; ++a) {
                if (static_cast<int>(vols[a].size()) != P)
                    throw std::invalid_argument("'vols' rows must cover every period");
                for (int p = 0; p < P; ++p) {
                    if (static_cast<int>(vols[a][p].size()) != d)
                        throw std::invalid_argument("vol vector length does not match 'd'");
                    for (int c = 0; c < d; ++c)
                        per_period[static_cast<std::size_t>(p)](a, c) = vols[a][p][c].get<double>();
                }
            }
            return VolSpec(boundaries, per_period);
        }
        if (j.contains("gamma")) {
            const auto& gj = j.at("gamma");
            if (static_cast<int>(gj.size()) != P)
                throw std::invalid_argument("'gamma' must have one matrix per period");
            std::vector<Eigen::MatrixXd> gammas;
            for (int p = 0; p < P; ++p) gammas.push_back(matrix_from_json(gj[p], "gamma"));
            return VolSpec::from_covariances(boundaries, gammas);
        }
        throw std::invalid_argument("need 'vols' or 'gamma'");
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

std::vector<MarketQuote> read_quotes(const std::string& path, const YieldCurve& curve) {
    auto lines = read_lines(path);
    std::vector<MarketQuote> quotes;
    int ln = 0;
    bool saw_header = false;
    for (const auto& raw : lines) {
        ++ln;
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != "instrument,start_years,end_years,expiry_years,bid_vol,ask_vol")
                fail(path, ln, "unknown quotes header '" + line + "'");
            saw_header = true;
            continue;
        }
        auto f = split_csv(line);
        if (f.size() != 6) fail(path, ln, "expected 6 fields, got " + std::to_string(f.size()));
        MarketQuote q;
        if (f[0] == "caplet")
            q.kind = MarketQuote::Kind::caplet;
        else if (f[0] == "swaption")
            q.kind = MarketQuote::Kind::swaption;
        else
            fail(path, ln, "unknown instrument '" + f[0] + "'");
        double start_years = parse_double(path, ln, f[1]);
        double end_years = parse_double(path, ln, f[2]);
        q.start_index = quote_grid_index(curve, start_years, path, ln, "start");
        int end_grid = quote_grid_index(curve, end_years, path, ln, "end");
        if (end_grid <= q.start_index)
            fail(path, ln, "end_years must be at least one period past start_years");
        q.end_index = end_grid - 1;
        q.expiry = parse_double(path, ln, f[3]);
        q.bid_vol = parse_double(path, ln, f[4]);
        q.ask_vol = parse_double(path, ln, f[5]);
        if (q.kind == MarketQuote::Kind::caplet && q.end_index != q.start_index)
            fail(path, ln, "caplet must span exactly one period");
        quotes.push_back(q);
    }
    if (!saw_header) fail(path, ln, "missing quotes header");
    return quotes;
}

CalibConfig read_config(const std::string& path) {
    CalibConfig cfg;
    if (path.empty()) {
        cfg.raw = json::object();
        return cfg;
    }
    json j = parse_json_file(path);
    cfg.raw = j;
    try {
        auto& s = cfg.solver;
        s.feas_tol = j.value("feas_tol", s.feas_tol);
        s.psd_tol = j.value("psd_tol", s.psd_tol);
        s.obj_tol = j.value("obj_tol", s.obj_tol);
        s.max_iterations = j.value("max_iterations", s.max_iterations);
        s.prox_outer = j.value("prox_outer", s.prox_outer);
        s.prox_inner_sweeps = j.value("prox_inner_sweeps", s.prox_inner_sweeps);
        s.subgrad_outer = j.value("subgrad_outer", s.subgrad_outer);
        s.subgrad_inner_sweeps = j.value("subgrad_inner_sweeps", s.subgrad_inner_sweeps);
        s.step = j.value("step", s.step);
        s.unbounded_norm = j.value("unbounded_norm", s.unbounded_norm);
        s.maxent_floor = j.value("maxent_floor", s.maxent_floor);

        std::string mode = j.value("mode", "single_matrix");
        if (mode == "single_matrix")
            cfg.mode = CalibrationInstance::Mode::single_matrix;
        else if (mode == "per_period")
            cfg.mode = CalibrationInstance::Mode::per_period;
        else
            throw std::invalid_argument("unknown mode '" + mode + "'");

        std::string name = j.value("objective", "feasibility");
        Eigen::MatrixXd target;
        if (j.contains("target")) target = matrix_from_json(j.at("target"), "target");
        if (name == "feasibility") {
            cfg.objective = Objective::feasibility();
        } else if (name == "linear_bound") {
            if (target.size() == 0) throw std::invalid_argument("linear_bound needs 'target'");
            cfg.objective = Objective::linear_bound(target, j.value("maximize", false));
        } else if (name == "distance" || name == "distance_to_target") {
            if (target.size() == 0) throw std::invalid_argument("distance needs 'target'");
            std::string norm = j.value("norm", "frobenius");
            if (norm != "frobenius" && norm != "spectral")
                throw std::invalid_argument("unknown norm '" + norm + "'");
            cfg.objective = Objective::distance_to_target(
                target, norm == "spectral" ? Objective::Norm::spectral : Objective::Norm::frobenius);
        } else if (name == "max_entropy") {
            if (target.size() == 0) throw std::invalid_argument("max_entropy needs 'target'");
            cfg.objective = Objective::max_entropy(target);
        } else if (name == "smoothness") {
            cfg.objective = Objective::smoothness();
            cfg.objective.smoothness_weight = j.value("smoothness_weight", 1.0);
        } else if (name == "tikhonov") {
            std::vector<double> mids;
            if (j.contains("mid_targets")) mids = j.at("mid_targets").get<std::vector<double>>();
            cfg.objective = Objective::tikhonov(j.value("alpha", 1e-4), std::move(mids));
        } else {
            throw std::invalid_argument("unknown objective '" + name + "'");
        }
        if (name != "smoothness" && j.contains("smoothness_weight"))
            cfg.objective.with_smoothness(j.at("smoothness_weight").get<double>());
        if (j.contains("trace_weight"))
            cfg.objective.with_trace_penalty(j.at("trace_weight").get<double>());
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return cfg;
}

json result_to_json(const CovarianceResult& result) {
    json j;
    j["matrix"] = matrix_to_json(result.X);
    Spectrum sp = spectrum(result.X);
    j["eigenvalues"] = std::vector<double>(sp.eigenvalues.data(),
                                           sp.eigenvalues.data() + sp.eigenvalues.size());
    j["residuals"] = std::vector<double>(result.residuals.data(),
                                         result.residuals.data() + result.residuals.size());
    j["log"] = {{"status", result.status},
                {"converged", result.converged},
                {"iterations", result.iterations},
                {"objective_value", result.objective_value},
                {"min_eigenvalue", result.min_eigenvalue},
                {"max_residual",
                 result.residuals.size() > 0 ? result.residuals.maxCoeff() : 0.0}};
    if (!result.period_scales.empty()) {
        j["period_scales"] = result.period_scales;
        json pp = json::array();
        for (const auto& X : result.per_period) pp.push_back(matrix_to_json(X));
        j["per_period"] = std::move(pp);
    }
    return j;
}

void write_result_json(const std::string& path, const CovarianceResult& result) {
    write_text(path, result_to_json(result).dump(2) + "\n");
}

void write_spectrum_csv(const std::string& path, const Eigen::MatrixXd& X) {
    Spectrum sp = spectrum(X);
    std::ostringstream out;
    out << "index,eigenvalue,fraction";
    for (int i = 0; i < X.rows(); ++i) out << ",v" << i + 1;
    out << "\n";
    for (int k = 0; k < sp.eigenvalues.size(); ++k) {
        out << k << "," << fmt(sp.eigenvalues[k]) << "," << fmt(sp.fractions[k]);
        for (int i = 0; i < sp.eigenvectors.rows(); ++i)
            out << "," << fmt(sp.eigenvectors(i, k));
        out << "\n";
    }
    write_text(path, out.str());
}

void write_mc_csv(const std::string& path, const std::vector<McRow>& rows) {
    std::ostringstream out;
    out << "strike,price,std_error\n";
    for (const auto& r : rows)
        out << fmt(r.strike) << "," << fmt(r.price) << "," << fmt(r.std_error) << "\n";
    write_text(path, out.str());
}

std::string config_hash(const json& config) {
    std::string dump = config.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::vector<std::string>& inputs, const json& config,
                    std::uint64_t seed) {
    json j;
    j["command"] = command;
    j["inputs"] = inputs;
    j["config_hash"] = config_hash(config);
    j["seed"] = seed;
    j["output_directory"] = out_dir;
    j["tool_version"] = "lmmcal 0.1.0";
    write_text(out_dir + "/manifest.json", j.dump(2) + "\n");
}

}  // namespace lmmcal::io
