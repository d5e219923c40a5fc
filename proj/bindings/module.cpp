#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lmmcal/basket.hpp"
#include "lmmcal/calibration.hpp"
#include "lmmcal/curve.hpp"
#include "lmmcal/io.hpp"
#include "lmmcal/math.hpp"
#include "lmmcal/mc.hpp"
#include "lmmcal/rank.hpp"
#include "lmmcal/vol.hpp"

namespace py = pybind11;
using namespace lmmcal;

PYBIND11_MODULE(lmmcal, m) {
    m.doc() = "Libor market model swaption pricing and covariance calibration";

    m.def("black_scholes", &black_scholes, py::arg("forward"), py::arg("strike"),
          py::arg("variance"));
    m.def("implied_variance", &implied_variance, py::arg("forward"), py::arg("strike"),
          py::arg("price"));
    m.def("normal_cdf", &normal_cdf);
    m.def("inverse_normal_cdf", &inverse_normal_cdf);

    py::class_<YieldCurve>(m, "YieldCurve")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("tenors"),
             py::arg("discounts"))
        .def_static("from_forwards", &YieldCurve::from_forwards, py::arg("tenors"),
                    py::arg("forwards"))
        .def_property_readonly("tenors", &YieldCurve::tenor_grid)
        .def_property_readonly("discounts", &YieldCurve::discount_factors)
        .def_property_readonly("delta", &YieldCurve::delta)
        .def_property_readonly("forward_count", &YieldCurve::forward_count)
        .def("discount", &YieldCurve::discount, py::arg("T"));

    py::class_<SwapSpec>(m, "SwapSpec")
        .def(py::init([](int start_index, int end_index, double coverage) {
                 return SwapSpec{start_index, end_index, coverage};
             }),
             py::arg("start_index"), py::arg("end_index"), py::arg("coverage"))
        .def_readwrite("start_index", &SwapSpec::start_index)
        .def_readwrite("end_index", &SwapSpec::end_index)
        .def_readwrite("coverage", &SwapSpec::coverage)
        .def_property_readonly("periods", &SwapSpec::periods);

    py::class_<SwapDecomposition>(m, "SwapDecomposition")
        .def_readonly("swap_rate", &SwapDecomposition::swap_rate)
        .def_readonly("level", &SwapDecomposition::level)
        .def_readonly("weights", &SwapDecomposition::weights)
        .def_readonly("normalized_weights", &SwapDecomposition::normalized_weights)
        .def_readonly("forwards", &SwapDecomposition::forwards)
        .def_readonly("start_index", &SwapDecomposition::start_index);

    m.def("forward_libor", &forward_libor, py::arg("curve"), py::arg("i"));
    m.def("grid_index", &grid_index, py::arg("curve"), py::arg("years"));
    m.def("swap_rate_and_level", &swap_rate_and_level, py::arg("curve"), py::arg("spec"));
    m.def("basket_weights", &basket_weights, py::arg("curve"), py::arg("spec"));
    m.def("omega_matrix", &omega_matrix, py::arg("decomposition"));

    py::class_<VolSpec>(m, "VolSpec")
        .def(py::init<std::vector<double>, std::vector<Eigen::MatrixXd>>(),
             py::arg("boundaries"), py::arg("asset_vectors"))
        .def_static("from_covariances", &VolSpec::from_covariances, py::arg("boundaries"),
                    py::arg("gammas"))
        .def_static("stationary", &VolSpec::stationary, py::arg("gamma"), py::arg("horizon"))
        .def_property_readonly("periods", &VolSpec::periods)
        .def_property_readonly("assets", &VolSpec::assets)
        .def_property_readonly("dim", &VolSpec::dim)
        .def("gamma", &VolSpec::gamma, py::arg("period"))
        .def("loadings", &VolSpec::loadings, py::arg("period"))
        .def("slice", &VolSpec::slice, py::arg("lo"), py::arg("count"))
        .def("max_vol_norm", &VolSpec::max_vol_norm);

    py::class_<BasketSpec>(m, "BasketSpec")
        .def(py::init([](Eigen::VectorXd weights, Eigen::VectorXd forwards, double strike,
                         double t, double T) {
                 BasketSpec b;
                 b.weights = std::move(weights);
                 b.forwards = std::move(forwards);
                 b.strike = strike;
                 b.t = t;
                 b.T = T;
                 return b;
             }),
             py::arg("weights"), py::arg("forwards"), py::arg("strike"), py::arg("t") = 0.0,
             py::arg("T") = 0.0)
        .def_readwrite("weights", &BasketSpec::weights)
        .def_readwrite("forwards", &BasketSpec::forwards)
        .def_readwrite("strike", &BasketSpec::strike)
        .def_readwrite("t", &BasketSpec::t)
        .def_readwrite("T", &BasketSpec::T)
        .def("basket_value", &BasketSpec::basket_value)
        .def("normalized_weights", &BasketSpec::normalized_weights);

    py::class_<PriceBreakdown>(m, "PriceBreakdown")
        .def_readonly("order_zero", &PriceBreakdown::order_zero)
        .def_readonly("order_one", &PriceBreakdown::order_one)
        .def_readonly("total", &PriceBreakdown::total)
        .def_readonly("variance", &PriceBreakdown::variance);

    py::class_<QuadratureConfig>(m, "QuadratureConfig")
        .def(py::init<>())
        .def_readwrite("nodes_per_period", &QuadratureConfig::nodes_per_period)
        .def_readwrite("rel_tol", &QuadratureConfig::rel_tol)
        .def_readwrite("max_nodes_per_period", &QuadratureConfig::max_nodes_per_period);

    m.def("basket_variance", &basket_variance, py::arg("omega"), py::arg("vols"), py::arg("t"),
          py::arg("T"));
    m.def("order_zero_price", &order_zero_price, py::arg("basket"), py::arg("vols"));
    m.def("order_one_correction", &order_one_correction, py::arg("basket"), py::arg("vols"),
          py::arg("quad") = QuadratureConfig{});
    m.def("price_basket", &price_basket, py::arg("basket"), py::arg("vols"), py::arg("order"),
          py::arg("quad") = QuadratureConfig{});

    py::class_<SwaptionOptions>(m, "SwaptionOptions")
        .def(py::init<>())
        .def_readwrite("order", &SwaptionOptions::order)
        .def_readwrite("level_in_density", &SwaptionOptions::level_in_density)
        .def_readwrite("quad", &SwaptionOptions::quad);

    m.def("price_swaption", &price_swaption, py::arg("curve"), py::arg("spec"), py::arg("vols"),
          py::arg("strike"), py::arg("options") = SwaptionOptions{});
    m.def("price_swaption_breakdown", &price_swaption_breakdown, py::arg("curve"),
          py::arg("spec"), py::arg("vols"), py::arg("strike"),
          py::arg("options") = SwaptionOptions{});
    m.def("weight_contribution_bound", &weight_contribution_bound, py::arg("curve"),
          py::arg("spec"), py::arg("vols"), py::arg("gamma_bar"));

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("paths", &SimConfig::paths)
        .def_readwrite("steps_per_period", &SimConfig::steps_per_period)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("antithetic", &SimConfig::antithetic)
        .def_readwrite("rate_cap", &SimConfig::rate_cap)
        .def_readwrite("target_ci", &SimConfig::target_ci);

    py::class_<McEstimate>(m, "McEstimate")
        .def_readonly("price", &McEstimate::price)
        .def_readonly("std_error", &McEstimate::std_error)
        .def_readonly("paths_used", &McEstimate::paths_used);

    m.def("simulate_basket_bs", &simulate_basket_bs, py::arg("basket"), py::arg("vols"),
          py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("simulate_lmm_swaption", &simulate_lmm_swaption, py::arg("curve"), py::arg("vols"),
          py::arg("spec"), py::arg("strike"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("mc_tracking_error", &mc_tracking_error, py::arg("basket"), py::arg("vols"),
          py::arg("config"), py::call_guard<py::gil_scoped_release>());

    py::class_<WeightStabilityStats>(m, "WeightStabilityStats")
        .def_readonly("fra_vol", &WeightStabilityStats::fra_vol)
        .def_readonly("weight_vol", &WeightStabilityStats::weight_vol)
        .def_readonly("ratio", &WeightStabilityStats::ratio)
        .def_readonly("paths_used", &WeightStabilityStats::paths_used);
    m.def("simulate_swap_weight_paths", &simulate_swap_weight_paths, py::arg("curve"),
          py::arg("vols"), py::arg("spec"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<MarketQuote> quote(m, "MarketQuote");
    py::enum_<MarketQuote::Kind>(quote, "Kind")
        .value("caplet", MarketQuote::Kind::caplet)
        .value("swaption", MarketQuote::Kind::swaption);
    quote
        .def(py::init([](MarketQuote::Kind kind, int start_index, int end_index, double expiry,
                         double bid_vol, double ask_vol) {
                 return MarketQuote{kind, start_index, end_index, expiry, bid_vol, ask_vol};
             }),
             py::arg("kind"), py::arg("start_index"), py::arg("end_index"), py::arg("expiry"),
             py::arg("bid_vol"), py::arg("ask_vol"))
        .def_readwrite("kind", &MarketQuote::kind)
        .def_readwrite("start_index", &MarketQuote::start_index)
        .def_readwrite("end_index", &MarketQuote::end_index)
        .def_readwrite("expiry", &MarketQuote::expiry)
        .def_readwrite("bid_vol", &MarketQuote::bid_vol)
        .def_readwrite("ask_vol", &MarketQuote::ask_vol);

    py::class_<VarianceBand>(m, "VarianceBand")
        .def_readonly("A", &VarianceBand::A)
        .def_readonly("lower", &VarianceBand::lower)
        .def_readonly("upper", &VarianceBand::upper)
        .def_readonly("maturity", &VarianceBand::maturity);

    py::class_<CalibrationInstance> inst(m, "CalibrationInstance");
    py::enum_<CalibrationInstance::Mode>(inst, "Mode")
        .value("single_matrix", CalibrationInstance::Mode::single_matrix)
        .value("per_period", CalibrationInstance::Mode::per_period);
    inst.def_readonly("dimension", &CalibrationInstance::dimension)
        .def_readonly("mode", &CalibrationInstance::mode)
        .def_readonly("constraints", &CalibrationInstance::constraints)
        .def_readonly("period_boundaries", &CalibrationInstance::period_boundaries);

    py::class_<Objective> obj(m, "Objective");
    py::enum_<Objective::Norm>(obj, "Norm")
        .value("frobenius", Objective::Norm::frobenius)
        .value("spectral", Objective::Norm::spectral);
    obj.def_static("feasibility", &Objective::feasibility)
        .def_static("linear_bound", &Objective::linear_bound, py::arg("direction"),
                    py::arg("maximize"))
        .def_static("distance_to_target", &Objective::distance_to_target, py::arg("target"),
                    py::arg("norm") = Objective::Norm::frobenius)
        .def_static("max_entropy", &Objective::max_entropy, py::arg("prior"))
        .def_static("smoothness", &Objective::smoothness)
        .def_static("tikhonov", &Objective::tikhonov, py::arg("alpha"),
                    py::arg("mid_targets") = std::vector<double>{})
        .def("with_smoothness", &Objective::with_smoothness, py::arg("weight"),
             py::return_value_policy::reference_internal)
        .def("with_trace_penalty", &Objective::with_trace_penalty, py::arg("weight"),
             py::return_value_policy::reference_internal);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("feas_tol", &SolverConfig::feas_tol)
        .def_readwrite("psd_tol", &SolverConfig::psd_tol)
        .def_readwrite("obj_tol", &SolverConfig::obj_tol)
        .def_readwrite("max_iterations", &SolverConfig::max_iterations)
        .def_readwrite("prox_outer", &SolverConfig::prox_outer)
        .def_readwrite("prox_inner_sweeps", &SolverConfig::prox_inner_sweeps)
        .def_readwrite("subgrad_outer", &SolverConfig::subgrad_outer)
        .def_readwrite("subgrad_inner_sweeps", &SolverConfig::subgrad_inner_sweeps)
        .def_readwrite("step", &SolverConfig::step)
        .def_readwrite("unbounded_norm", &SolverConfig::unbounded_norm)
        .def_readwrite("maxent_floor", &SolverConfig::maxent_floor);

    py::class_<CovarianceResult>(m, "CovarianceResult")
        .def_readonly("X", &CovarianceResult::X)
        .def_readonly("per_period", &CovarianceResult::per_period)
        .def_readonly("period_scales", &CovarianceResult::period_scales)
        .def_readonly("objective_value", &CovarianceResult::objective_value)
        .def_readonly("residuals", &CovarianceResult::residuals)
        .def_readonly("iterations", &CovarianceResult::iterations)
        .def_readonly("converged", &CovarianceResult::converged)
        .def_readonly("status", &CovarianceResult::status)
        .def_readonly("min_eigenvalue", &CovarianceResult::min_eigenvalue);

    m.def("build_instance", &build_instance, py::arg("curve"), py::arg("quotes"),
          py::arg("mode") = CalibrationInstance::Mode::single_matrix);
    m.def("solve", &solve, py::arg("instance"), py::arg("objective"),
          py::arg("config") = SolverConfig{}, py::call_guard<py::gil_scoped_release>());

    py::class_<PriceBounds>(m, "PriceBounds")
        .def_readonly("min_variance", &PriceBounds::min_variance)
        .def_readonly("max_variance", &PriceBounds::max_variance)
        .def_readonly("min_price", &PriceBounds::min_price)
        .def_readonly("max_price", &PriceBounds::max_price)
        .def_readonly("bounded_above", &PriceBounds::bounded_above)
        .def_readonly("min_status", &PriceBounds::min_status)
        .def_readonly("max_status", &PriceBounds::max_status);
    m.def("price_bounds", &price_bounds, py::arg("instance"), py::arg("curve"),
          py::arg("target_spec"), py::arg("T_target"), py::arg("config") = SolverConfig{},
          py::arg("strike") = -1.0, py::call_guard<py::gil_scoped_release>());

    m.def("smoothness_value", &smoothness_value, py::arg("X"));
    m.def("project_to_psd_cone", &project_to_psd_cone, py::arg("X"));

    py::class_<Spectrum>(m, "Spectrum")
        .def_readonly("eigenvalues", &Spectrum::eigenvalues)
        .def_readonly("eigenvectors", &Spectrum::eigenvectors)
        .def_readonly("fractions", &Spectrum::fractions);
    m.def("spectrum", &spectrum, py::arg("X"));
    m.def("reduce_rank", &reduce_rank, py::arg("X"), py::arg("d"));
    m.def("factor_loadings", &factor_loadings, py::arg("X"), py::arg("d"));
    m.def("count_sign_changes", &count_sign_changes, py::arg("v"), py::arg("tol") = 1e-12);

    m.def("read_curve", &io::read_curve, py::arg("path"));
    m.def("read_vol_spec", &io::read_vol_spec, py::arg("path"));
    m.def("read_quotes", &io::read_quotes, py::arg("path"), py::arg("curve"));
}
