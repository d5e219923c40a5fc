#include "lmmcal/mc.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "lmmcal/rng.hpp"

namespace lmmcal {

int mc_thread_budget() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("LMM_CALIB_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && cap < hw) hw = static_cast<int>(cap);
    }
    return hw;
}

namespace {

constexpr std::int64_t kBlock = 4096;

// Runs fn(unit, acc) over unit = 0..units-1, each unit adding into an
// `arity`-wide accumulator owned by its fixed block. Blocks are summed
// pairwise in index order, so the totals do not depend on thread count.
std::vector<double> reduce_deterministic(std::int64_t units, int arity,
                                         const std::function<void(std::int64_t, double*)>& fn) {
    const std::int64_t nblocks = (units + kBlock - 1) / kBlock;
    std::vector<double> acc(static_cast<std::size_t>(nblocks) * arity, 0.0);
    std::atomic<std::int64_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::int64_t b = next.fetch_add(1);
            if (b >= nblocks) return;
            double* out = acc.data() + static_cast<std::size_t>(b) * arity;
            const std::int64_t lo = b * kBlock, hi = std::min(units, lo + kBlock);
            for (std::int64_t u = lo; u < hi; ++u) fn(u, out);
        }
    };
    const int nthreads = static_cast<int>(std::min<std::int64_t>(mc_thread_budget(), nblocks));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::vector<double> total(static_cast<std::size_t>(arity), 0.0);
    const std::function<void(std::int64_t, std::int64_t, double*)> tree =
        [&](std::int64_t lo, std::int64_t hi, double* out) {
            if (hi - lo <= 8) {
                for (std::int64_t b = lo; b < hi; ++b)
                    for (int j = 0; j < arity; ++j)
                        out[j] += acc[static_cast<std::size_t>(b) * arity + j];
                return;
            }
            const std::int64_t mid = lo + (hi - lo) / 2;
            std::vector<double> left(static_cast<std::size_t>(arity), 0.0);
            std::vector<double> right(static_cast<std::size_t>(arity), 0.0);
            tree(lo, mid, left.data());
            tree(mid, hi, right.data());
            for (int j = 0; j < arity; ++j) out[j] += left[j] + right[j];
        };
    tree(0, nblocks, total.data());
    return total;
}

void check_config(const SimConfig& c) {
    if (c.paths < 2) throw std::invalid_argument("SimConfig: need at least 2 paths");
    if (c.steps_per_period < 1) throw std::invalid_argument("SimConfig: steps_per_period >= 1");
}

McEstimate estimate_from_moments(double sum, double sumsq, std::int64_t n,
                                 std::int64_t paths_used) {
    McEstimate e;
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
    e.price = mean;
    e.std_error = std::sqrt(var / static_cast<double>(n));
    e.paths_used = paths_used;
    return e;
}

// One sampler evaluation = one (possibly antithetic-averaged) payoff sample.
template <class Sampler>
McEstimate run_mc(const SimConfig& config, const Sampler& sampler) {
    check_config(config);
    std::int64_t paths = config.paths;
    for (;;) {
        const std::int64_t units = config.antithetic ? std::max<std::int64_t>(1, paths / 2) : paths;
        auto tot = reduce_deterministic(units, 2, [&](std::int64_t u, double* out) {
            const double v = sampler(u, config.antithetic);
            out[0] += v;
            out[1] += v * v;
        });
        const std::int64_t used = config.antithetic ? 2 * units : units;
        McEstimate e = estimate_from_moments(tot[0], tot[1], units, used);
        if (config.target_ci <= 0.0 || 1.96 * e.std_error <= config.target_ci ||
            paths >= (std::int64_t(1) << 26))
            return e;
        paths *= 2;
    }
}

struct PiecePlan {
    double a, b;                 // slice of [t, T]
    Eigen::MatrixXd loadings;    // assets x draw-dim
    Eigen::VectorXd ito_drift;   // -0.5 * diag(Gamma) per unit time
    Eigen::VectorXd c;           // (Gamma w)_i - w'Gamma w, frozen weights
    double vw;                   // w'Gamma w
};

std::vector<PiecePlan> plan_pieces(const VolSpec& vols, const Eigen::VectorXd& w, double t,
                                   double T) {
    std::vector<PiecePlan> plan;
    vols.for_each_piece(t, T, [&](int p, double a, double b) {
        PiecePlan pp;
        pp.a = a;
        pp.b = b;
        pp.loadings = vols.loadings(p);
        pp.ito_drift = -0.5 * vols.gamma(p).diagonal();
        const Eigen::VectorXd gw = vols.gamma(p) * w;
        pp.vw = w.dot(gw);
        pp.c = gw.array() - pp.vw;
        plan.push_back(std::move(pp));
    });
    return plan;
}

}  // namespace

McEstimate simulate_basket_bs(const BasketSpec& basket, const VolSpec& vols,
                              const SimConfig& config) {
    basket.validate(vols);
    const Eigen::VectorXd w = basket.normalized_weights();
    const auto plan = plan_pieces(vols, w, basket.t, basket.T);
    const int n = static_cast<int>(basket.forwards.size());
    const Eigen::VectorXd logf0 = basket.forwards.array().max(1e-300).log();

    auto sampler = [&](std::int64_t u, bool antithetic) -> double {
        NormalStream rng(config.seed, static_cast<std::uint64_t>(u));
        Eigen::VectorXd lf[2] = {logf0, logf0};
        const int legs = antithetic ? 2 : 1;
        Eigen::VectorXd z;
        for (const auto& pp : plan) {
            const double len = pp.b - pp.a, sq = std::sqrt(len);
            z.resize(pp.loadings.cols());
            for (int j = 0; j < z.size(); ++j) z[j] = rng.next();
            const Eigen::VectorXd shock = pp.loadings * z * sq;
            const Eigen::VectorXd drift = pp.ito_drift * len;
            lf[0] += drift + shock;
            if (legs == 2) lf[1] += drift - shock;
        }
        double acc = 0.0;
        for (int leg = 0; leg < legs; ++leg) {
            double bv = 0.0;
            for (int i = 0; i < n; ++i)
                bv += basket.weights[i] * (basket.forwards[i] > 0.0 ? std::exp(lf[leg][i]) : 0.0);
            acc += std::max(bv - basket.strike, 0.0);
        }
        return acc / legs;
    };
    return run_mc(config, sampler);
}

McEstimate mc_tracking_error(const BasketSpec& basket, const VolSpec& vols,
                             const SimConfig& config) {
    basket.validate(vols);
    const Eigen::VectorXd w = basket.normalized_weights();
    const auto plan = plan_pieces(vols, w, basket.t, basket.T);
    const double V = basket_variance(w * w.transpose(), vols, basket.t, basket.T);
    if (!(V > 0.0))
        throw std::invalid_argument("mc_tracking_error: needs positive cumulative variance");
    const int n = static_cast<int>(basket.forwards.size());
    const double k = basket.strike;
    const Eigen::VectorXd logf0 = basket.forwards.array().max(1e-300).log();

    // substep grid with the remaining variance at each node, precomputed
    struct Step {
        int piece;
        double h;
        double v_rem;  // V(s, T) at the step's left node
    };
    std::vector<Step> steps;
    {
        double used = 0.0;
        for (std::size_t pc = 0; pc < plan.size(); ++pc) {
            const int m = config.steps_per_period;
            const double h = (plan[pc].b - plan[pc].a) / m;
            for (int q = 0; q < m; ++q) {
                steps.push_back({static_cast<int>(pc), h, V - used});
                used += plan[pc].vw * h;
            }
        }
    }

    auto sampler = [&](std::int64_t u, bool antithetic) -> double {
        NormalStream rng(config.seed, static_cast<std::uint64_t>(u));
        Eigen::VectorXd lf[2] = {logf0, logf0};
        double acc[2] = {0.0, 0.0};
        const int legs = antithetic ? 2 : 1;
        Eigen::VectorXd z;
        for (const auto& st : steps) {
            const auto& pp = plan[static_cast<std::size_t>(st.piece)];
            for (int leg = 0; leg < legs; ++leg) {
                if (st.v_rem <= 1e-300) continue;
                const double sv = std::sqrt(st.v_rem);
                double fw = 0.0, num = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double fi =
                        basket.weights[i] * (basket.forwards[i] > 0.0 ? std::exp(lf[leg][i]) : 0.0);
                    fw += fi;
                    num += pp.c[i] * fi;
                }
                if (!(fw > 0.0) || k <= 0.0) continue;
                const double h = (std::log(fw / k) + 0.5 * st.v_rem) / sv;
                acc[leg] += st.h * num * normal_pdf(h) / sv;
            }
            const double sq = std::sqrt(st.h);
            z.resize(pp.loadings.cols());
            for (int j = 0; j < z.size(); ++j) z[j] = rng.next();
            const Eigen::VectorXd shock = pp.loadings * z * sq;
            const Eigen::VectorXd drift = pp.ito_drift * st.h;
            lf[0] += drift + shock;
            if (legs == 2) lf[1] += drift - shock;
        }
        return (acc[0] + acc[1]) / legs;
    };
    return run_mc(config, sampler);
}

namespace {

struct LmmPlan {
    std::vector<PiecePlan> pieces;  // loadings/drift only; c, vw unused
    int nf = 0;                     // simulated forwards: spec.start..spec.end
    double delta = 0.0;
};

LmmPlan plan_lmm(const YieldCurve& curve, const VolSpec& vols, const SwapSpec& spec,
                 double horizon) {
    validate(curve, spec);
    VolSpec v = vols.assets() == spec.periods()
                    ? vols
                    : vols.slice(spec.start_index, spec.periods());
    LmmPlan plan;
    plan.nf = spec.periods();
    plan.delta = curve.delta();
    const Eigen::VectorXd dummy = Eigen::VectorXd::Zero(plan.nf);
    plan.pieces = plan_pieces(v, dummy, 0.0, horizon);
    return plan;
}

}  // namespace

McEstimate simulate_lmm_swaption(const YieldCurve& curve, const VolSpec& vols,
                                 const SwapSpec& spec, double strike, const SimConfig& config) {
    const double T = curve.tenor_grid()[static_cast<std::size_t>(spec.start_index)];
    const auto plan = plan_lmm(curve, vols, spec, T);
    const int nf = plan.nf;
    const double delta = plan.delta;
    Eigen::VectorXd logk0(nf);
    for (int j = 0; j < nf; ++j) logk0[j] = std::log(forward_libor(curve, spec.start_index + j));
    const double df_terminal = curve.discount_at(spec.end_index + 1);
    const double log_cap = std::log(config.rate_cap);

    std::atomic<std::int64_t> exploded{0};
    auto sampler = [&](std::int64_t u, bool antithetic) -> double {
        NormalStream rng(config.seed, static_cast<std::uint64_t>(u));
        Eigen::VectorXd lk[2] = {logk0, logk0};
        const int legs = antithetic ? 2 : 1;
        bool blown = false;
        Eigen::VectorXd z, kcur, mu;
        for (const auto& pp : plan.pieces) {
            const int m = config.steps_per_period;
            const double h = (pp.b - pp.a) / m, sq = std::sqrt(h);
            for (int st = 0; st < m; ++st) {
                z.resize(pp.loadings.cols());
                for (int j = 0; j < z.size(); ++j) z[j] = rng.next();
                for (int leg = 0; leg < legs; ++leg) {
                    // terminal-measure drift: accumulate over later forwards
                    Eigen::VectorXd accv = Eigen::VectorXd::Zero(pp.loadings.cols());
                    mu.resize(nf);
                    for (int j = nf - 1; j >= 0; --j) {
                        const auto gj = pp.loadings.row(j);
                        mu[j] = -gj.dot(accv);
                        const double kj = std::exp(lk[leg][j]);
                        accv += (delta * kj / (1.0 + delta * kj)) * gj.transpose();
                    }
                    const double sgn = leg == 0 ? 1.0 : -1.0;
                    for (int j = 0; j < nf; ++j) {
                        const auto gj = pp.loadings.row(j);
                        lk[leg][j] += (mu[j] - 0.5 * gj.squaredNorm()) * h + sgn * sq * gj.dot(z);
                        if (lk[leg][j] > log_cap) blown = true;
                    }
                }
            }
        }
        if (blown) exploded.fetch_add(1);
        double acc = 0.0;
        for (int leg = 0; leg < legs; ++leg) {
            // reconstruct discounts at T from the simulated forwards
            double df = 1.0, level = 0.0;
            for (int j = 0; j < nf; ++j) {
                df /= 1.0 + delta * std::exp(lk[leg][j]);
                level += delta * df;
            }
            const double swap = (1.0 - df) / level;
            acc += std::max(swap - strike, 0.0) * level / df;
        }
        return acc / legs;
    };
    McEstimate e = run_mc(config, sampler);
    if (exploded.load() > 0)
        throw std::runtime_error("simulate_lmm_swaption: " + std::to_string(exploded.load()) +
                                 " path(s) exceeded the rate cap");
    e.price *= df_terminal;
    e.std_error *= df_terminal;
    return e;
}

WeightStabilityStats simulate_swap_weight_paths(const YieldCurve& curve, const VolSpec& vols,
                                                const SwapSpec& spec, const SimConfig& config) {
    check_config(config);
    const double T = curve.tenor_grid()[static_cast<std::size_t>(spec.start_index)];
    const auto plan = plan_lmm(curve, vols, spec, T);
    const int nf = plan.nf;
    const double delta = plan.delta;
    Eigen::VectorXd logk0(nf);
    for (int j = 0; j < nf; ++j) logk0[j] = std::log(forward_libor(curve, spec.start_index + j));

    const auto log_weights = [&](const Eigen::VectorXd& lk, Eigen::VectorXd& out) {
        double df = 1.0, level = 0.0;
        for (int j = 0; j < nf; ++j) {
            df /= 1.0 + delta * std::exp(lk[j]);
            out[j] = df;
            level += delta * df;
        }
        for (int j = 0; j < nf; ++j) out[j] = std::log(delta * out[j] / level);
    };

    const std::int64_t units = config.antithetic ? std::max<std::int64_t>(1, config.paths / 2)
                                                 : config.paths;
    const int legs = config.antithetic ? 2 : 1;
    // accumulators: QV(ln K_j) then QV(ln w_j)
    auto tot = reduce_deterministic(units, 2 * nf, [&](std::int64_t u, double* out) {
        NormalStream rng(config.seed, static_cast<std::uint64_t>(u));
        Eigen::VectorXd lk[2] = {logk0, logk0};
        Eigen::VectorXd lw_prev[2], lw(nf), z, mu;
        for (int leg = 0; leg < legs; ++leg) {
            lw_prev[leg].resize(nf);
            log_weights(lk[leg], lw_prev[leg]);
        }
        Eigen::VectorXd lk_prev[2] = {logk0, logk0};
        for (const auto& pp : plan.pieces) {
            const int m = config.steps_per_period;
            const double h = (pp.b - pp.a) / m, sq = std::sqrt(h);
            for (int st = 0; st < m; ++st) {
                z.resize(pp.loadings.cols());
                for (int j = 0; j < z.size(); ++j) z[j] = rng.next();
                for (int leg = 0; leg < legs; ++leg) {
                    Eigen::VectorXd accv = Eigen::VectorXd::Zero(pp.loadings.cols());
                    mu.resize(nf);
                    for (int j = nf - 1; j >= 0; --j) {
                        const auto gj = pp.loadings.row(j);
                        mu[j] = -gj.dot(accv);
                        const double kj = std::exp(lk[leg][j]);
                        accv += (delta * kj / (1.0 + delta * kj)) * gj.transpose();
                    }
                    const double sgn = leg == 0 ? 1.0 : -1.0;
                    for (int j = 0; j < nf; ++j) {
                        const auto gj = pp.loadings.row(j);
                        lk[leg][j] += (mu[j] - 0.5 * gj.squaredNorm()) * h + sgn * sq * gj.dot(z);
                    }
                    log_weights(lk[leg], lw);
                    for (int j = 0; j < nf; ++j) {
                        const double dk = lk[leg][j] - lk_prev[leg][j];
                        const double dw = lw[j] - lw_prev[leg][j];
                        out[j] += dk * dk;
                        out[nf + j] += dw * dw;
                    }
                    lk_prev[leg] = lk[leg];
                    lw_prev[leg] = lw;
                }
            }
        }
    });

    WeightStabilityStats stats;
    stats.paths_used = units * legs;
    stats.fra_vol.resize(nf);
    stats.weight_vol.resize(nf);
    stats.ratio.resize(nf);
    const double norm = 1.0 / (static_cast<double>(stats.paths_used) * T);
    for (int j = 0; j < nf; ++j) {
        const double qv_fra = tot[static_cast<std::size_t>(j)] * norm;
        const double qv_w = tot[static_cast<std::size_t>(nf + j)] * norm;
        stats.fra_vol[j] = std::sqrt(qv_fra);
        stats.weight_vol[j] = std::sqrt(qv_w);
        // Ratio of annualized quadratic variations, matching the market
        // convention for this statistic (not the ratio of the vols).
        stats.ratio[j] = qv_w > 0.0 ? qv_fra / qv_w
                                    : std::numeric_limits<double>::infinity();
    }
    return stats;
}

}  // namespace lmmcal
