#include "lmmcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "lmmcal/math.hpp"

namespace lmmcal {

namespace {

double inner(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    return (A.cwiseProduct(B)).sum();
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& X) { return 0.5 * (X + X.transpose()); }

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& X) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(X));
    if (es.info() != Eigen::Success) throw std::runtime_error("project_psd: eigensolver failed");
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

double min_eigenvalue(const Eigen::MatrixXd& X) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(X));
    return es.eigenvalues().minCoeff();
}

double band_violation(const Eigen::MatrixXd& X, const std::vector<VarianceBand>& bands) {
    double worst = 0.0;
    for (const auto& b : bands) {
        double v = inner(b.A, X);
        worst = std::max({worst, b.lower - v, v - b.upper});
    }
    return worst;
}

Eigen::VectorXd residual_vector(const Eigen::MatrixXd& X, const std::vector<VarianceBand>& bands) {
    Eigen::VectorXd r(static_cast<int>(bands.size()));
    for (std::size_t k = 0; k < bands.size(); ++k) {
        double v = inner(bands[k].A, X);
        r[static_cast<int>(k)] = std::max({0.0, bands[k].lower - v, v - bands[k].upper});
    }
    return r;
}

struct ProjectionReport {
    int sweeps = 0;
    double violation = 0.0;
    bool plateau = false;
};

// Dykstra's alternating projections onto the intersection of the trace bands
// and the PSD cone. The PSD cone is projected last in each sweep so the
// returned iterate is exactly PSD and only the band residual is approximate.
Eigen::MatrixXd dykstra(Eigen::MatrixXd X, const std::vector<VarianceBand>& bands,
                        const std::vector<double>& band_norm2, int max_sweeps, double tol,
                        ProjectionReport* report = nullptr) {
    X = symmetrize(X);
    double entry_viol = band_violation(X, bands);
    double scale = std::max(1.0, X.norm());
    if (entry_viol <= tol && min_eigenvalue(X) >= -1e-12 * scale) {
        if (report) {
            report->sweeps = 0;
            report->violation = entry_viol;
        }
        return X;
    }

    const std::size_t n_sets = bands.size() + 1;
    std::vector<Eigen::MatrixXd> increment(n_sets, Eigen::MatrixXd::Zero(X.rows(), X.cols()));
    double best = std::numeric_limits<double>::infinity();
    int last_improvement = 0;
    const int stall_window = std::max(300, max_sweeps / 5);
    int sweep = 0;
    double viol = entry_viol;
    for (; sweep < max_sweeps; ++sweep) {
        for (std::size_t s = 0; s < n_sets; ++s) {
            Eigen::MatrixXd Z = X + increment[s];
            if (s < bands.size()) {
                const auto& b = bands[s];
                double v = inner(b.A, Z);
                double shift = 0.0;
                if (v > b.upper)
                    shift = (v - b.upper) / band_norm2[s];
                else if (v < b.lower)
                    shift = (v - b.lower) / band_norm2[s];
                X = Z - shift * b.A;
            } else {
                X = project_psd(Z);
            }
            increment[s] = Z - X;
        }
        viol = band_violation(X, bands);
        if (viol <= tol) {
            ++sweep;
            break;
        }
        if (viol < best * (1.0 - 1e-3)) {
            best = viol;
            last_improvement = sweep;
        }
        if (report && sweep - last_improvement > stall_window) {
            report->plateau = true;
            ++sweep;
            break;
        }
    }
    if (report) {
        report->sweeps = sweep;
        report->violation = viol;
    }
    return X;
}

std::vector<double> band_norms(const std::vector<VarianceBand>& bands) {
    std::vector<double> n2;
    n2.reserve(bands.size());
    for (const auto& b : bands) {
        double v = b.A.squaredNorm();
        if (v <= 0.0) throw std::invalid_argument("calibration: zero constraint matrix");
        n2.push_back(v);
    }
    return n2;
}

// Variance-rate scale of the instance, used for automatic step sizes.
double instance_scale(const std::vector<VarianceBand>& bands) {
    if (bands.empty()) return 1.0;
    double acc = 0.0;
    for (const auto& b : bands) acc += b.upper / std::max(b.maturity, 1e-12);
    return std::max(1e-8, acc / static_cast<double>(bands.size()));
}

double smoothness_grad(const Eigen::MatrixXd& X, Eigen::MatrixXd& g) {
    const int n = static_cast<int>(X.rows());
    g.setZero(n, n);
    double s = 0.0;
    for (int i = 1; i < n; ++i) {
        for (int j = 1; j < n; ++j) {
            double dv = X(i, j) - X(i - 1, j);
            double dh = X(i, j) - X(i, j - 1);
            s += dv * dv + dh * dh;
            g(i, j) += 2.0 * (dv + dh);
            g(i - 1, j) -= 2.0 * dv;
            g(i, j - 1) -= 2.0 * dh;
        }
    }
    g = symmetrize(g);
    return s;
}

struct SmoothParts {
    std::function<double(const Eigen::MatrixXd&)> value;
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> grad;
    // constant curvature bound; max-entropy adds a 1/lambda_min^2 local term
    double lipschitz = 0.0;
    bool max_entropy = false;
};

std::vector<double> effective_mids(const Objective& obj, const std::vector<VarianceBand>& bands) {
    if (!obj.mid_targets.empty()) {
        if (obj.mid_targets.size() != bands.size())
            throw std::invalid_argument("tikhonov: mid_targets size mismatch");
        return obj.mid_targets;
    }
    std::vector<double> mids(bands.size());
    for (std::size_t k = 0; k < bands.size(); ++k) mids[k] = 0.5 * (bands[k].lower + bands[k].upper);
    return mids;
}

SmoothParts build_smooth(const Objective& obj, const std::vector<VarianceBand>& bands,
                         double maxent_floor) {
    SmoothParts parts;
    std::function<double(const Eigen::MatrixXd&, Eigen::MatrixXd&)> base;
    double base_lip = 0.0;
    switch (obj.kind) {
        case Objective::Kind::feasibility:
            base = [](const Eigen::MatrixXd& X, Eigen::MatrixXd& g) {
                g.setZero(X.rows(), X.cols());
                return 0.0;
            };
            break;
        case Objective::Kind::distance: {
            Eigen::MatrixXd A = symmetrize(obj.target);
            base = [A](const Eigen::MatrixXd& X, Eigen::MatrixXd& g) {
                Eigen::MatrixXd D = X - A;
                g = 2.0 * D;
                return D.squaredNorm();
            };
            base_lip = 2.0;
            break;
        }
        case Objective::Kind::max_entropy: {
            Eigen::MatrixXd P = symmetrize(obj.target);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
            Eigen::VectorXd lam = es.eigenvalues().cwiseMax(maxent_floor);
            Eigen::MatrixXd Pinv = es.eigenvectors() * lam.cwiseInverse().asDiagonal() *
                                   es.eigenvectors().transpose();
            double floor = maxent_floor;
            base = [Pinv, floor](const Eigen::MatrixXd& X, Eigen::MatrixXd& g) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(symmetrize(X));
                Eigen::VectorXd lx = ex.eigenvalues().cwiseMax(floor);
                Eigen::MatrixXd Xinv = ex.eigenvectors() * lx.cwiseInverse().asDiagonal() *
                                       ex.eigenvectors().transpose();
                g = Pinv - Xinv;
                double logdet = lx.array().log().sum();
                return -logdet + (Pinv.cwiseProduct(X)).sum();
            };
            parts.max_entropy = true;
            break;
        }
        case Objective::Kind::smoothness:
            base = [](const Eigen::MatrixXd& X, Eigen::MatrixXd& g) {
                return smoothness_grad(X, g);
            };
            base_lip = 16.0;
            break;
        case Objective::Kind::tikhonov: {
            std::vector<double> mids = effective_mids(obj, bands);
            double alpha = obj.alpha;
            double lsum = 0.0;
            for (const auto& b : bands) lsum += b.A.squaredNorm();
            base_lip = 2.0 * lsum + 2.0 * alpha;
            auto bands_copy = bands;
            base = [bands_copy, mids, alpha](const Eigen::MatrixXd& X, Eigen::MatrixXd& g) {
                g = 2.0 * alpha * X;
                double f = alpha * X.squaredNorm();
                for (std::size_t k = 0; k < bands_copy.size(); ++k) {
                    double d = inner(bands_copy[k].A, X) - mids[k];
                    f += d * d;
                    g += 2.0 * d * bands_copy[k].A;
                }
                return f;
            };
            break;
        }
        default:
            throw std::logic_error("build_smooth: objective is not smooth");
    }

    double sw = obj.smoothness_weight;
    if (obj.kind == Objective::Kind::smoothness && sw <= 0.0) sw = 1.0;
    double tw = obj.trace_weight;
    parts.lipschitz = obj.kind == Objective::Kind::smoothness ? 16.0 * sw : base_lip + 16.0 * sw;

    parts.value = [base, sw, tw, kind = obj.kind](const Eigen::MatrixXd& X) {
        Eigen::MatrixXd g;
        double f = base(X, g);
        if (kind == Objective::Kind::smoothness) {
            f *= sw;
        } else if (sw > 0.0) {
            Eigen::MatrixXd gs;
            f += sw * smoothness_grad(X, gs);
        }
        if (tw != 0.0) f += tw * X.trace();
        return f;
    };
    parts.grad = [base, sw, tw, kind = obj.kind](const Eigen::MatrixXd& X) {
        Eigen::MatrixXd g;
        base(X, g);
        if (kind == Objective::Kind::smoothness) {
            g *= sw;
        } else if (sw > 0.0) {
            Eigen::MatrixXd gs;
            smoothness_grad(X, gs);
            g += sw * gs;
        }
        if (tw != 0.0) g += tw * Eigen::MatrixXd::Identity(X.rows(), X.cols());
        return g;
    };
    return parts;
}

// Recession directions of the feasible set are PSD matrices orthogonal to every
// constraint; the objective is unbounded iff the improving direction survives
// projection onto that orthogonal complement.
bool direction_unbounded(const Eigen::MatrixXd& C, const std::vector<VarianceBand>& bands,
                         int dim) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& b : bands) S += b.A / std::max(1.0, b.A.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(S));
    double lmax = bands.empty() ? 0.0 : es.eigenvalues().maxCoeff();
    Eigen::MatrixXd Pperp = Eigen::MatrixXd::Identity(dim, dim);
    if (lmax > 0.0) {
        for (int i = 0; i < dim; ++i) {
            if (es.eigenvalues()[i] > 1e-12 * lmax) {
                Eigen::VectorXd v = es.eigenvectors().col(i);
                Pperp -= v * v.transpose();
            }
        }
    }
    Eigen::MatrixXd R = Pperp * symmetrize(C) * Pperp;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(symmetrize(R));
    return er.eigenvalues().maxCoeff() > 1e-12 * std::max(1.0, C.norm());
}

CovarianceResult finish(Eigen::MatrixXd X, const std::vector<VarianceBand>& bands,
                        const SolverConfig& config, int iterations, bool plateau,
                        double objective_value) {
    CovarianceResult res;
    res.X = symmetrize(X);
    res.residuals = residual_vector(res.X, bands);
    double viol = res.residuals.size() > 0 ? res.residuals.maxCoeff() : 0.0;
    res.min_eigenvalue = min_eigenvalue(res.X);
    res.iterations = iterations;
    res.objective_value = objective_value;
    if (viol <= config.feas_tol) {
        res.converged = true;
        res.status = "converged";
    } else if (plateau) {
        res.converged = false;
        res.status = "likely_infeasible";
    } else {
        res.converged = false;
        res.status = "max_iterations";
    }
    return res;
}

Eigen::MatrixXd initial_point(const Objective& obj, const std::vector<VarianceBand>& bands,
                              int dim) {
    if (obj.kind == Objective::Kind::max_entropy) return project_psd(obj.target);
    if (obj.kind == Objective::Kind::distance) return project_psd(obj.target);
    // ridge terms pull unconstrained directions to zero; starting at the
    // min-norm feasible point avoids their slow first-order decay
    if (obj.kind == Objective::Kind::tikhonov) return Eigen::MatrixXd::Zero(dim, dim);
    return instance_scale(bands) * Eigen::MatrixXd::Identity(dim, dim);
}

CovarianceResult solve_linear(const Eigen::MatrixXd& direction, bool maximize,
                              const std::vector<VarianceBand>& bands,
                              const std::vector<double>& norm2, int dim,
                              const SolverConfig& config) {
    Eigen::MatrixXd C = symmetrize(direction);
    Eigen::MatrixXd G = maximize ? Eigen::MatrixXd(-C) : C;  // minimize <G, X>

    if (direction_unbounded(-G, bands, dim)) {
        CovarianceResult res;
        res.X = Eigen::MatrixXd::Zero(dim, dim);
        res.residuals = Eigen::VectorXd::Zero(static_cast<int>(bands.size()));
        res.converged = false;
        res.status = "unbounded";
        res.objective_value =
            maximize ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        return res;
    }

    ProjectionReport rep;
    Eigen::MatrixXd X = dykstra(instance_scale(bands) * Eigen::MatrixXd::Identity(dim, dim), bands,
                                norm2, config.max_iterations, config.feas_tol, &rep);
    if (rep.violation > config.feas_tol) {
        CovarianceResult res = finish(X, bands, config, rep.sweeps, rep.plateau, inner(C, X));
        return res;  // infeasible set: report it, the bound is meaningless anyway
    }

    double t0 = config.step > 0.0 ? config.step
                                  : instance_scale(bands) / std::max(1e-12, G.norm());
    Eigen::MatrixXd best_X = X;
    double best_val = inner(G, X);
    int polish_budget = std::max(500, config.max_iterations / 10);
    for (int j = 0; j < config.subgrad_outer; ++j) {
        double t = t0 / std::sqrt(1.0 + j);
        X = dykstra(X - t * G, bands, norm2, config.subgrad_inner_sweeps,
                    0.1 * config.feas_tol);
        if (X.norm() > config.unbounded_norm) {
            CovarianceResult res;
            res.X = X;
            res.residuals = residual_vector(X, bands);
            res.converged = false;
            res.status = "unbounded";
            res.iterations = j + 1;
            res.objective_value = maximize ? std::numeric_limits<double>::infinity()
                                           : -std::numeric_limits<double>::infinity();
            return res;
        }
        if ((j + 1) % 200 == 0 || j + 1 == config.subgrad_outer) {
            Eigen::MatrixXd Xp = dykstra(X, bands, norm2, polish_budget, config.feas_tol);
            double val = inner(G, Xp);
            if (val < best_val && band_violation(Xp, bands) <= config.feas_tol) {
                best_val = val;
                best_X = Xp;
            }
        }
    }
    Eigen::MatrixXd Xp = dykstra(best_X, bands, norm2, config.max_iterations, config.feas_tol);
    CovarianceResult res = finish(Xp, bands, config, config.subgrad_outer, false, inner(C, Xp));
    return res;
}

CovarianceResult solve_smooth(const Objective& obj, const std::vector<VarianceBand>& bands,
                              const std::vector<double>& norm2, int dim,
                              const SolverConfig& config);

CovarianceResult solve_spectral(const Objective& obj, const std::vector<VarianceBand>& bands,
                                const std::vector<double>& norm2, int dim,
                                const SolverConfig& config) {
    Eigen::MatrixXd A = symmetrize(obj.target);
    auto spectral = [&A](const Eigen::MatrixXd& X, Eigen::MatrixXd& sub) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(X - A));
        int lo = 0, hi = static_cast<int>(X.rows()) - 1;
        double val;
        if (std::abs(es.eigenvalues()[lo]) > std::abs(es.eigenvalues()[hi])) {
            val = std::abs(es.eigenvalues()[lo]);
            Eigen::VectorXd v = es.eigenvectors().col(lo);
            sub = (es.eigenvalues()[lo] > 0 ? 1.0 : -1.0) * v * v.transpose();
        } else {
            val = std::abs(es.eigenvalues()[hi]);
            Eigen::VectorXd v = es.eigenvectors().col(hi);
            sub = (es.eigenvalues()[hi] >= 0 ? 1.0 : -1.0) * v * v.transpose();
        }
        return val;
    };

    ProjectionReport rep;
    Eigen::MatrixXd X = dykstra(project_psd(A), bands, norm2, config.max_iterations,
                                config.feas_tol, &rep);
    if (rep.violation > config.feas_tol) {
        Eigen::MatrixXd sub;
        return finish(X, bands, config, rep.sweeps, rep.plateau, spectral(X, sub));
    }

    Eigen::MatrixXd sub;
    double best_val = spectral(X, sub);
    Eigen::MatrixXd best_X = X;

    // The Frobenius minimizer is feasible and ||X_f - A||_2 <= ||X_f - A||_F,
    // so it caps the spectral optimum; the subgradient path only improves on it.
    {
        CovarianceResult warm =
            solve_smooth(Objective::distance_to_target(A), bands, norm2, dim, config);
        if (band_violation(warm.X, bands) <= config.feas_tol) {
            Eigen::MatrixXd s2;
            double val = spectral(warm.X, s2);
            if (val < best_val) {
                best_val = val;
                best_X = warm.X;
                X = warm.X;
            }
        }
    }

    double t0 = config.step > 0.0 ? config.step : std::max(1e-8, 0.5 * A.norm());
    for (int j = 0; j < config.subgrad_outer; ++j) {
        double t = t0 / std::sqrt(1.0 + j);
        double cur = spectral(X, sub);
        (void)cur;
        X = dykstra(X - t * sub, bands, norm2, config.subgrad_inner_sweeps,
                    0.1 * config.feas_tol);
        if ((j + 1) % 200 == 0 || j + 1 == config.subgrad_outer) {
            Eigen::MatrixXd Xp = dykstra(X, bands, norm2,
                                         std::max(500, config.max_iterations / 10),
                                         config.feas_tol);
            Eigen::MatrixXd s2;
            double val = spectral(Xp, s2);
            if (val < best_val && band_violation(Xp, bands) <= config.feas_tol) {
                best_val = val;
                best_X = Xp;
            }
        }
    }
    Eigen::MatrixXd s2;
    double val = spectral(best_X, s2);
    return finish(best_X, bands, config, config.subgrad_outer, false, val);
}

CovarianceResult solve_smooth(const Objective& obj, const std::vector<VarianceBand>& bands,
                              const std::vector<double>& norm2, int dim,
                              const SolverConfig& config) {
    SmoothParts parts = build_smooth(obj, bands, config.maxent_floor);
    Eigen::MatrixXd X = dykstra(initial_point(obj, bands, dim), bands, norm2,
                                config.max_iterations, config.feas_tol);
    double f = parts.value(X);
    bool converged = false;
    int outer = 0;
    for (; outer < config.prox_outer; ++outer) {
        Eigen::MatrixXd g = parts.grad(X);
        double lip = parts.lipschitz;
        if (parts.max_entropy) {
            double lmin = std::max(min_eigenvalue(X), config.maxent_floor);
            lip += 1.0 / (lmin * lmin);
        }
        double t = lip > 0.0 ? 0.9 / lip : 1.0;
        if (config.step > 0.0) t = config.step;

        Eigen::MatrixXd Xn;
        double fn = 0.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h) {
            Xn = dykstra(X - t * g, bands, norm2, config.prox_inner_sweeps,
                         0.5 * config.feas_tol);
            fn = parts.value(Xn);
            if (fn <= f + 1e-14 * (1.0 + std::abs(f))) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            converged = true;  // no descent direction left at this scale
            break;
        }
        double move = (Xn - X).norm();
        X = Xn;
        double fprev = f;
        f = fn;
        if (move <= config.obj_tol * (1.0 + X.norm()) &&
            std::abs(fprev - f) <= config.obj_tol * (1.0 + std::abs(f))) {
            converged = true;
            ++outer;
            break;
        }
    }
    ProjectionReport rep;
    Eigen::MatrixXd Xp = dykstra(X, bands, norm2, config.max_iterations, config.feas_tol, &rep);
    CovarianceResult res = finish(Xp, bands, config, outer, rep.plateau, parts.value(Xp));
    if (!converged && res.status == "converged") {
        res.status = "max_iterations";
        res.converged = false;
    }
    return res;
}

// Nonnegative least squares for the per-period scalars, projected gradient.
Eigen::VectorXd nnls(const Eigen::MatrixXd& M, const Eigen::VectorXd& m) {
    Eigen::VectorXd s = Eigen::VectorXd::Ones(M.cols());
    double lip = 2.0 * M.squaredNorm();
    if (lip <= 0.0) return s;
    double t = 1.0 / lip;
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXd g = 2.0 * M.transpose() * (M * s - m);
        Eigen::VectorXd sn = (s - t * g).cwiseMax(0.0);
        if ((sn - s).norm() <= 1e-14 * (1.0 + s.norm())) {
            s = sn;
            break;
        }
        s = sn;
    }
    return s;
}

// Dykstra in scalar space: nearest point of {s >= 0, lo <= M s <= hi} to the
// least-squares fit. s = 1 reproduces the stage-1 variances, so the set is
// nonempty whenever stage 1 was feasible.
Eigen::VectorXd project_scalars(Eigen::VectorXd s, const Eigen::MatrixXd& M,
                                const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double tol,
                                int max_sweeps) {
    const int K = static_cast<int>(M.rows());
    std::vector<Eigen::VectorXd> inc(static_cast<std::size_t>(K) + 1,
                                     Eigen::VectorXd::Zero(s.size()));
    Eigen::VectorXd row_n2(K);
    for (int k = 0; k < K; ++k) row_n2[k] = M.row(k).squaredNorm();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (int k = 0; k <= K; ++k) {
            Eigen::VectorXd z = s + inc[static_cast<std::size_t>(k)];
            if (k < K) {
                if (row_n2[k] <= 0.0) {
                    s = z;
                } else {
                    double v = M.row(k).dot(z);
                    double shift = 0.0;
                    if (v > hi[k])
                        shift = (v - hi[k]) / row_n2[k];
                    else if (v < lo[k])
                        shift = (v - lo[k]) / row_n2[k];
                    s = z - shift * M.row(k).transpose();
                }
            } else {
                s = z.cwiseMax(0.0);
            }
            inc[static_cast<std::size_t>(k)] = z - s;
        }
        double worst = 0.0;
        for (int k = 0; k < K; ++k) {
            double v = M.row(k).dot(s);
            worst = std::max({worst, lo[k] - v, v - hi[k]});
        }
        if (worst <= tol && s.minCoeff() >= 0.0) break;
    }
    return s.cwiseMax(0.0);
}

CovarianceResult solve_per_period(const CalibrationInstance& instance, const Objective& objective,
                                  const SolverConfig& config) {
    CalibrationInstance flat = instance;
    flat.mode = CalibrationInstance::Mode::single_matrix;
    CovarianceResult stage1 = solve(flat, objective, config);
    if (!stage1.converged && stage1.status != "max_iterations") return stage1;

    const auto& bounds = instance.period_boundaries;
    if (bounds.size() < 2) throw std::invalid_argument("per_period: missing period boundaries");
    const int P = static_cast<int>(bounds.size()) - 1;
    const int K = static_cast<int>(instance.constraints.size());

    Eigen::MatrixXd M(K, P);
    Eigen::VectorXd mid(K), lo(K), hi(K);
    for (int k = 0; k < K; ++k) {
        const auto& b = instance.constraints[k];
        double rate = inner(b.A, stage1.X) / std::max(b.maturity, 1e-12);
        for (int p = 0; p < P; ++p) {
            double len = std::max(0.0, std::min(b.maturity, bounds[p + 1]) - bounds[p]);
            M(k, p) = len * rate;
        }
        mid[k] = 0.5 * (b.lower + b.upper);
        lo[k] = b.lower;
        hi[k] = b.upper;
    }
    Eigen::VectorXd s = project_scalars(nnls(M, mid), M, lo, hi, config.feas_tol,
                                        config.max_iterations);

    CovarianceResult res = stage1;
    res.period_scales.assign(s.data(), s.data() + s.size());
    res.per_period.clear();
    for (int p = 0; p < P; ++p) res.per_period.push_back(s[p] * stage1.X);

    Eigen::VectorXd r(K);
    for (int k = 0; k < K; ++k) {
        double v = M.row(k).dot(s);
        const auto& b = instance.constraints[k];
        r[k] = std::max({0.0, b.lower - v, v - b.upper});
    }
    res.residuals = r;
    double viol = K > 0 ? r.maxCoeff() : 0.0;
    if (viol <= config.feas_tol) {
        res.converged = true;
        res.status = "converged";
    } else if (stage1.status == "likely_infeasible") {
        res.converged = false;
        res.status = "likely_infeasible";
    } else {
        res.converged = false;
        res.status = "max_iterations";
    }
    return res;
}

}  // namespace

Objective Objective::feasibility() {
    Objective o;
    o.kind = Kind::feasibility;
    return o;
}

Objective Objective::linear_bound(const Eigen::MatrixXd& direction, bool maximize) {
    Objective o;
    o.kind = Kind::linear_bound;
    o.target = direction;
    o.maximize = maximize;
    return o;
}

Objective Objective::distance_to_target(const Eigen::MatrixXd& A, Norm norm) {
    Objective o;
    o.kind = Kind::distance;
    o.target = A;
    o.norm = norm;
    return o;
}

Objective Objective::max_entropy(const Eigen::MatrixXd& prior) {
    Objective o;
    o.kind = Kind::max_entropy;
    o.target = prior;
    return o;
}

Objective Objective::smoothness() {
    Objective o;
    o.kind = Kind::smoothness;
    o.smoothness_weight = 1.0;
    return o;
}

Objective Objective::tikhonov(double alpha, std::vector<double> mid_targets) {
    Objective o;
    o.kind = Kind::tikhonov;
    o.alpha = alpha;
    o.mid_targets = std::move(mid_targets);
    return o;
}

Objective& Objective::with_smoothness(double weight) {
    smoothness_weight = weight;
    return *this;
}

Objective& Objective::with_trace_penalty(double weight) {
    trace_weight = weight;
    return *this;
}

CalibrationInstance build_instance(const YieldCurve& curve, const std::vector<MarketQuote>& quotes,
                                   CalibrationInstance::Mode mode) {
    CalibrationInstance inst;
    inst.dimension = curve.forward_count();
    inst.mode = mode;
    double max_expiry = 0.0;
    for (const auto& q : quotes) {
        if (!(q.bid_vol > 0.0) || !(q.bid_vol <= q.ask_vol))
            throw std::invalid_argument("quote: need 0 < bid_vol <= ask_vol");
        if (!(q.expiry > 0.0)) throw std::invalid_argument("quote: expiry must be positive");
        SwapSpec spec{q.start_index, q.end_index, curve.delta()};
        validate(curve, spec);
        if (q.kind == MarketQuote::Kind::caplet && q.start_index != q.end_index)
            throw std::invalid_argument("caplet quote must have start_index == end_index");
        VarianceBand band;
        band.A = q.expiry * omega_matrix(basket_weights(curve, spec));
        band.lower = q.bid_vol * q.bid_vol * q.expiry;
        band.upper = q.ask_vol * q.ask_vol * q.expiry;
        band.maturity = q.expiry;
        inst.constraints.push_back(std::move(band));
        max_expiry = std::max(max_expiry, q.expiry);
    }
    if (mode == CalibrationInstance::Mode::per_period) {
        inst.period_boundaries.push_back(0.0);
        for (double t : curve.tenor_grid()) {
            if (t <= max_expiry + 1e-9) inst.period_boundaries.push_back(t);
        }
        if (inst.period_boundaries.back() < max_expiry - 1e-9)
            inst.period_boundaries.push_back(max_expiry);
        if (inst.period_boundaries.size() < 2) inst.period_boundaries.push_back(max_expiry);
    }
    return inst;
}

CovarianceResult solve(const CalibrationInstance& instance, const Objective& objective,
                       const SolverConfig& config) {
    if (instance.dimension <= 0) throw std::invalid_argument("solve: empty instance");
    if (instance.mode == CalibrationInstance::Mode::per_period)
        return solve_per_period(instance, objective, config);

    const auto& bands = instance.constraints;
    for (const auto& b : bands) {
        if (b.A.rows() != instance.dimension || b.A.cols() != instance.dimension)
            throw std::invalid_argument("solve: constraint dimension mismatch");
        if (!(b.lower <= b.upper)) throw std::invalid_argument("solve: inverted band");
    }
    std::vector<double> norm2 = band_norms(bands);

    switch (objective.kind) {
        case Objective::Kind::linear_bound:
            return solve_linear(objective.target, objective.maximize, bands, norm2,
                                instance.dimension, config);
        case Objective::Kind::distance:
            if (objective.norm == Objective::Norm::spectral)
                return solve_spectral(objective, bands, norm2, instance.dimension, config);
            return solve_smooth(objective, bands, norm2, instance.dimension, config);
        case Objective::Kind::feasibility:
            if (objective.smoothness_weight == 0.0 && objective.trace_weight != 0.0) {
                // pure trace penalty is a linear program over the same set
                Eigen::MatrixXd I = objective.trace_weight *
                                    Eigen::MatrixXd::Identity(instance.dimension, instance.dimension);
                return solve_linear(I, false, bands, norm2, instance.dimension, config);
            }
            if (objective.smoothness_weight == 0.0) {
                ProjectionReport rep;
                Eigen::MatrixXd X0 = instance_scale(bands) *
                                     Eigen::MatrixXd::Identity(instance.dimension, instance.dimension);
                Eigen::MatrixXd X = dykstra(X0, bands, norm2, config.max_iterations,
                                            config.feas_tol, &rep);
                return finish(X, bands, config, rep.sweeps, rep.plateau, 0.0);
            }
            return solve_smooth(objective, bands, norm2, instance.dimension, config);
        default:
            return solve_smooth(objective, bands, norm2, instance.dimension, config);
    }
}

PriceBounds price_bounds(const CalibrationInstance& instance, const YieldCurve& curve,
                         const SwapSpec& target_spec, double T_target, const SolverConfig& config,
                         double strike) {
    validate(curve, target_spec);
    if (!(T_target > 0.0)) throw std::invalid_argument("price_bounds: T_target must be positive");
    auto decomp = basket_weights(curve, target_spec);
    Eigen::MatrixXd omega = omega_matrix(decomp);
    if (omega.rows() != instance.dimension)
        throw std::invalid_argument("price_bounds: target grid does not match instance");

    SolverConfig cfg = config;
    cfg.feas_tol = std::min(config.feas_tol, 1e-10);

    CalibrationInstance flat = instance;
    flat.mode = CalibrationInstance::Mode::single_matrix;

    PriceBounds out;
    double k = strike < 0.0 ? decomp.swap_rate : strike;

    CovarianceResult lo = solve(flat, Objective::linear_bound(omega, false), cfg);
    out.min_status = lo.status;
    out.min_variance = (omega.cwiseProduct(lo.X)).sum() * T_target;
    out.min_price = decomp.level * black_scholes(decomp.swap_rate, k, std::max(0.0, out.min_variance));

    CovarianceResult hi = solve(flat, Objective::linear_bound(omega, true), cfg);
    out.max_status = hi.status;
    if (hi.status == "unbounded") {
        out.bounded_above = false;
        out.max_variance = std::numeric_limits<double>::quiet_NaN();
        out.max_price = std::numeric_limits<double>::quiet_NaN();
    } else {
        out.bounded_above = true;
        out.max_variance = (omega.cwiseProduct(hi.X)).sum() * T_target;
        out.max_price =
            decomp.level * black_scholes(decomp.swap_rate, k, std::max(0.0, out.max_variance));
    }
    return out;
}

double smoothness_value(const Eigen::MatrixXd& X) {
    double s = 0.0;
    for (int i = 1; i < X.rows(); ++i) {
        for (int j = 1; j < X.cols(); ++j) {
            double dv = X(i, j) - X(i - 1, j);
            double dh = X(i, j) - X(i, j - 1);
            s += dv * dv + dh * dh;
        }
    }
    return s;
}

Eigen::MatrixXd project_to_psd_cone(const Eigen::MatrixXd& X) { return project_psd(X); }

}  // namespace lmmcal
