#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace lmmcal {

// Piecewise-constant volatility path. Per period, either explicit per-asset
// d-dimensional vectors (rows of a matrix) or just the covariance matrix
// Gamma = sigma sigma^T. All pricing depends on the path only through Gamma;
// simulation needs vectors and factorizes covariance-form periods on demand.
class VolSpec {
public:
    VolSpec(std::vector<double> boundaries, std::vector<Eigen::MatrixXd> asset_vectors);

    static VolSpec from_covariances(std::vector<double> boundaries,
                                    std::vector<Eigen::MatrixXd> gammas);
    // single period [0, horizon] with constant covariance
    static VolSpec stationary(const Eigen::MatrixXd& gamma, double horizon);

    int periods() const { return static_cast<int>(gammas_.size()); }
    int assets() const { return static_cast<int>(gammas_.front().rows()); }
    int dim() const { return dim_; }
    bool has_vectors() const { return !vols_.empty(); }
    double start() const { return boundaries_.front(); }
    double end() const { return boundaries_.back(); }
    double period_start(int p) const { return boundaries_.at(static_cast<std::size_t>(p)); }
    double period_end(int p) const { return boundaries_.at(static_cast<std::size_t>(p) + 1); }

    const Eigen::MatrixXd& gamma(int p) const { return gammas_.at(static_cast<std::size_t>(p)); }
    // rows = per-asset volatility vectors; factorized from gamma when absent
    const Eigen::MatrixXd& loadings(int p) const;

    int period_index(double s) const;
    // invoke f(p, a, b) over every period slice of [t, T]; slices reproduce
    // [t, T] exactly, so integrals split at any s are additive to the bit.
    void for_each_piece(double t, double T, const std::function<void(int, double, double)>& f) const;

    // sub-spec covering assets [lo, lo+count)
    VolSpec slice(int lo, int count) const;

    double max_vol_norm() const;  // max over periods/assets of ||sigma^i||

private:
    VolSpec() = default;
    void check_time_range(double t, double T) const;

    std::vector<double> boundaries_;
    std::vector<Eigen::MatrixXd> vols_;    // per period, assets x d; may be empty
    std::vector<Eigen::MatrixXd> gammas_;  // per period, assets x assets
    mutable std::vector<Eigen::MatrixXd> loadings_cache_;
    int dim_ = 0;
};

}  // namespace lmmcal
