#include "lmmcal/vol.hpp"

#include <cmath>
#include <stdexcept>

namespace lmmcal {

namespace {
void check_boundaries(const std::vector<double>& b, std::size_t nper) {
    if (b.size() != nper + 1) throw std::invalid_argument("VolSpec: boundaries/periods mismatch");
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
        if (!(b[i + 1] > b[i])) throw std::invalid_argument("VolSpec: boundaries not increasing");
}
}  // namespace

VolSpec::VolSpec(std::vector<double> boundaries, std::vector<Eigen::MatrixXd> asset_vectors) {
    if (asset_vectors.empty()) throw std::invalid_argument("VolSpec: no periods");
    check_boundaries(boundaries, asset_vectors.size());
    const auto rows = asset_vectors.front().rows();
    const auto cols = asset_vectors.front().cols();
    if (rows < 1 || cols < 1) throw std::invalid_argument("VolSpec: empty volatility matrix");
    for (const auto& m : asset_vectors) {
        if (m.rows() != rows || m.cols() != cols)
            throw std::invalid_argument("VolSpec: inconsistent period shapes");
        if (!m.allFinite()) throw std::invalid_argument("VolSpec: non-finite volatility");
    }
    boundaries_ = std::move(boundaries);
    vols_ = std::move(asset_vectors);
    dim_ = static_cast<int>(cols);
    gammas_.reserve(vols_.size());
    for (const auto& m : vols_) gammas_.push_back(m * m.transpose());
}

VolSpec VolSpec::from_covariances(std::vector<double> boundaries,
                                  std::vector<Eigen::MatrixXd> gammas) {
    if (gammas.empty()) throw std::invalid_argument("VolSpec: no periods");
    check_boundaries(boundaries, gammas.size());
    const auto n = gammas.front().rows();
    for (const auto& g : gammas) {
        if (g.rows() != n || g.cols() != n)
            throw std::invalid_argument("VolSpec: covariance not square/consistent");
        if (!g.allFinite()) throw std::invalid_argument("VolSpec: non-finite covariance");
        if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + g.cwiseAbs().maxCoeff()))
            throw std::invalid_argument("VolSpec: covariance not symmetric");
    }
    VolSpec v;
    v.boundaries_ = std::move(boundaries);
    v.gammas_ = std::move(gammas);
    v.dim_ = static_cast<int>(n);  // factorization keeps full dimension
    return v;
}

VolSpec VolSpec::stationary(const Eigen::MatrixXd& gamma, double horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("VolSpec: horizon must be positive");
    return from_covariances({0.0, horizon}, {gamma});
}

const Eigen::MatrixXd& VolSpec::loadings(int p) const {
    if (has_vectors()) return vols_.at(static_cast<std::size_t>(p));
    if (loadings_cache_.empty()) {
        loadings_cache_.reserve(gammas_.size());
        for (const auto& g : gammas_) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
            Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
            loadings_cache_.push_back(es.eigenvectors() * lam.cwiseSqrt().asDiagonal());
        }
    }
    return loadings_cache_.at(static_cast<std::size_t>(p));
}

int VolSpec::period_index(double s) const {
    if (s < boundaries_.front() - 1e-12 || s > boundaries_.back() + 1e-12)
        throw std::invalid_argument("VolSpec: time outside covered range");
    for (std::size_t p = 0; p + 1 < boundaries_.size(); ++p)
        if (s < boundaries_[p + 1]) return static_cast<int>(p);
    return periods() - 1;
}

void VolSpec::check_time_range(double t, double T) const {
    if (!(T > t)) throw std::invalid_argument("VolSpec: need T > t");
    if (t < boundaries_.front() - 1e-12 || T > boundaries_.back() + 1e-12)
        throw std::invalid_argument("VolSpec: [t,T] not covered by the volatility path");
}

void VolSpec::for_each_piece(double t, double T,
                             const std::function<void(int, double, double)>& f) const {
    check_time_range(t, T);
    for (int p = 0; p < periods(); ++p) {
        const double a = std::max(t, period_start(p));
        const double b = std::min(T, period_end(p));
        if (b > a) f(p, a, b);
    }
}

VolSpec VolSpec::slice(int lo, int count) const {
    if (lo < 0 || count < 1 || lo + count > assets())
        throw std::invalid_argument("VolSpec::slice: asset range invalid");
    VolSpec v;
    v.boundaries_ = boundaries_;
    v.dim_ = dim_;
    if (has_vectors()) {
        for (const auto& m : vols_) v.vols_.push_back(m.middleRows(lo, count));
        for (const auto& m : v.vols_) v.gammas_.push_back(m * m.transpose());
    } else {
        for (const auto& g : gammas_) v.gammas_.push_back(g.block(lo, lo, count, count));
    }
    return v;
}

double VolSpec::max_vol_norm() const {
    double m = 0.0;
    for (int p = 0; p < periods(); ++p) {
        const auto& g = gamma(p);
        for (int i = 0; i < g.rows(); ++i) m = std::max(m, std::sqrt(std::max(0.0, g(i, i))));
    }
    return m;
}

}  // namespace lmmcal
