#include "lmmcal/rank.hpp"

#include <stdexcept>

namespace lmmcal {

namespace {
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    int imax = 0;
    for (int i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] < 0.0) v = -v;
}
}  // namespace

Spectrum spectrum(const Eigen::MatrixXd& X) {
    if (X.rows() != X.cols()) throw std::invalid_argument("spectrum: matrix not square");
    if ((X - X.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + X.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("spectrum: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (X + X.transpose()));
    const int n = static_cast<int>(X.rows());
    Spectrum s;
    s.eigenvalues.resize(n);
    s.eigenvectors.resize(n, n);
    for (int i = 0; i < n; ++i) {  // ascending -> descending
        s.eigenvalues[i] = es.eigenvalues()[n - 1 - i];
        s.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
        fix_sign(s.eigenvectors.col(i));
    }
    const double tr = s.eigenvalues.sum();
    s.fractions = tr != 0.0 ? (s.eigenvalues / tr).eval() : Eigen::VectorXd::Zero(n).eval();
    return s;
}

Eigen::MatrixXd reduce_rank(const Eigen::MatrixXd& X, int d) {
    if (d < 1 || d > X.rows()) throw std::invalid_argument("reduce_rank: rank out of range");
    const Spectrum s = spectrum(X);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    for (int i = 0; i < d; ++i) {
        if (s.eigenvalues[i] <= 0.0) break;
        out += s.eigenvalues[i] * s.eigenvectors.col(i) * s.eigenvectors.col(i).transpose();
    }
    return out;
}

Eigen::MatrixXd factor_loadings(const Eigen::MatrixXd& X, int d) {
    if (d < 1 || d > X.rows()) throw std::invalid_argument("factor_loadings: rank out of range");
    const Spectrum s = spectrum(X);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(X.rows(), d);
    for (int i = 0; i < d; ++i) {
        if (s.eigenvalues[i] <= 0.0) break;
        B.col(i) = std::sqrt(s.eigenvalues[i]) * s.eigenvectors.col(i);
    }
    return B;
}

int count_sign_changes(const Eigen::VectorXd& v, double tol) {
    int changes = 0;
    double prev = 0.0;
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) <= tol) continue;  // treat near-zeros as no information
        if (prev != 0.0 && v[i] * prev < 0.0) ++changes;
        prev = v[i];
    }
    return changes;
}

}  // namespace lmmcal
