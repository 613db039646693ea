#include "recovgraph/correlation.hpp"

#include "recovgraph/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace recovgraph {

Eigen::MatrixXd pearson_matrix(const SessionSeries& series) {
    const Eigen::Index q = series.q();
    if (q < 3) {
        throw DataError("pearson_matrix: need at least 3 frames, got " + std::to_string(q));
    }
    Eigen::MatrixXd corr =
        (series.values.transpose() * series.values) / static_cast<double>(q - 1);
    corr = ((corr + corr.transpose()) / 2.0).eval();
    corr = corr.cwiseMax(-1.0).cwiseMin(1.0);
    corr.diagonal().setOnes();
    return corr;
}

namespace {

double inverse_residual(const Eigen::MatrixXd& inv, const Eigen::MatrixXd& mat) {
    const Eigen::Index n = mat.rows();
    return (inv * mat - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

// Symmetric inverse through the eigendecomposition; valid only when all
// shifted eigenvalues are strictly positive.
bool try_inverse(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& eig,
                 const Eigen::MatrixXd& mat, double lambda, Eigen::MatrixXd& out) {
    const Eigen::VectorXd shifted = eig.eigenvalues().array() + lambda;
    if ((shifted.array() <= 0.0).any()) return false;
    out = eig.eigenvectors() * shifted.cwiseInverse().asDiagonal() *
          eig.eigenvectors().transpose();
    out = ((out + out.transpose()) / 2.0).eval();
    const Eigen::MatrixXd target =
        lambda == 0.0
            ? mat
            : (mat + lambda * Eigen::MatrixXd::Identity(mat.rows(), mat.cols())).eval();
    return inverse_residual(out, target) < kInverseResidualTol;
}

} // namespace

std::pair<Eigen::MatrixXd, double> precision_matrix(const Eigen::MatrixXd& pearson,
                                                    std::span<const double> ridge_ladder) {
    if (pearson.rows() != pearson.cols()) {
        throw ContractError("precision_matrix: matrix is not square");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pearson);
    if (eig.info() != Eigen::Success) {
        throw NumericError("precision_matrix: eigendecomposition failed");
    }

    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const bool well_posed = lo > 0.0 && hi / lo <= kMaxCondition;

    Eigen::MatrixXd precision;
    if (well_posed && try_inverse(eig, pearson, 0.0, precision)) {
        return {std::move(precision), 0.0};
    }
    for (const double lambda : ridge_ladder) {
        if (try_inverse(eig, pearson, lambda, precision)) {
            return {std::move(precision), lambda};
        }
    }
    throw NumericError("precision_matrix: inversion failed at every ridge level (min eigenvalue " +
                       std::to_string(lo) + ")");
}

Eigen::MatrixXd partial_correlation(const Eigen::MatrixXd& precision) {
    const Eigen::Index n = precision.rows();
    if (precision.cols() != n) {
        throw ContractError("partial_correlation: matrix is not square");
    }
    if ((precision.diagonal().array() <= 0.0).any()) {
        throw NumericError("partial_correlation: precision diagonal is not strictly positive");
    }
    const Eigen::VectorXd inv_sqrt = precision.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd partial = -(inv_sqrt.asDiagonal() * precision * inv_sqrt.asDiagonal());
    partial = ((partial + partial.transpose()) / 2.0).eval();

    constexpr double kClipSlack = 1e-9;
    const double overshoot = (partial.cwiseAbs().maxCoeff()) - 1.0;
    if (overshoot > kClipSlack) {
        throw NumericError("partial_correlation: entry exceeds [-1, 1] by " +
                           std::to_string(overshoot));
    }
    partial = partial.cwiseMax(-1.0).cwiseMin(1.0);
    partial.diagonal().setOnes();
    return partial;
}

CorrelationStructure correlation_structure(const SessionSeries& series,
                                           std::span<const double> ridge_ladder) {
    CorrelationStructure cs;
    cs.pearson = pearson_matrix(series);
    auto [precision, lambda] = precision_matrix(cs.pearson, ridge_ladder);
    cs.precision = std::move(precision);
    cs.ridge_applied = lambda;
    cs.partial = partial_correlation(cs.precision);
    return cs;
}

} // namespace recovgraph
