#ifndef RECOVGRAPH_CORRELATION_HPP
#define RECOVGRAPH_CORRELATION_HPP

#include "recovgraph/ingest.hpp"

#include <Eigen/Core>

#include <span>
#include <utility>
#include <vector>

namespace recovgraph {

/// Escalation ladder for ridge regularization of near-singular correlation
/// matrices. The smallest lambda whose inverse passes the residual gate wins.
inline constexpr double kDefaultRidgeLadder[] = {1e-10, 1e-8, 1e-6, 1e-4};

/// Condition-number gate above which the plain inverse is not attempted.
inline constexpr double kMaxCondition = 1e12;

/// Residual gate: max-abs of (precision * matrix - identity).
inline constexpr double kInverseResidualTol = 1e-6;

/// Correlation, precision and partial-correlation matrices of one session.
struct CorrelationStructure {
    Eigen::MatrixXd pearson;    // symmetric, unit diagonal, entries in [-1, 1]
    Eigen::MatrixXd precision;  // inverse of pearson (+ ridge when applied)
    Eigen::MatrixXd partial;    // symmetric, unit diagonal
    double ridge_applied = 0.0; // 0 when the plain inversion succeeded
};

/// Inter-column correlation estimate on standardized data:
/// sum_t a(t) b(t) / (q - 1). The diagonal is set to exactly 1 and
/// off-diagonal entries are clipped to [-1, 1].
Eigen::MatrixXd pearson_matrix(const SessionSeries& series);

/// Inverts a correlation matrix, escalating through the ridge ladder when the
/// matrix is numerically singular or its condition estimate exceeds
/// kMaxCondition. Returns the precision matrix and the ridge lambda used
/// (0 for a clean inversion). Throws NumericError when even the largest
/// lambda fails the residual gate.
std::pair<Eigen::MatrixXd, double> precision_matrix(
    const Eigen::MatrixXd& pearson,
    std::span<const double> ridge_ladder = kDefaultRidgeLadder);

/// partial(s,t) = -precision(s,t) / sqrt(precision(s,s) * precision(t,t)),
/// with a unit diagonal. Throws NumericError if the precision diagonal is
/// not strictly positive or an off-diagonal entry leaves [-1, 1] by more
/// than 1e-9 (smaller excursions are clipped).
Eigen::MatrixXd partial_correlation(const Eigen::MatrixXd& precision);

/// pearson_matrix + precision_matrix + partial_correlation in one call.
CorrelationStructure correlation_structure(
    const SessionSeries& series,
    std::span<const double> ridge_ladder = kDefaultRidgeLadder);

} // namespace recovgraph

#endif
