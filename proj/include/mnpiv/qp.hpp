#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace mnpiv {

/// Convex quadratic program
///
///   min_b  0.5 b'H b + f'b   s.t.  A b >= lower   (and optionally ||b|| <= norm_bound)
///
/// H must be symmetric positive semidefinite up to round-off; a ridge floor of
/// 1e-10 * trace(H)/K is applied when the smallest eigenvalue dips below zero
/// beyond round-off. `lower` defaults to zero (homogeneous cone constraints),
/// in which case b = 0 is always feasible.
struct Qp {
    Eigen::MatrixXd H;
    Eigen::VectorXd f;
    Eigen::MatrixXd A;                    // m x K, may have zero rows
    std::optional<double> norm_bound;     // C_b, off by default
    Eigen::VectorXd lower;                // size m or empty (= zeros)
};

enum class QpStatus { Optimal, MaxIter, Degenerate };

struct QpSolution {
    Eigen::VectorXd b;
    std::vector<int> active_set;          // working set at exit, sorted
    Eigen::VectorXd lambda;               // multipliers, size m
    double kkt_residual = 0.0;
    double objective = 0.0;               // 0.5 b'Hb + f'b
    int iterations = 0;
    QpStatus status = QpStatus::Optimal;
    double ridge = 0.0;                   // ridge added to H, if any
    double ball_multiplier = 0.0;         // multiplier on the norm bound
};

struct QpOptions {
    int max_iterations = 0;               // 0 -> 50 * K
    std::optional<Eigen::VectorXd> start; // feasible start; default 0
};

/// Primal active-set solve. Throws std::invalid_argument on malformed input
/// (asymmetric or indefinite H, infeasible start), std::runtime_error if the
/// problem appears unbounded.
QpSolution solve_qp(const Qp& qp, const QpOptions& options = {});

/// Max of stationarity ||Hb + f + mu*b - A'lambda||_inf, primal feasibility
/// violation, dual feasibility violation and complementary slackness.
double kkt_residual(const Qp& qp, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& lambda, double ball_multiplier = 0.0);

} // namespace mnpiv
