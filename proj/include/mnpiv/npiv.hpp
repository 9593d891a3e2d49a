#pragma once

#include "mnpiv/basis.hpp"
#include "mnpiv/qp.hpp"

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace mnpiv {

/// Map from a variable's original scale onto [0,1].
struct RescaleMeta {
    enum class Kind { Identity, MinMax, Ecdf };
    Kind kind = Kind::Identity;
    double lo = 0.0, hi = 1.0;        // MinMax range
    std::vector<double> sorted;       // Ecdf support (ascending)

    /// Maps an original-scale value into [0,1]; throws if outside the
    /// recorded range.
    double to_unit(double value) const;
};

/// i.i.d. observations (Y_i, X_i, W_i) with X and W already rescaled to [0,1].
struct Sample {
    Eigen::VectorXd y;
    Eigen::VectorXd x;
    Eigen::VectorXd w;
    RescaleMeta meta_x;
    RescaleMeta meta_w;

    Eigen::Index n() const { return y.size(); }
};

/// Validates lengths and ranges; x,w must already be unit-scale.
Sample make_sample(Eigen::VectorXd y, Eigen::VectorXd x, Eigen::VectorXd w,
                   RescaleMeta meta_x = {}, RescaleMeta meta_w = {});

/// Builds a Sample from original-scale columns, rescaling x and w.
Sample make_sample_rescaled(Eigen::VectorXd y, Eigen::VectorXd x_orig,
                            Eigen::VectorXd w_orig, RescaleMeta::Kind kind);

struct NpivConfig {
    SplineBasis basis_x;               // dimension K
    SplineBasis basis_w;               // dimension J >= K
    bool constrained = false;
    int constraint_grid_size = 401;
    std::optional<double> norm_bound;  // C_b, off by default
};

struct NpivFit {
    Eigen::VectorXd beta;
    NpivConfig config;
    RescaleMeta meta_x;
    bool constrained = false;
    QpSolution qp_diag;
    double tau_hat = 0.0;        // unrestricted sieve ill-posedness estimate
    double min_slope_hat = 0.0;  // min of D p(x)'beta over the checked grid
    double objective = 0.0;      // (Y-Pb)'Q(Q'Q)^{-1}Q'(Y-Pb)
    Eigen::VectorXd constraint_grid;
    bool grid_refined = false;
};

/// Sieve two-stage least squares without shape constraints.
NpivFit fit_unconstrained(const Sample& sample, const NpivConfig& config);

/// Same objective with the fitted function constrained to be nondecreasing
/// (derivative nonnegative on the constraint grid; for degree <= 2 regressor
/// bases the grid collapses to the knot set).
NpivFit fit_constrained(const Sample& sample, const NpivConfig& config);

/// Dispatch on config.constrained.
NpivFit fit(const Sample& sample, const NpivConfig& config);

/// Pointwise evaluation p(x)'beta at original-scale points.
Eigen::VectorXd predict(const NpivFit& fit, const Eigen::VectorXd& x_grid);

/// Named population design: X = Phi(rho*Phi^-1(W) + sqrt(1-rho^2) U) with
/// W ~ U(0,1), U ~ N(0,1). Both marginals are uniform; the conditional law
/// is a Gaussian copula, severely ill-posed for rho != 0.
struct NormalCopulaDesign {
    double rho = 0.0;
};

/// Unrestricted sieve ill-posedness measure 1/sigma_min(Gw^-1/2 M Gx^-1/2)
/// with M = Q'P/n, Gw = Q'Q/n, Gx = P'P/n.
double sieve_tau_hat(const Sample& sample, const NpivConfig& config);

/// Population version: the same matrices with expectations computed by
/// Gauss-Legendre quadrature (>= 200 nodes) under the given design.
double sieve_tau_hat(const NormalCopulaDesign& design, const NpivConfig& config);

/// Heuristic lower bound on the restricted sieve measure tau_{n,t}(a):
/// maximizes the truncated-norm Rayleigh ratio over the slope-bounded set by
/// seeded multi-start projected power iteration. a may be +infinity.
double restricted_tau_hat(const Sample& sample, const NpivConfig& config,
                          double a, double trunc_lo = 0.05, double trunc_hi = 0.95);
double restricted_tau_hat(const NormalCopulaDesign& design, const NpivConfig& config,
                          double a, double trunc_lo = 0.05, double trunc_hi = 0.95);

/// Constants entering the identification bound.
struct IdentificationConstants {
    double c_f = 0.0;
    double c_w = 0.0;
    double C_F = 0.0;
    double w1 = 0.0, w2 = 0.0;
    double x1 = 0.0, x2 = 0.0;
    double xt1 = 0.0, xt2 = 0.0;  // truncation interval, x1 < xt1 < xt2 < x2
};

/// C1/c_p with C1 = sqrt(xt2-xt1)/min(xt1-x1, x2-xt2) and
/// c_p = min(1-w2, w1) * min(C_F-1, 2) * c_w * c_f / 4.
double identification_constant(const IdentificationConstants& z);

} // namespace mnpiv
