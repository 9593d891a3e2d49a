#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mnpiv {

/// Univariate B-spline basis on [0,1] with a clamped (open) knot vector:
/// (degree+1)-fold boundary knots plus equispaced interior knots. The raw
/// basis is the standard normalized one (nonnegative, sums to one at every
/// point). An orthonormalized variant carries an invertible rotation applied
/// on top of the raw values.
struct SplineBasis {
    int degree = 0;
    Eigen::VectorXd interior_knots;  // strictly increasing, inside (0,1)
    Eigen::VectorXd knots;           // full clamped vector, size dim+degree+1
    int dim = 0;
    Eigen::MatrixXd rotation;        // empty for the raw basis
    bool has_rotation() const { return rotation.size() > 0; }
};

/// Builds a degree >= 1 basis with the given number of equispaced interior
/// knots. dim = num_interior_knots + degree + 1.
SplineBasis make_basis(int degree, int num_interior_knots);

/// Same basis span rotated so the functions are orthonormal in L2[0,1].
SplineBasis orthonormalized(const SplineBasis& basis);

/// Basis values at x in [0,1] (Cox-de Boor recursion).
Eigen::VectorXd eval(const SplineBasis& basis, double x);

/// Componentwise first derivatives at x in [0,1].
Eigen::VectorXd eval_deriv(const SplineBasis& basis, double x);

/// Rows are eval() at each point.
Eigen::MatrixXd design_matrix(const SplineBasis& basis, const Eigen::VectorXd& points);

/// Exact Gram matrix of the basis over [lo,hi] (Gauss-Legendre per knot span).
Eigen::MatrixXd gram_matrix(const SplineBasis& basis, double lo = 0.0, double hi = 1.0);

/// n-point Gauss-Legendre rule on [lo,hi].
void gauss_legendre_rule(int n, double lo, double hi,
                         std::vector<double>& nodes, std::vector<double>& weights);

/// Kernel for the stochastic-dominance test. Epanechnikov only: positive and
/// continuous on (-1,1), zero outside, integrates to one.
struct Kernel {
    enum class Family { Epanechnikov };
    Family family = Family::Epanechnikov;
};

/// K(t).
double kernel_value(const Kernel& kernel, double t);

/// K_h(u) = K(u/h)/h, h > 0.
double kernel_weight(const Kernel& kernel, double h, double u);

} // namespace mnpiv
