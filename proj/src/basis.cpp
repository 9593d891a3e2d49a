#include "mnpiv/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mnpiv {

namespace {

// Index i of the knot span [knots[i], knots[i+1]) containing x, restricted to
// the non-degenerate spans; x == 1 maps to the last span.
int find_span(const Eigen::VectorXd& knots, int degree, double x) {
    const int last = static_cast<int>(knots.size()) - degree - 2;
    if (x >= knots[last + 1]) return last;
    const double* begin = knots.data() + degree;
    const double* end = knots.data() + last + 2;
    int i = static_cast<int>(std::upper_bound(begin, end, x) - knots.data()) - 1;
    return std::min(std::max(i, degree), last);
}

// Nonzero basis values N_{span-degree..span, degree}(x), standard triangular
// recurrence.
void basis_funs(const Eigen::VectorXd& knots, int degree, int span, double x,
                double* out) {
    out[0] = 1.0;
    double left[32], right[32];
    for (int j = 1; j <= degree; ++j) {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        out[j] = saved;
    }
}

void check_point(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("basis: evaluation point outside [0,1]");
}

Eigen::VectorXd raw_eval(const SplineBasis& basis, double x) {
    const int d = basis.degree;
    const int span = find_span(basis.knots, d, x);
    double vals[32];
    basis_funs(basis.knots, d, span, x, vals);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.dim);
    for (int j = 0; j <= d; ++j) out[span - d + j] = vals[j];
    return out;
}

Eigen::VectorXd raw_eval_deriv(const SplineBasis& basis, double x) {
    const int d = basis.degree;
    const Eigen::VectorXd& t = basis.knots;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.dim);
    if (d == 0) return out;

    // N'_{i,d} = d * ( N_{i,d-1}/(t_{i+d}-t_i) - N_{i+1,d-1}/(t_{i+d+1}-t_{i+1}) ),
    // terms with a zero denominator dropped.
    const int span = find_span(t, d, x);
    double lower[32];
    basis_funs(t, d - 1, span, x, lower);  // N_{span-d+1..span, d-1}

    auto lower_val = [&](int i) -> double {
        const int off = i - (span - d + 1);
        return (off >= 0 && off <= d - 1) ? lower[off] : 0.0;
    };
    for (int i = span - d; i <= span; ++i) {
        double v = 0.0;
        const double den1 = t[i + d] - t[i];
        if (den1 > 0.0) v += lower_val(i) / den1;
        const double den2 = t[i + d + 1] - t[i + 1];
        if (den2 > 0.0) v -= lower_val(i + 1) / den2;
        out[i] = d * v;
    }
    return out;
}

} // namespace

void gauss_legendre_rule(int n, double lo, double hi,
                         std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton iteration on the Legendre polynomial
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = 2.0 / ((1.0 - x * x) * pp * pp) * half;
        weights[n - 1 - i] = weights[i];
    }
}

SplineBasis make_basis(int degree, int num_interior_knots) {
    if (degree < 1)
        throw std::invalid_argument("make_basis: degree must be >= 1");
    if (num_interior_knots < 0)
        throw std::invalid_argument("make_basis: interior knot count must be >= 0");
    if (degree > 30)
        throw std::invalid_argument("make_basis: degree too large");

    SplineBasis b;
    b.degree = degree;
    b.dim = num_interior_knots + degree + 1;
    b.interior_knots.resize(num_interior_knots);
    for (int i = 0; i < num_interior_knots; ++i)
        b.interior_knots[i] = static_cast<double>(i + 1) / (num_interior_knots + 1);

    b.knots.resize(b.dim + degree + 1);
    for (int i = 0; i <= degree; ++i) {
        b.knots[i] = 0.0;
        b.knots[b.dim + i] = 1.0;
    }
    for (int i = 0; i < num_interior_knots; ++i)
        b.knots[degree + 1 + i] = b.interior_knots[i];
    return b;
}

SplineBasis orthonormalized(const SplineBasis& basis) {
    SplineBasis raw = basis;
    raw.rotation.resize(0, 0);
    const Eigen::MatrixXd G = gram_matrix(raw);
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("orthonormalized: Gram matrix not positive definite");
    SplineBasis out = raw;
    out.rotation = llt.matrixL()
                       .solve(Eigen::MatrixXd::Identity(raw.dim, raw.dim));
    return out;
}

Eigen::VectorXd eval(const SplineBasis& basis, double x) {
    check_point(x);
    Eigen::VectorXd v = raw_eval(basis, x);
    return basis.has_rotation() ? Eigen::VectorXd(basis.rotation * v) : v;
}

Eigen::VectorXd eval_deriv(const SplineBasis& basis, double x) {
    check_point(x);
    Eigen::VectorXd v = raw_eval_deriv(basis, x);
    return basis.has_rotation() ? Eigen::VectorXd(basis.rotation * v) : v;
}

Eigen::MatrixXd design_matrix(const SplineBasis& basis, const Eigen::VectorXd& points) {
    Eigen::MatrixXd out(points.size(), basis.dim);
    for (Eigen::Index i = 0; i < points.size(); ++i)
        out.row(i) = eval(basis, points[i]).transpose();
    return out;
}

Eigen::MatrixXd gram_matrix(const SplineBasis& basis, double lo, double hi) {
    if (!(lo >= 0.0 && hi <= 1.0 && lo < hi))
        throw std::invalid_argument("gram_matrix: need 0 <= lo < hi <= 1");

    // Break [lo,hi] at interior knots so each piece is a polynomial; a
    // (degree+1)-point rule is then exact for the degree-2d integrand.
    std::vector<double> cuts{lo};
    for (Eigen::Index i = 0; i < basis.interior_knots.size(); ++i) {
        const double k = basis.interior_knots[i];
        if (k > lo && k < hi) cuts.push_back(k);
    }
    cuts.push_back(hi);

    std::vector<double> nodes, weights;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(basis.dim, basis.dim);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        gauss_legendre_rule(basis.degree + 1, cuts[s], cuts[s + 1], nodes, weights);
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const Eigen::VectorXd p = eval(basis, nodes[q]);
            G.noalias() += weights[q] * (p * p.transpose());
        }
    }
    return G;
}

double kernel_value(const Kernel&, double t) {
    return (std::fabs(t) < 1.0) ? 0.75 * (1.0 - t * t) : 0.0;
}

double kernel_weight(const Kernel& kernel, double h, double u) {
    if (!(h > 0.0))
        throw std::invalid_argument("kernel_weight: bandwidth must be positive");
    return kernel_value(kernel, u / h) / h;
}

} // namespace mnpiv
