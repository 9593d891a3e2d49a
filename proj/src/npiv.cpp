#include "mnpiv/npiv.hpp"

#include "mnpiv/normal.hpp"
#include "mnpiv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

namespace mnpiv {

namespace {

constexpr double kGramTol = 1e-12;

// Eigenvalue floor check with the ridge repair used across the module.
// Returns the ridge actually applied; throws `what` when the matrix is broken
// beyond a round-off level repair.
double ridge_repair(Eigen::MatrixXd& G, const std::string& what) {
    if (!G.allFinite()) throw std::runtime_error(what + ": non-finite Gram matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    const double lmin = es.eigenvalues().minCoeff();
    if (!(lmax > 0.0)) throw std::runtime_error(what + ": zero design matrix");
    if (lmin < -1e-8 * lmax) throw std::runtime_error(what + ": rank deficient beyond ridge repair");
    if (lmin > kGramTol * lmax) return 0.0;
    const double ridge = 1e-10 * G.trace() / static_cast<double>(G.rows());
    G.diagonal().array() += ridge;
    return ridge;
}

struct ProjectedLs {
    Eigen::MatrixXd P, Q;
    Eigen::MatrixXd H;   // P'Q(Q'Q)^-1 Q'P
    Eigen::VectorXd f;   // -P'Q(Q'Q)^-1 Q'Y
    Eigen::LDLT<Eigen::MatrixXd> qq;
    double ridge_w = 0.0;
};

ProjectedLs build_projected_ls(const Sample& sample, const NpivConfig& config) {
    const int K = config.basis_x.dim;
    const int J = config.basis_w.dim;
    if (J < K)
        throw std::invalid_argument("npiv: instrument basis dimension must be >= regressor basis dimension");
    if (sample.n() <= J)
        throw std::invalid_argument("npiv: need n > dim(basis_w)");

    ProjectedLs out;
    out.P = design_matrix(config.basis_x, sample.x);
    out.Q = design_matrix(config.basis_w, sample.w);

    Eigen::MatrixXd Gqq = out.Q.transpose() * out.Q;
    out.ridge_w = ridge_repair(Gqq, "npiv: instrument basis (basis_w)");
    out.qq.compute(Gqq);

    const Eigen::MatrixXd B = out.Q.transpose() * out.P;    // J x K
    const Eigen::MatrixXd R = out.qq.solve(B);              // (Q'Q)^-1 Q'P
    out.H = B.transpose() * R;
    out.H = 0.5 * (out.H + out.H.transpose()).eval();
    out.f = -R.transpose() * (out.Q.transpose() * sample.y);
    return out;
}

double projected_objective(const ProjectedLs& ls, const Sample& sample,
                           const Eigen::VectorXd& beta) {
    const Eigen::VectorXd u = ls.Q.transpose() * (sample.y - ls.P * beta);
    return u.dot(ls.qq.solve(u));
}

// Points where the derivative sign constraint is imposed. Quadratic or lower
// degree derivatives are piecewise linear, so the knot set suffices; higher
// degrees get a dense grid plus the knots.
Eigen::VectorXd constraint_points(const SplineBasis& basis, int grid_size) {
    std::set<double> pts{0.0, 1.0};
    for (Eigen::Index i = 0; i < basis.interior_knots.size(); ++i)
        pts.insert(basis.interior_knots[i]);
    if (basis.degree > 2) {
        const int g = std::max(grid_size, 2);
        for (int i = 0; i < g; ++i)
            pts.insert(static_cast<double>(i) / (g - 1));
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(pts.size()));
    Eigen::Index k = 0;
    for (double p : pts) out[k++] = p;
    return out;
}

Eigen::MatrixXd deriv_design(const SplineBasis& basis, const Eigen::VectorXd& pts) {
    Eigen::MatrixXd A(pts.size(), basis.dim);
    for (Eigen::Index i = 0; i < pts.size(); ++i)
        A.row(i) = eval_deriv(basis, pts[i]).transpose();
    return A;
}

double min_slope_on(const SplineBasis& basis, const Eigen::VectorXd& beta,
                    const Eigen::VectorXd& pts) {
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < pts.size(); ++i)
        m = std::min(m, eval_deriv(basis, pts[i]).dot(beta));
    return m;
}

// Greville abscissae: coefficients representing the identity function, whose
// derivative is one everywhere. Strictly feasible for the monotone cone, so
// the active-set solve starts away from the degenerate vertex at zero.
Eigen::VectorXd greville_start(const SplineBasis& basis) {
    Eigen::VectorXd xi(basis.dim);
    for (int i = 0; i < basis.dim; ++i) {
        double acc = 0.0;
        for (int j = 1; j <= basis.degree; ++j) acc += basis.knots[i + j];
        xi[i] = acc / basis.degree;
    }
    return xi;
}

Eigen::VectorXd verification_points(const SplineBasis& basis, int grid_size) {
    const int g = 5 * (std::max(grid_size, 2) - 1) + 1;  // 5x finer than the grid
    std::set<double> pts;
    for (int i = 0; i < g; ++i) pts.insert(static_cast<double>(i) / (g - 1));
    for (Eigen::Index i = 0; i < basis.interior_knots.size(); ++i)
        pts.insert(basis.interior_knots[i]);
    Eigen::VectorXd out(static_cast<Eigen::Index>(pts.size()));
    Eigen::Index k = 0;
    for (double p : pts) out[k++] = p;
    return out;
}

// sigma_min of Gw^-1/2 M Gx^-1/2; throws on singular Gram matrices.
double tau_from_matrices(Eigen::MatrixXd Gw, Eigen::MatrixXd M, Eigen::MatrixXd Gx) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(Gw), ex(Gx);
    if (ew.eigenvalues().minCoeff() <= kGramTol * std::max(ew.eigenvalues().maxCoeff(), 1e-300))
        throw std::runtime_error("sieve_tau_hat: singular instrument Gram matrix");
    if (ex.eigenvalues().minCoeff() <= kGramTol * std::max(ex.eigenvalues().maxCoeff(), 1e-300))
        throw std::runtime_error("sieve_tau_hat: singular regressor Gram matrix");
    const Eigen::MatrixXd T =
        ew.operatorInverseSqrt() * M * ex.operatorInverseSqrt();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
    const double smin = svd.singularValues().minCoeff();
    if (!(smin > 0.0))
        throw std::runtime_error("sieve_tau_hat: projected operator is singular");
    return 1.0 / smin;
}

struct TauParts {
    Eigen::MatrixXd Gw, Gx, M;
    // truncated Gram over [t1,t2] in the same (empirical or population) metric
    std::function<Eigen::MatrixXd(double, double)> truncated_gram;
};

TauParts tau_parts(const Sample& sample, const NpivConfig& config) {
    const double n = static_cast<double>(sample.n());
    TauParts parts;
    const Eigen::MatrixXd P = design_matrix(config.basis_x, sample.x);
    const Eigen::MatrixXd Q = design_matrix(config.basis_w, sample.w);
    parts.Gw = (Q.transpose() * Q) / n;
    parts.Gx = (P.transpose() * P) / n;
    parts.M = (Q.transpose() * P) / n;
    const SplineBasis bx = config.basis_x;
    const Eigen::VectorXd x = sample.x;
    parts.truncated_gram = [bx, x, n](double lo, double hi) {
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(bx.dim, bx.dim);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (x[i] < lo || x[i] > hi) continue;
            const Eigen::VectorXd p = eval(bx, x[i]);
            G.noalias() += p * p.transpose();
        }
        return Eigen::MatrixXd(G / n);
    };
    return parts;
}

// Expectations under the Gaussian-copula design by tensor Gauss-Legendre on
// the latent normal scale (integrand is smooth there; the copula density on
// the unit square is unbounded at the corners).
TauParts tau_parts(const NormalCopulaDesign& design, const NpivConfig& config) {
    if (!(design.rho > -1.0 && design.rho < 1.0))
        throw std::invalid_argument("sieve_tau_hat: rho must lie in (-1,1)");
    TauParts parts;
    parts.Gw = gram_matrix(config.basis_w);
    parts.Gx = gram_matrix(config.basis_x);

    const int nodes = 201;
    const double lim = 8.0;
    std::vector<double> t, wt;
    gauss_legendre_rule(nodes, -lim, lim, t, wt);

    const double rho = design.rho;
    const double s = std::sqrt(1.0 - rho * rho);
    std::vector<Eigen::VectorXd> qvals(nodes);
    std::vector<double> phiw(nodes);
    for (int i = 0; i < nodes; ++i) {
        qvals[i] = eval(config.basis_w, norm_cdf(t[i]));
        phiw[i] = norm_pdf(t[i]);
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(config.basis_w.dim, config.basis_x.dim);
    for (int i = 0; i < nodes; ++i) {
        Eigen::VectorXd px = Eigen::VectorXd::Zero(config.basis_x.dim);
        for (int j = 0; j < nodes; ++j) {
            const double xi = norm_cdf(rho * t[i] + s * t[j]);
            px.noalias() += (wt[j] * norm_pdf(t[j])) * eval(config.basis_x, xi);
        }
        M.noalias() += (wt[i] * phiw[i]) * (qvals[i] * px.transpose());
    }
    parts.M = M;

    const SplineBasis bx = config.basis_x;
    parts.truncated_gram = [bx](double lo, double hi) { return gram_matrix(bx, lo, hi); };
    return parts;
}

double restricted_tau_impl(const TauParts& parts, const NpivConfig& config,
                           double a, double t1, double t2) {
    if (!(a >= 0.0)) throw std::invalid_argument("restricted_tau_hat: a must be >= 0");
    if (!(t1 >= 0.0 && t1 < t2 && t2 <= 1.0))
        throw std::invalid_argument("restricted_tau_hat: need 0 <= t1 < t2 <= 1");
    const int K = config.basis_x.dim;

    Eigen::MatrixXd Gt = parts.truncated_gram(t1, t2);
    Eigen::MatrixXd Gw = parts.Gw;
    const double ridge_w = ridge_repair(Gw, "restricted_tau_hat: instrument Gram");
    (void)ridge_w;
    Eigen::LDLT<Eigen::MatrixXd> qq(Gw);
    Eigen::MatrixXd S = parts.M.transpose() * qq.solve(parts.M);
    S = 0.5 * (S + S.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_s(S, Eigen::EigenvaluesOnly);
    if (es_s.eigenvalues().minCoeff() <= kGramTol * std::max(es_s.eigenvalues().maxCoeff(), 1e-300))
        throw std::runtime_error("restricted_tau_hat: singular projected operator");

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Gt, S);
    const Eigen::VectorXd evals = ges.eigenvalues();
    const Eigen::MatrixXd evecs = ges.eigenvectors();
    const double unconstrained = std::sqrt(std::max(evals[K - 1], 0.0));

    if (std::isinf(a)) return unconstrained;

    const Eigen::VectorXd grid =
        constraint_points(config.basis_x, std::max(config.constraint_grid_size, 201));
    const Eigen::MatrixXd A = deriv_design(config.basis_x, grid);
    const Eigen::Index m = A.rows();

    const auto gt_norm = [&](const Eigen::VectorXd& b) {
        return std::sqrt(std::max(b.dot(Gt * b), 0.0));
    };
    const auto s_norm = [&](const Eigen::VectorXd& b) {
        return std::sqrt(std::max(b.dot(S * b), 0.0));
    };
    // value of the admissible unit-truncated-norm representative along b
    const auto candidate_value = [&](const Eigen::VectorXd& b) {
        const double ct = gt_norm(b);
        const double cs = s_norm(b);
        if (!(ct > 1e-14) || !(cs > 0.0)) return -std::numeric_limits<double>::infinity();
        const double min_slope = (A * b).minCoeff() / ct;
        if (min_slope < -a - 1e-10 * (1.0 + a))
            return -std::numeric_limits<double>::infinity();
        return ct / cs;
    };

    // The sup equals 1/sqrt(min b'Sb) over { Ab >= -a, b'Gt b >= 1 } and the
    // ellipsoid constraint binds at the optimum. Ascend by the convex-concave
    // scheme: linearize b'Gt b >= 1 at the current point, solve the convex QP,
    // repeat. Every iterate stays feasible, so each one is a valid lower
    // bound; multi-start guards against bad local points.
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(K);  // constant function
    const double const_gt = gt_norm(ones);
    const auto make_feasible = [&](const Eigen::VectorXd& d) {
        // project onto {Ab >= -a}, then push the Gt-norm up to one by mixing
        // in the zero-slope constant direction if needed
        Eigen::VectorXd z = d;
        if (m > 0 && (A * z).minCoeff() < -a) {
            Qp proj;
            proj.H = Eigen::MatrixXd::Identity(K, K);
            proj.f = -z;
            proj.A = A;
            proj.lower = Eigen::VectorXd::Constant(m, -a);
            z = solve_qp(proj).b;
        }
        const double cz = gt_norm(z);
        if (cz >= 1.0) return Eigen::VectorXd(z / cz);
        // solve ||z + t*ones||_Gt = 1 for t >= 0
        const double qa = const_gt * const_gt;
        const double qb = 2.0 * ones.dot(Gt * z);
        const double qc = cz * cz - 1.0;
        const double disc = std::max(qb * qb - 4.0 * qa * qc, 0.0);
        const double t = (-qb + std::sqrt(disc)) / (2.0 * qa);
        return Eigen::VectorXd(z + t * ones);
    };

    std::vector<Eigen::VectorXd> starts;
    starts.push_back(ones);
    starts.push_back(evecs.col(K - 1));
    starts.push_back(-evecs.col(K - 1));
    if (K >= 2) {
        starts.push_back(evecs.col(K - 2));
        starts.push_back(-evecs.col(K - 2));
    }
    Rng rng(0x7A55EDu);
    while (starts.size() < 16) {
        Eigen::VectorXd r(K);
        for (int i = 0; i < K; ++i) r[i] = rng.normal();
        starts.push_back(r);
    }

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& start : starts) {
        Eigen::VectorXd b = make_feasible(start);
        best = std::max(best, candidate_value(b));
        double prev = -std::numeric_limits<double>::infinity();
        for (int it = 0; it < 60; ++it) {
            Qp step;
            step.H = 2.0 * S;
            step.f = Eigen::VectorXd::Zero(K);
            step.A.resize(m + 1, K);
            step.A.topRows(m) = A;
            step.A.row(m) = 2.0 * (Gt * b).transpose();
            step.lower = Eigen::VectorXd::Constant(m + 1, -a);
            step.lower[m] = 1.0 + b.dot(Gt * b);
            QpOptions opts;
            opts.start = b;  // feasible: the linearization holds with slack at b
            opts.max_iterations = 50 * K + 2 * static_cast<int>(m + 1);
            const QpSolution sol = solve_qp(step, opts);
            if (sol.status != QpStatus::Optimal || !sol.b.allFinite()) break;
            b = sol.b;
            const double val = candidate_value(b);
            best = std::max(best, val);
            if (std::isfinite(val) &&
                std::fabs(val - prev) < 1e-11 * (1.0 + std::fabs(val)))
                break;
            prev = val;
        }
    }
    // if the unconstrained maximizer is itself admissible, report the exact sup
    if (best < unconstrained &&
        candidate_value(evecs.col(K - 1)) >= unconstrained * (1.0 - 1e-12))
        best = unconstrained;
    return std::min(best, unconstrained);
}

} // namespace

double RescaleMeta::to_unit(double value) const {
    switch (kind) {
        case Kind::Identity:
            if (!(value >= 0.0 && value <= 1.0))
                throw std::invalid_argument("rescale: value outside [0,1]");
            return value;
        case Kind::MinMax: {
            if (!(value >= lo && value <= hi))
                throw std::invalid_argument("rescale: value outside recorded min/max range");
            return (value - lo) / (hi - lo);
        }
        case Kind::Ecdf: {
            if (sorted.empty())
                throw std::invalid_argument("rescale: empty ecdf support");
            if (!(value >= sorted.front() && value <= sorted.back()))
                throw std::invalid_argument("rescale: value outside recorded ecdf support");
            const std::size_t n = sorted.size();
            if (value >= sorted.back()) return 1.0;
            const auto it = std::upper_bound(sorted.begin(), sorted.end(), value);
            const std::size_t hi_idx = static_cast<std::size_t>(it - sorted.begin());
            const std::size_t lo_idx = hi_idx - 1;
            const double frac =
                (value - sorted[lo_idx]) / (sorted[hi_idx] - sorted[lo_idx]);
            return (static_cast<double>(lo_idx) + frac) / static_cast<double>(n - 1);
        }
    }
    throw std::logic_error("rescale: unknown kind");
}

Sample make_sample(Eigen::VectorXd y, Eigen::VectorXd x, Eigen::VectorXd w,
                   RescaleMeta meta_x, RescaleMeta meta_w) {
    if (y.size() != x.size() || y.size() != w.size())
        throw std::invalid_argument("make_sample: column lengths differ");
    if (y.size() < 2) throw std::invalid_argument("make_sample: need n >= 2");
    if (!y.allFinite() || !x.allFinite() || !w.allFinite())
        throw std::invalid_argument("make_sample: non-finite values");
    if (x.minCoeff() < 0.0 || x.maxCoeff() > 1.0)
        throw std::invalid_argument("make_sample: x outside [0,1]");
    if (w.minCoeff() < 0.0 || w.maxCoeff() > 1.0)
        throw std::invalid_argument("make_sample: w outside [0,1]");
    Sample s;
    s.y = std::move(y);
    s.x = std::move(x);
    s.w = std::move(w);
    s.meta_x = std::move(meta_x);
    s.meta_w = std::move(meta_w);
    return s;
}

Sample make_sample_rescaled(Eigen::VectorXd y, Eigen::VectorXd x_orig,
                            Eigen::VectorXd w_orig, RescaleMeta::Kind kind) {
    auto build = [&](const Eigen::VectorXd& col, const char* name) {
        RescaleMeta meta;
        meta.kind = kind;
        if (kind == RescaleMeta::Kind::MinMax) {
            meta.lo = col.minCoeff();
            meta.hi = col.maxCoeff();
            if (!(meta.hi > meta.lo))
                throw std::invalid_argument(std::string("make_sample_rescaled: column ") +
                                            name + " is constant");
        } else if (kind == RescaleMeta::Kind::Ecdf) {
            meta.sorted.assign(col.data(), col.data() + col.size());
            std::sort(meta.sorted.begin(), meta.sorted.end());
            if (!(meta.sorted.back() > meta.sorted.front()))
                throw std::invalid_argument(std::string("make_sample_rescaled: column ") +
                                            name + " is constant");
        }
        return meta;
    };
    RescaleMeta mx = build(x_orig, "x");
    RescaleMeta mw = build(w_orig, "w");
    Eigen::VectorXd x(x_orig.size()), w(w_orig.size());
    for (Eigen::Index i = 0; i < x_orig.size(); ++i) x[i] = mx.to_unit(x_orig[i]);
    for (Eigen::Index i = 0; i < w_orig.size(); ++i) w[i] = mw.to_unit(w_orig[i]);
    return make_sample(std::move(y), std::move(x), std::move(w), std::move(mx),
                       std::move(mw));
}

NpivFit fit_unconstrained(const Sample& sample, const NpivConfig& config) {
    ProjectedLs ls = build_projected_ls(sample, config);
    const int K = config.basis_x.dim;

    Eigen::MatrixXd H = ls.H;
    const double ridge_x = ridge_repair(H, "npiv: regressor basis (basis_x)");

    NpivFit fit;
    fit.config = config;
    fit.meta_x = sample.meta_x;
    fit.constrained = false;

    if (config.norm_bound) {
        Qp qp;
        qp.H = H;
        qp.f = ls.f;
        qp.A = Eigen::MatrixXd(0, K);
        qp.norm_bound = config.norm_bound;
        fit.qp_diag = solve_qp(qp);
        fit.beta = fit.qp_diag.b;
    } else {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        fit.beta = ldlt.solve(-ls.f);
        if (!fit.beta.allFinite())
            throw std::runtime_error("npiv: regressor basis (basis_x): projected normal equations failed");
        fit.qp_diag.b = fit.beta;
        fit.qp_diag.lambda = Eigen::VectorXd::Zero(0);
        fit.qp_diag.kkt_residual = (H * fit.beta + ls.f).lpNorm<Eigen::Infinity>();
        fit.qp_diag.objective = 0.5 * fit.beta.dot(H * fit.beta) + ls.f.dot(fit.beta);
        fit.qp_diag.status = QpStatus::Optimal;
        fit.qp_diag.ridge = ridge_x;
    }

    fit.objective = projected_objective(ls, sample, fit.beta);
    fit.tau_hat = sieve_tau_hat(sample, config);
    fit.constraint_grid = constraint_points(config.basis_x, config.constraint_grid_size);
    fit.min_slope_hat = min_slope_on(config.basis_x, fit.beta, fit.constraint_grid);
    return fit;
}

NpivFit fit_constrained(const Sample& sample, const NpivConfig& config) {
    ProjectedLs ls = build_projected_ls(sample, config);

    Eigen::MatrixXd H = ls.H;
    ridge_repair(H, "npiv: regressor basis (basis_x)");

    NpivFit fit;
    fit.config = config;
    fit.meta_x = sample.meta_x;
    fit.constrained = true;
    fit.constraint_grid = constraint_points(config.basis_x, config.constraint_grid_size);

    Qp qp;
    qp.H = H;
    qp.f = ls.f;
    qp.A = deriv_design(config.basis_x, fit.constraint_grid);
    qp.norm_bound = config.norm_bound;
    QpOptions opts;
    opts.start = greville_start(config.basis_x);
    opts.max_iterations = 50 * config.basis_x.dim + 2 * static_cast<int>(qp.A.rows());
    fit.qp_diag = solve_qp(qp, opts);
    fit.beta = fit.qp_diag.b;

    const Eigen::VectorXd verify = verification_points(config.basis_x, config.constraint_grid_size);
    double vmin = min_slope_on(config.basis_x, fit.beta, verify);
    if (vmin < -1e-8) {
        // one retry with the verification grid folded into the constraints
        std::set<double> pts(fit.constraint_grid.data(),
                             fit.constraint_grid.data() + fit.constraint_grid.size());
        pts.insert(verify.data(), verify.data() + verify.size());
        Eigen::VectorXd refined(static_cast<Eigen::Index>(pts.size()));
        Eigen::Index k = 0;
        for (double p : pts) refined[k++] = p;
        fit.constraint_grid = refined;
        qp.A = deriv_design(config.basis_x, refined);
        opts.max_iterations = 50 * config.basis_x.dim + 2 * static_cast<int>(qp.A.rows());
        fit.qp_diag = solve_qp(qp, opts);
        fit.beta = fit.qp_diag.b;
        fit.grid_refined = true;
        vmin = min_slope_on(config.basis_x, fit.beta, verify);
    }
    fit.min_slope_hat = std::min(vmin, min_slope_on(config.basis_x, fit.beta,
                                                    fit.constraint_grid));
    fit.objective = projected_objective(ls, sample, fit.beta);
    fit.tau_hat = sieve_tau_hat(sample, config);
    return fit;
}

NpivFit fit(const Sample& sample, const NpivConfig& config) {
    return config.constrained ? fit_constrained(sample, config)
                              : fit_unconstrained(sample, config);
}

Eigen::VectorXd predict(const NpivFit& fit, const Eigen::VectorXd& x_grid) {
    Eigen::VectorXd out(x_grid.size());
    for (Eigen::Index i = 0; i < x_grid.size(); ++i) {
        const double u = fit.meta_x.to_unit(x_grid[i]);
        out[i] = eval(fit.config.basis_x, u).dot(fit.beta);
    }
    return out;
}

double sieve_tau_hat(const Sample& sample, const NpivConfig& config) {
    TauParts parts = tau_parts(sample, config);
    return tau_from_matrices(parts.Gw, parts.M, parts.Gx);
}

double sieve_tau_hat(const NormalCopulaDesign& design, const NpivConfig& config) {
    TauParts parts = tau_parts(design, config);
    return tau_from_matrices(parts.Gw, parts.M, parts.Gx);
}

double restricted_tau_hat(const Sample& sample, const NpivConfig& config,
                          double a, double trunc_lo, double trunc_hi) {
    return restricted_tau_impl(tau_parts(sample, config), config, a, trunc_lo, trunc_hi);
}

double restricted_tau_hat(const NormalCopulaDesign& design, const NpivConfig& config,
                          double a, double trunc_lo, double trunc_hi) {
    return restricted_tau_impl(tau_parts(design, config), config, a, trunc_lo, trunc_hi);
}

double identification_constant(const IdentificationConstants& z) {
    const auto demand = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(std::string("identification_constant: ") + msg);
    };
    demand(z.x1 >= 0.0, "need x1 >= 0");
    demand(z.x1 < z.xt1, "need x1 < xt1");
    demand(z.xt1 < z.xt2, "need xt1 < xt2");
    demand(z.xt2 < z.x2, "need xt2 < x2");
    demand(z.x2 <= 1.0, "need x2 <= 1");
    demand(z.w1 >= 0.0, "need w1 >= 0");
    demand(z.w1 < z.w2, "need w1 < w2");
    demand(z.w2 <= 1.0, "need w2 <= 1");
    demand(z.C_F > 1.0, "need C_F > 1");
    demand(z.c_f > 0.0, "need c_f > 0");
    demand(z.c_w > 0.0, "need c_w > 0");

    const double c1 = std::sqrt(z.xt2 - z.xt1) / std::min(z.xt1 - z.x1, z.x2 - z.xt2);
    const double cp =
        std::min(1.0 - z.w2, z.w1) * std::min(z.C_F - 1.0, 2.0) * z.c_w * z.c_f / 4.0;
    demand(cp > 0.0, "need min(1-w2, w1) > 0");
    return c1 / cp;
}

} // namespace mnpiv
