#include "mnpiv/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace mnpiv {

namespace {

struct Workspace {
    const Eigen::MatrixXd& H;
    const Eigen::VectorXd& f;
    const Eigen::MatrixXd& A;
    const Eigen::VectorXd& lb;
};

double objective_of(const Workspace& w, const Eigen::VectorXd& x) {
    return 0.5 * x.dot(w.H * x) + w.f.dot(x);
}

// Step direction restricted to { p : A_W p = 0 } via the null-space method.
// Returns false when the reduced Hessian is numerically singular.
bool reduced_step(const Workspace& w, const std::vector<int>& working,
                  const Eigen::VectorXd& x, Eigen::VectorXd& p,
                  Eigen::MatrixXd& null_basis) {
    const int K = static_cast<int>(w.H.rows());
    const int nw = static_cast<int>(working.size());
    const Eigen::VectorXd g = w.H * x + w.f;

    if (nw == 0) {
        null_basis = Eigen::MatrixXd::Identity(K, K);
    } else {
        Eigen::MatrixXd At(K, nw);
        for (int j = 0; j < nw; ++j) At.col(j) = w.A.row(working[j]).transpose();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(At);
        Eigen::MatrixXd Qfull = qr.householderQ();
        null_basis = Qfull.rightCols(K - nw);
    }
    if (null_basis.cols() == 0) {
        p = Eigen::VectorXd::Zero(K);
        return true;
    }
    const Eigen::MatrixXd Hz = null_basis.transpose() * w.H * null_basis;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Hz);
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd pz = ldlt.solve(-null_basis.transpose() * g);
    if (!pz.allFinite()) return false;
    p = null_basis * pz;
    return p.allFinite();
}

// Least-squares multipliers for the working set: A_W' lambda ~= g.
Eigen::VectorXd working_multipliers(const Workspace& w,
                                    const std::vector<int>& working,
                                    const Eigen::VectorXd& x) {
    const int K = static_cast<int>(w.H.rows());
    const int nw = static_cast<int>(working.size());
    const Eigen::VectorXd g = w.H * x + w.f;
    Eigen::MatrixXd At(K, nw);
    for (int j = 0; j < nw; ++j) At.col(j) = w.A.row(working[j]).transpose();
    return At.colPivHouseholderQr().solve(g);
}

QpSolution active_set_solve(const Workspace& w, const Eigen::VectorXd& x0,
                            int max_iterations) {
    const int K = static_cast<int>(w.H.rows());
    const int m = static_cast<int>(w.A.rows());
    const double fscale = 1.0 + w.f.lpNorm<Eigen::Infinity>();

    QpSolution sol;
    Eigen::VectorXd x = x0;
    std::vector<int> working;
    std::vector<char> in_working(m, 0);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);

    bool bland = false;
    int stalled = 0;
    std::set<std::vector<int>> seen_in_bland;
    double best_obj = objective_of(w, x);

    Eigen::MatrixXd null_basis;
    Eigen::VectorXd p;
    int iter = 0;
    QpStatus status = QpStatus::MaxIter;

    while (iter < max_iterations) {
        ++iter;
        if (!reduced_step(w, working, x, p, null_basis))
            throw std::runtime_error("solve_qp: singular reduced system (H not PSD on feasible subspace?)");

        const double pnorm = p.lpNorm<Eigen::Infinity>();
        if (pnorm <= 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
            if (working.empty()) {
                status = QpStatus::Optimal;
                break;
            }
            const Eigen::VectorXd lw = working_multipliers(w, working, x);
            int drop = -1;
            double most_negative = -1e-9 * fscale;
            for (int j = 0; j < static_cast<int>(working.size()); ++j) {
                if (lw[j] < most_negative) {
                    if (bland) {
                        // lowest constraint index wins
                        if (drop < 0 || working[j] < working[drop]) drop = j;
                    } else {
                        most_negative = lw[j];
                        drop = j;
                    }
                }
            }
            if (drop < 0) {
                lambda.setZero();
                for (int j = 0; j < static_cast<int>(working.size()); ++j)
                    lambda[working[j]] = std::max(lw[j], 0.0);
                status = QpStatus::Optimal;
                break;
            }
            in_working[working[drop]] = 0;
            working.erase(working.begin() + drop);
        } else {
            if (pnorm > 1e14 * (1.0 + x.lpNorm<Eigen::Infinity>()))
                throw std::runtime_error("solve_qp: unbounded direction");
            // largest feasible step along p
            double alpha = 1.0;
            int blocking = -1;
            for (int r = 0; r < m; ++r) {
                if (in_working[r]) continue;
                const double d = w.A.row(r).dot(p);
                if (d >= -1e-14 * (1.0 + w.A.row(r).norm() * p.norm())) continue;
                const double resid = w.A.row(r).dot(x) - w.lb[r];
                const double cand = std::max(0.0, -resid / d);
                if (cand < alpha - 1e-15) {
                    alpha = cand;
                    blocking = r;
                }
            }
            x += alpha * p;
            if (blocking >= 0) {
                working.insert(std::lower_bound(working.begin(), working.end(), blocking),
                               blocking);
                in_working[blocking] = 1;
            }
            const double now = objective_of(w, x);
            if (now < best_obj - 1e-14 * (1.0 + std::fabs(best_obj))) {
                best_obj = now;
                stalled = 0;
            } else {
                ++stalled;
            }
        }

        // cycling control: stretches without objective progress switch
        // tie-breaking to Bland's rule; a repeated working set after that is
        // reported as Degenerate. The threshold must not scale with m, since
        // cone vertices with many redundant active rows stall legitimately
        // for a few iterations only.
        if (!bland && stalled > 2 * K + 10) {
            bland = true;
            seen_in_bland.clear();
        }
        if (bland) {
            if (!seen_in_bland.insert(working).second && stalled > 4 * K + 20) {
                status = QpStatus::Degenerate;
                break;
            }
        }
    }

    sol.b = x;
    sol.active_set = working;
    sol.lambda = lambda;
    sol.iterations = iter;
    sol.status = status;
    if (status != QpStatus::Optimal && !working.empty()) {
        const Eigen::VectorXd lw = working_multipliers(w, working, x);
        sol.lambda.setZero();
        for (int j = 0; j < static_cast<int>(working.size()); ++j)
            sol.lambda[working[j]] = lw[j];
    }
    return sol;
}

} // namespace

double kkt_residual(const Qp& qp, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& lambda, double ball_multiplier) {
    const int m = static_cast<int>(qp.A.rows());
    Eigen::VectorXd lb = qp.lower.size() ? qp.lower : Eigen::VectorXd::Zero(m);
    if (b.size() != qp.H.rows() || lambda.size() != m || lb.size() != m)
        throw std::invalid_argument("kkt_residual: dimension mismatch");

    Eigen::VectorXd stat = qp.H * b + qp.f + ball_multiplier * b;
    if (m > 0) stat -= qp.A.transpose() * lambda;
    double res = stat.lpNorm<Eigen::Infinity>();
    for (int r = 0; r < m; ++r) {
        const double slack = qp.A.row(r).dot(b) - lb[r];
        res = std::max(res, -slack);          // primal feasibility
        res = std::max(res, -lambda[r]);      // dual feasibility
        res = std::max(res, std::fabs(lambda[r] * slack));
    }
    return std::max(res, 0.0);
}

QpSolution solve_qp(const Qp& qp, const QpOptions& options) {
    const int K = static_cast<int>(qp.H.rows());
    if (qp.H.cols() != K || qp.f.size() != K)
        throw std::invalid_argument("solve_qp: H must be square and match f");
    const int m = static_cast<int>(qp.A.rows());
    if (m > 0 && qp.A.cols() != K)
        throw std::invalid_argument("solve_qp: A column count must match H");
    Eigen::VectorXd lb = qp.lower.size() ? qp.lower : Eigen::VectorXd::Zero(m);
    if (lb.size() != m)
        throw std::invalid_argument("solve_qp: lower bound size must match A rows");

    const double hscale = std::max(1.0, qp.H.cwiseAbs().maxCoeff());
    if ((qp.H - qp.H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * hscale)
        throw std::invalid_argument("solve_qp: H is not symmetric");

    // PSD check with ridge repair for round-off level negativity
    Eigen::MatrixXd H = 0.5 * (qp.H + qp.H.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
    if (lmin < -1e-6 * std::max(1.0, lmax))
        throw std::invalid_argument("solve_qp: H is not positive semidefinite");
    double ridge = 0.0;
    if (lmin < -1e-14 * std::max(1.0, lmax)) {
        ridge = 1e-10 * std::max(H.trace(), 1.0) / K;
        H.diagonal().array() += ridge;
    }

    Eigen::VectorXd x0 = options.start.value_or(Eigen::VectorXd::Zero(K));
    if (x0.size() != K)
        throw std::invalid_argument("solve_qp: start point has wrong dimension");
    for (int r = 0; r < m; ++r)
        if (qp.A.row(r).dot(x0) < lb[r] - 1e-9 * (1.0 + std::fabs(lb[r])))
            throw std::invalid_argument("solve_qp: start point infeasible");

    const int max_iterations =
        options.max_iterations > 0 ? options.max_iterations : 50 * std::max(K, 1);

    Workspace w{H, qp.f, qp.A, lb};
    QpSolution sol = active_set_solve(w, x0, max_iterations);
    sol.ridge = ridge;

    // Norm bound via bisection on a ridge multiplier: grow mu until
    // ||b(mu)|| <= C_b, then bisect to the boundary.
    if (qp.norm_bound && sol.b.norm() > *qp.norm_bound + 1e-12) {
        const double cb = *qp.norm_bound;
        if (!(cb > 0.0))
            throw std::invalid_argument("solve_qp: norm bound must be positive");
        double mu_lo = 0.0, mu_hi = std::max(1.0, H.trace() / K);
        auto solve_mu = [&](double mu) {
            Eigen::MatrixXd Hm = H;
            Hm.diagonal().array() += mu;
            Workspace wm{Hm, qp.f, qp.A, lb};
            return active_set_solve(wm, x0, max_iterations);
        };
        QpSolution hi_sol = solve_mu(mu_hi);
        int guard = 0;
        while (hi_sol.b.norm() > cb && guard++ < 200) {
            mu_hi *= 4.0;
            hi_sol = solve_mu(mu_hi);
        }
        QpSolution best = hi_sol;
        double best_mu = mu_hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (mu_lo + mu_hi);
            QpSolution cand = solve_mu(mid);
            if (cand.b.norm() <= cb) {
                mu_hi = mid;
                best = cand;
                best_mu = mid;
            } else {
                mu_lo = mid;
            }
            if (mu_hi - mu_lo <= 1e-15 * (1.0 + mu_hi)) break;
        }
        sol = best;
        sol.ridge = ridge;
        sol.ball_multiplier = best_mu;
    }

    sol.objective = 0.5 * sol.b.dot(qp.H * sol.b) + qp.f.dot(sol.b);
    sol.kkt_residual = kkt_residual(qp, sol.b, sol.lambda, sol.ball_multiplier);
    return sol;
}

} // namespace mnpiv
