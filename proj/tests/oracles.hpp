// Independent reference implementations used as test oracles. Everything here
// deliberately avoids the library's own computation paths: dense pseudo-
// inverse linear algebra, exhaustive enumeration, lattice search and direct
// triple loops.
#pragma once

#include "mnpiv/miv_test.hpp"
#include "mnpiv/npiv.hpp"
#include "mnpiv/qp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------------
// QP oracles
// ---------------------------------------------------------------------------

inline double qp_objective(const mnpiv::Qp& qp, const Eigen::VectorXd& b) {
    return 0.5 * b.dot(qp.H * b) + qp.f.dot(b);
}

inline bool qp_feasible(const mnpiv::Qp& qp, const Eigen::VectorXd& b, double tol) {
    for (Eigen::Index r = 0; r < qp.A.rows(); ++r) {
        const double lb = qp.lower.size() ? qp.lower[r] : 0.0;
        if (qp.A.row(r).dot(b) < lb - tol) return false;
    }
    return true;
}

// Exhaustive face enumeration: for every subset S of constraints with
// |S| <= K, minimize over { b : A_S b = lb_S } via a dense KKT solve and keep
// the best feasible candidate. Exact for convex QPs with H positive definite.
inline double qp_enumeration_oracle(const mnpiv::Qp& qp, Eigen::VectorXd* argmin = nullptr) {
    const int K = static_cast<int>(qp.H.rows());
    const int m = static_cast<int>(qp.A.rows());
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_b;

    std::vector<int> subset;
    const auto solve_face = [&](const std::vector<int>& rows) {
        const int s = static_cast<int>(rows.size());
        Eigen::MatrixXd KKT = Eigen::MatrixXd::Zero(K + s, K + s);
        Eigen::VectorXd rhs(K + s);
        KKT.topLeftCorner(K, K) = qp.H;
        rhs.head(K) = -qp.f;
        for (int j = 0; j < s; ++j) {
            KKT.block(K + j, 0, 1, K) = qp.A.row(rows[j]);
            KKT.block(0, K + j, K, 1) = qp.A.row(rows[j]).transpose();
            rhs[K + j] = qp.lower.size() ? qp.lower[rows[j]] : 0.0;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(KKT);
        if (!lu.isInvertible()) return;
        const Eigen::VectorXd sol = lu.solve(rhs);
        const Eigen::VectorXd b = sol.head(K);
        if (!b.allFinite() || !qp_feasible(qp, b, 1e-9)) return;
        const double obj = qp_objective(qp, b);
        if (obj < best) {
            best = obj;
            best_b = b;
        }
    };

    // all subsets of size <= K (m is small in the tests)
    const int total = 1 << m;
    for (int mask = 0; mask < total; ++mask) {
        subset.clear();
        for (int r = 0; r < m; ++r)
            if (mask & (1 << r)) subset.push_back(r);
        if (static_cast<int>(subset.size()) > K) continue;
        solve_face(subset);
    }
    if (argmin && best_b.size()) *argmin = best_b;
    return best;
}

// Lattice brute force plus local polish: coarse feasible grid over a box,
// then a shrinking pattern search. To move along constraint faces the polish
// also tries every stencil direction projected onto the tangent space of each
// subset of near-active constraints, and snaps onto those faces by projection.
inline double qp_lattice_oracle(const mnpiv::Qp& qp, double box_halfwidth,
                                int points_per_dim = 9) {
    const int K = static_cast<int>(qp.H.rows());
    const int m = static_cast<int>(qp.A.rows());

    Eigen::VectorXd best_b = Eigen::VectorXd::Zero(K);  // feasible for lb <= 0
    double best = qp_objective(qp, best_b);
    const auto try_point = [&](const Eigen::VectorXd& cand) {
        if (!qp_feasible(qp, cand, 0.0)) return false;
        const double obj = qp_objective(qp, cand);
        if (obj < best - 1e-16 * (1.0 + std::fabs(best))) {
            best = obj;
            best_b = cand;
            return true;
        }
        return false;
    };

    // coarse scan
    std::vector<int> idx(K, 0);
    while (true) {
        Eigen::VectorXd b(K);
        for (int d = 0; d < K; ++d)
            b[d] = -box_halfwidth + 2.0 * box_halfwidth * idx[d] / (points_per_dim - 1);
        try_point(b);
        int d = 0;
        while (d < K && ++idx[d] == points_per_dim) idx[d++] = 0;
        if (d == K) break;
    }

    // stencil directions: all {-1,0,1}^K offsets plus the steepest descent
    std::vector<Eigen::VectorXd> stencil;
    std::vector<int> off(K, 0);
    while (true) {
        Eigen::VectorXd d(K);
        bool nonzero = false;
        for (int c = 0; c < K; ++c) {
            d[c] = off[c] - 1;
            nonzero |= off[c] != 1;
        }
        if (nonzero) stencil.push_back(d.normalized());
        int c = 0;
        while (c < K && ++off[c] == 3) off[c++] = 0;
        if (c == K) break;
    }

    double step = 2.0 * box_halfwidth / (points_per_dim - 1);
    while (step > 1e-11) {
        bool improved = false;

        // snap-to-face candidates: least-squares projection onto every small
        // subset of near-active constraint hyperplanes
        std::vector<int> active;
        for (int r = 0; r < m; ++r) {
            const double lb = qp.lower.size() ? qp.lower[r] : 0.0;
            const double gap = std::fabs(qp.A.row(r).dot(best_b) - lb);
            if (gap <= 10.0 * step * (1.0 + qp.A.row(r).norm())) active.push_back(r);
        }
        std::vector<std::vector<int>> subsets{{}};
        for (int r : active) {
            const std::size_t sz = subsets.size();
            for (std::size_t s = 0; s < sz; ++s) {
                if (static_cast<int>(subsets[s].size()) >= K) continue;
                auto ext = subsets[s];
                ext.push_back(r);
                subsets.push_back(std::move(ext));
            }
        }
        for (const auto& S : subsets) {
            if (S.empty()) continue;
            const int s = static_cast<int>(S.size());
            Eigen::MatrixXd As(s, K);
            Eigen::VectorXd res(s);
            for (int j = 0; j < s; ++j) {
                As.row(j) = qp.A.row(S[j]);
                res[j] = qp.A.row(S[j]).dot(best_b) -
                         (qp.lower.size() ? qp.lower[S[j]] : 0.0);
            }
            const Eigen::VectorXd corr =
                As.completeOrthogonalDecomposition().solve(res);
            improved |= try_point(best_b - corr);
        }

        // moves: raw stencil plus its projections onto active tangent spaces
        std::vector<Eigen::VectorXd> gradient_aug = stencil;
        const Eigen::VectorXd g = qp.H * best_b + qp.f;
        if (g.norm() > 0.0) gradient_aug.push_back(-g.normalized());
        for (const auto& d0 : gradient_aug) {
            improved |= try_point(best_b + step * d0);
            for (const auto& S : subsets) {
                if (S.empty()) continue;
                Eigen::MatrixXd As(static_cast<int>(S.size()), K);
                for (std::size_t j = 0; j < S.size(); ++j)
                    As.row(static_cast<Eigen::Index>(j)) = qp.A.row(S[j]);
                // project d0 onto null(As)
                const Eigen::VectorXd d =
                    d0 - As.completeOrthogonalDecomposition().pseudoInverse() *
                             (As * d0);
                if (d.norm() > 1e-12)
                    improved |= try_point(best_b + step * d.normalized());
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

// ---------------------------------------------------------------------------
// NPIV closed-form oracle: explicit projection matrix and pseudo-inverse path
// ---------------------------------------------------------------------------

inline Eigen::VectorXd npiv_2sls_oracle(const mnpiv::Sample& sample,
                                        const mnpiv::NpivConfig& config) {
    const Eigen::MatrixXd P = design_matrix(config.basis_x, sample.x);
    const Eigen::MatrixXd Q = design_matrix(config.basis_w, sample.w);
    const Eigen::MatrixXd QtQ = Q.transpose() * Q;
    const Eigen::MatrixXd Pi =
        Q * QtQ.completeOrthogonalDecomposition().pseudoInverse() * Q.transpose();
    const Eigen::MatrixXd G = P.transpose() * Pi * P;
    const Eigen::VectorXd r = P.transpose() * Pi * sample.y;
    return Eigen::FullPivLU<Eigen::MatrixXd>(G).solve(r);
}

// ---------------------------------------------------------------------------
// Dominance-test oracles: direct triple loops over the defining formulas
// ---------------------------------------------------------------------------

inline double epan_kh(double h, double u) {
    const double t = u / h;
    return (std::fabs(t) < 1.0) ? 0.75 * (1.0 - t * t) / h : 0.0;
}

inline std::vector<double> weights_oracle(const mnpiv::Sample& s, double w, double h) {
    const Eigen::Index n = s.n();
    std::vector<double> k(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double sgn =
                s.w[i] > s.w[j] ? 1.0 : (s.w[i] < s.w[j] ? -1.0 : 0.0);
            // K_{ij,h}(w) - K_{ji,h}(w) = 2 sign(Wi-Wj) Kh(Wi-w) Kh(Wj-w)
            acc += 2.0 * sgn * epan_kh(h, s.w[i] - w) * epan_kh(h, s.w[j] - w);
        }
        k[static_cast<std::size_t>(i)] = acc;
    }
    return k;
}

inline std::vector<double> xgrid_oracle(Eigen::Index n, double eps) {
    std::vector<double> xs;
    for (Eigen::Index l = 0; l <= n; ++l)
        xs.push_back(eps + static_cast<double>(l) * (1.0 - 2.0 * eps) /
                               static_cast<double>(n));
    return xs;
}

inline double statistic_oracle(const mnpiv::Sample& s,
                               const std::vector<double>& bandwidths, double eps) {
    const Eigen::Index n = s.n();
    const auto xs = xgrid_oracle(n, eps);
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (double h : bandwidths) {
        for (Eigen::Index wi = 0; wi < n; ++wi) {
            const auto k = weights_oracle(s, s.w[wi], h);
            double dsq = 0.0;
            for (double v : k) dsq += v * v;
            if (!(dsq > 0.0)) continue;
            for (double x : xs) {
                double num = 0.0;
                for (Eigen::Index i = 0; i < n; ++i)
                    if (s.x[i] <= x) num += k[static_cast<std::size_t>(i)];
                const double val = num / std::sqrt(dsq);
                if (!any || val > best) {
                    best = val;
                    any = true;
                }
            }
        }
    }
    return best;
}

inline double bootstrap_draw_oracle(const mnpiv::Sample& s,
                                    const std::vector<double>& bandwidths,
                                    double eps, double cdf_bw,
                                    const Eigen::VectorXd& e) {
    const Eigen::Index n = s.n();
    const auto xs = xgrid_oracle(n, eps);
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (double h : bandwidths) {
        for (Eigen::Index wi = 0; wi < n; ++wi) {
            const auto k = weights_oracle(s, s.w[wi], h);
            double dsq = 0.0;
            for (double v : k) dsq += v * v;
            if (!(dsq > 0.0)) continue;
            for (double x : xs) {
                double num = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double ind = s.x[i] <= x ? 1.0 : 0.0;
                    const double fh = mnpiv::estimate_cond_cdf(s, x, s.w[i], cdf_bw);
                    num += e[i] * k[static_cast<std::size_t>(i)] * (ind - fh);
                }
                const double val = num / std::sqrt(dsq);
                if (!any || val > best) {
                    best = val;
                    any = true;
                }
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Restricted-tau lattice oracle for K = 3: dense sweep over the unit sphere
// ---------------------------------------------------------------------------

struct RestrictedTauMatrices {
    Eigen::MatrixXd Gt, S, A;
};

inline double restricted_tau_sphere_oracle(const RestrictedTauMatrices& mats,
                                           double a, int steps = 200) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
        const double theta = M_PI * i / steps;
        for (int j = 0; j < 2 * steps; ++j) {
            const double phi = M_PI * j / steps;
            Eigen::Vector3d b(std::sin(theta) * std::cos(phi),
                              std::sin(theta) * std::sin(phi), std::cos(theta));
            const double ct = std::sqrt(std::max(b.dot(mats.Gt * b), 0.0));
            const double cs = std::sqrt(std::max(b.dot(mats.S * b), 0.0));
            if (!(ct > 1e-12) || !(cs > 0.0)) continue;
            const double min_slope = (mats.A * b).minCoeff() / ct;
            if (min_slope < -a) continue;
            best = std::max(best, ct / cs);
        }
    }
    return best;
}

} // namespace oracles
