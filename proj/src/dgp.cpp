#include "mnpiv/dgp.hpp"

#include "mnpiv/normal.hpp"
#include "mnpiv/parallel.hpp"
#include "mnpiv/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mnpiv {

namespace {

void validate_spec(const DgpSpec& spec) {
    if (spec.n < 2) throw std::invalid_argument("dgp: need n >= 2");
    if (!(spec.rho > -1.0 && spec.rho < 1.0))
        throw std::invalid_argument("dgp: rho must lie in (-1,1)");
    if (spec.family == DgpFamily::Model1 || spec.family == DgpFamily::Model2) {
        if (!(spec.eta >= 0.0 && spec.eta <= 1.0))
            throw std::invalid_argument("dgp: eta must lie in [0,1]");
        if (!(spec.sigma_eps > 0.0))
            throw std::invalid_argument("dgp: sigma_eps must be positive");
    }
}

} // namespace

double true_g(const DgpSpec& spec, double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("true_g: x outside [0,1]");
    switch (spec.family) {
        case DgpFamily::Model1:
            return spec.kappa * std::sin(M_PI * x - M_PI / 2.0);
        case DgpFamily::Model2: {
            double v = 0.0;
            if (x <= 0.25) v -= (x - 0.25) * (x - 0.25);
            if (x >= 0.75) v += (x - 0.75) * (x - 0.75);
            return 10.0 * spec.kappa * v;
        }
        default:
            throw std::invalid_argument("true_g: design has no structural regression function");
    }
}

Sample simulate(const DgpSpec& spec) {
    validate_spec(spec);
    const Eigen::Index n = spec.n;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n), x(n), w(n);
    Rng rng(spec.seed, 0);

    switch (spec.family) {
        case DgpFamily::Model1:
        case DgpFamily::Model2: {
            const double rc = std::sqrt(1.0 - spec.rho * spec.rho);
            const double ec = std::sqrt(1.0 - spec.eta * spec.eta);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double nu = rng.normal();
                const double zeta = rng.normal();
                const double eps = rng.normal();
                const double xi = spec.rho * zeta + rc * eps;
                x[i] = norm_cdf(xi);
                w[i] = norm_cdf(zeta);
                y[i] = true_g(spec, x[i]) +
                       spec.kappa * spec.sigma_eps * (spec.eta * eps + ec * nu);
            }
            break;
        }
        case DgpFamily::Example1Normal: {
            const double rc = std::sqrt(1.0 - spec.rho * spec.rho);
            for (Eigen::Index i = 0; i < n; ++i) {
                w[i] = rng.uniform01();
                const double u = rng.normal();
                x[i] = norm_cdf(spec.rho * norm_quantile(w[i]) + rc * u);
            }
            break;
        }
        case DgpFamily::Example2TwoDim: {
            for (Eigen::Index i = 0; i < n; ++i) {
                w[i] = rng.uniform01();
                const double u1 = 0.5 * rng.uniform01();
                const double u2 = 0.5 * rng.uniform01();
                x[i] = u1 + u2 * w[i];
            }
            break;
        }
    }
    return make_sample(std::move(y), std::move(x), std::move(w));
}

double cond_cdf_oracle(DgpFamily family, double x, double w, double rho) {
    if (!(x > 0.0 && x < 1.0 && w > 0.0 && w < 1.0))
        throw std::invalid_argument("cond_cdf_oracle: x and w must lie in (0,1)");
    switch (family) {
        case DgpFamily::Example1Normal: {
            if (!(rho > -1.0 && rho < 1.0))
                throw std::invalid_argument("cond_cdf_oracle: rho must lie in (-1,1)");
            return norm_cdf((norm_quantile(x) - rho * norm_quantile(w)) /
                            std::sqrt(1.0 - rho * rho));
        }
        case DgpFamily::Example2TwoDim: {
            if (x < 0.5 * w) return 2.0 * x * x / w;
            if (x < 0.5) return 2.0 * x - 0.5 * w;
            if (x < 0.5 * (1.0 + w)) {
                const double d = x - 0.5 * (1.0 + w);
                return 1.0 - 2.0 / w * d * d;
            }
            return 1.0;
        }
        default:
            throw std::invalid_argument("cond_cdf_oracle: only the Example designs have a closed form");
    }
}

McReport mc_study(const McConfig& config) {
    if (config.replications < 1)
        throw std::invalid_argument("mc_study: need replications >= 1");
    if (config.eval_grid < 2)
        throw std::invalid_argument("mc_study: need at least 2 grid points");
    validate_spec(config.spec);
    if (config.npiv.basis_w.dim < config.npiv.basis_x.dim)
        throw std::invalid_argument(
            "mc_study: instrument basis dimension must be >= regressor basis dimension");
    if (config.spec.n <= config.npiv.basis_w.dim)
        throw std::invalid_argument("mc_study: need n > dim(basis_w)");

    const int R = config.replications;
    const int G = config.eval_grid;
    Eigen::VectorXd grid(G);
    for (int g = 0; g < G; ++g)
        grid[g] = static_cast<double>(g) / (G - 1);

    // per-replication fits evaluated on the grid; slot indexing keeps the
    // reduction independent of scheduling
    std::vector<Eigen::VectorXd> eval_u(R), eval_c(R);
    std::vector<char> ok(R, 0);

    parallel_for_index(static_cast<std::size_t>(R), config.threads, [&](std::size_t r) {
        DgpSpec spec = config.spec;
        spec.seed = mix_seed(config.seed, static_cast<std::uint64_t>(r));
        try {
            const Sample sample = simulate(spec);
            const NpivFit fu = fit_unconstrained(sample, config.npiv);
            const NpivFit fc = fit_constrained(sample, config.npiv);
            if (fu.qp_diag.status != QpStatus::Optimal ||
                fc.qp_diag.status != QpStatus::Optimal)
                return;  // counted as a failure
            eval_u[r] = predict(fu, grid);
            eval_c[r] = predict(fc, grid);
            ok[r] = 1;
        } catch (const std::exception&) {
            // solver failure on this draw; recorded below
        }
    });

    int used = 0;
    for (int r = 0; r < R; ++r) used += ok[r];
    const int failures = R - used;
    if (failures * 20 > R)
        throw std::runtime_error("mc_study: more than 5% of replications failed");
    if (used == 0) throw std::runtime_error("mc_study: all replications failed");

    McReport rep;
    rep.config = config;
    rep.grid = grid;
    rep.replications_used = used;
    rep.failures = failures;
    rep.true_values.resize(G);
    for (int g = 0; g < G; ++g) rep.true_values[g] = true_g(config.spec, grid[g]);

    Eigen::VectorXd m1u = Eigen::VectorXd::Zero(G), m2u = Eigen::VectorXd::Zero(G);
    Eigen::VectorXd m1c = Eigen::VectorXd::Zero(G), m2c = Eigen::VectorXd::Zero(G);
    for (int r = 0; r < R; ++r) {
        if (!ok[r]) continue;
        m1u += eval_u[r];
        m2u += eval_u[r].cwiseProduct(eval_u[r]);
        m1c += eval_c[r];
        m2c += eval_c[r].cwiseProduct(eval_c[r]);
    }
    m1u /= used;
    m2u /= used;
    m1c /= used;
    m2c /= used;

    auto finish = [&](const Eigen::VectorXd& m1, const Eigen::VectorXd& m2,
                      Eigen::VectorXd& mean_out, Eigen::VectorXd& sd_out) {
        McEstimatorStats st;
        mean_out = m1;
        sd_out.resize(G);
        for (int g = 0; g < G; ++g) {
            const double gx = rep.true_values[g];
            const double var = std::max(m2[g] - m1[g] * m1[g], 0.0);
            const double bias2 = (m1[g] - gx) * (m1[g] - gx);
            const double mse = m2[g] - 2.0 * gx * m1[g] + gx * gx;
            st.bias_sq += bias2;
            st.variance += var;
            st.mse += mse;
            sd_out[g] = std::sqrt(var);
        }
        st.bias_sq /= G;
        st.variance /= G;
        st.mse /= G;
        return st;
    };
    rep.unconstrained = finish(m1u, m2u, rep.mean_uncon, rep.sd_uncon);
    rep.constrained = finish(m1c, m2c, rep.mean_con, rep.sd_con);
    rep.mse_ratio = rep.constrained.mse / rep.unconstrained.mse;
    return rep;
}

} // namespace mnpiv
