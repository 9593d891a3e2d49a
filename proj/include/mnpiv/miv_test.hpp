#pragma once

#include "mnpiv/basis.hpp"
#include "mnpiv/npiv.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace mnpiv {

/// Configuration of the adaptive stochastic-dominance (monotone IV) test.
struct MivTestConfig {
    Kernel kernel{};
    double u = 0.5;              // geometric bandwidth ratio, in (0,1)
    double h_min = 0.0;          // <=0: max(0.05, (log n / n)^(1/3)), capped at 0.5
    double epsilon = 0.05;       // interior trimming of the x grid
    int n_boot = 1000;           // bootstrap replications B
    double alpha = 0.05;
    double cdf_bandwidth = 0.3;  // Nadaraya-Watson bandwidth for F(x|w)
    std::uint64_t seed = 0;
    int threads = 1;             // bootstrap parallelism (0 = auto)
};

struct TestArgmax {
    double x = 0.0, w = 0.0, h = 0.0;
};

struct MivTestResult {
    double statistic = 0.0;
    double critical_value = 0.0;
    double p_value = 1.0;
    std::vector<double> bandwidths;
    TestArgmax argmax;
    bool reject = false;
};

/// Bandwidth lattice {u^l/2 : l = 0,1,2,...} truncated at h_min.
std::vector<double> bandwidth_lattice(Eigen::Index n, const MivTestConfig& config);

/// Nadaraya-Watson estimate of F(x|w) with indicator responses, clipped to
/// [0,1]; falls back to the unconditional empirical CDF when no observation
/// lies in the kernel window.
double estimate_cond_cdf(const Sample& sample, double x, double w, double bandwidth);

/// Weights k_{i,h}(w) = sum_j (K_{ij,h}(w) - K_{ji,h}(w)) with
/// K_{ij,h}(w) = sign(W_i - W_j) K_h(W_i - w) K_h(W_j - w); sign(0) = 0.
Eigen::VectorXd dominance_weights(const Sample& sample, double w, double h);

/// Max over the (x, w, h) lattice of the self-normalized dominance statistic.
/// Triples with a zero weight norm are skipped; ties resolve to the first
/// triple in (h, w, x) scan order.
std::pair<double, TestArgmax> test_statistic(const Sample& sample,
                                             const MivTestConfig& config);

struct BootstrapResult {
    double critical_value = 0.0;
    Eigen::VectorXd draws;  // size B
};

/// Multiplier-bootstrap critical value: the ceil((1-alpha)B)-th order
/// statistic of the bootstrap maxima. Multipliers for replication b come from
/// the (seed, b) stream, so results are independent of thread count.
BootstrapResult bootstrap_critical_value(const Sample& sample,
                                         const MivTestConfig& config);

/// Same with caller-supplied multipliers (rows are replications).
BootstrapResult bootstrap_critical_value(const Sample& sample,
                                         const MivTestConfig& config,
                                         const Eigen::MatrixXd& multipliers);

/// Full test: statistic, bootstrap critical value, add-one p-value, decision.
MivTestResult monotone_iv_test(const Sample& sample, const MivTestConfig& config);

/// OLS slope of Y on W with an HC1 heteroskedasticity-robust t statistic.
/// sign is 0 unless the flat null is rejected at level alpha.
struct SlopeSignResult {
    double slope = 0.0;
    double std_error = 0.0;
    double t_stat = 0.0;
    int sign = 0;
    bool reject_flat = false;
};

SlopeSignResult slope_sign_test(const Sample& sample, double alpha);

} // namespace mnpiv
