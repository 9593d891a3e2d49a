#pragma once

#include "mnpiv/npiv.hpp"

#include <Eigen/Dense>
#include <cstdint>

namespace mnpiv {

enum class DgpFamily { Model1, Model2, Example1Normal, Example2TwoDim };

/// Simulation design. Model1/Model2 are the full outcome designs
/// (Gaussian-copula first stage, endogenous noise); the Examples are
/// design-only draws of (X,W) with Y = 0.
struct DgpSpec {
    DgpFamily family = DgpFamily::Model1;
    double kappa = 1.0;      // Models only
    double rho = 0.3;        // first-stage strength, in (-1,1)
    double eta = 0.3;        // endogeneity, Models only, in [0,1]
    double sigma_eps = 0.1;  // Models only, > 0
    Eigen::Index n = 0;
    std::uint64_t seed = 0;
};

/// Structural regression function of the Models.
///   Model 1: kappa sin(pi x - pi/2)
///   Model 2: 10 kappa [ -(x-1/4)^2 1{x<=1/4} + (x-3/4)^2 1{x>=3/4} ]
double true_g(const DgpSpec& spec, double x);

/// Draws a seeded sample. Models: (nu, zeta, eps*) iid N(0,I) per
/// observation, xi = rho zeta + sqrt(1-rho^2) eps*, X = Phi(xi), W = Phi(zeta),
/// Y = g(X) + kappa sigma_eps (eta eps* + sqrt(1-eta^2) nu).
Sample simulate(const DgpSpec& spec);

/// Closed-form conditional CDF F(x|w) of the Example designs.
double cond_cdf_oracle(DgpFamily family, double x, double w, double rho = 0.0);

struct McConfig {
    DgpSpec spec;
    NpivConfig npiv;
    int replications = 1;
    int eval_grid = 100;  // equispaced points on [0,1], endpoints included
    std::uint64_t seed = 0;
    int threads = 1;      // 0 = auto
};

struct McEstimatorStats {
    double bias_sq = 0.0;
    double variance = 0.0;
    double mse = 0.0;
};

struct McReport {
    McEstimatorStats unconstrained;
    McEstimatorStats constrained;
    double mse_ratio = 0.0;       // constrained MSE / unconstrained MSE
    int replications_used = 0;
    int failures = 0;
    Eigen::VectorXd grid;
    Eigen::VectorXd true_values;
    Eigen::VectorXd mean_uncon, sd_uncon;  // pointwise across replications
    Eigen::VectorXd mean_con, sd_con;
    McConfig config;              // echo of the run configuration
};

/// Runs the simulation study: per replication, draw a sample with a seed
/// derived from (seed, r), fit both estimators and evaluate them on the grid;
/// report grid-averaged squared bias, variance and MSE for each. Failed
/// replications are excluded and counted; more than 5% failing is an error.
McReport mc_study(const McConfig& config);

} // namespace mnpiv
