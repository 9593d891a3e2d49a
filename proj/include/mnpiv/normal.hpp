#pragma once

namespace mnpiv {

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal CDF, accurate in both tails.
double norm_cdf(double x);

/// Standard normal quantile (inverse CDF) for p in (0,1).
///
/// Wichura's AS 241 rational approximation (PPND16 variant), accurate to
/// about 1e-15 over the full open interval. Throws std::invalid_argument
/// for p outside (0,1).
double norm_quantile(double p);

} // namespace mnpiv
