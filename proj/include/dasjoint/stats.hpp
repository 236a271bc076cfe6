#ifndef DASJOINT_STATS_HPP_
#define DASJOINT_STATS_HPP_

#include "dasjoint/rng.hpp"

namespace dasjoint {

// Standard normal CDF.
double normal_cdf(double z);

// log of the standard normal upper tail P(Z > z), accurate far into the
// tail where erfc underflows.
double log_normal_sf(double z);

// Inverse standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

double normal_logpdf(double x, double mean, double var);

// log density of a lognormal evaluated at t > 0, parameterized by the
// mean/variance of log(t).
double lognormal_logpdf(double t, double mean_log, double var_log);

// log density of InverseGamma(shape, rate) at x > 0.
double inverse_gamma_logpdf(double x, double shape, double rate);

// Exact draw from N(mean, sd^2) conditioned on the result exceeding
// `lower`. lower may be -inf. Total for all finite inputs: uses the
// inverse CDF where the tail probability is representable and a shifted
// exponential rejection step beyond that, so extreme truncation cannot
// spin.
double sample_truncated_normal(double mean, double sd, double lower,
                               RngStream& rng);

// log density at x of N(mean, sd^2) truncated below at `lower`
// (normalized). -inf if x <= lower.
double truncated_normal_logpdf(double x, double mean, double sd, double lower);

}  // namespace dasjoint

#endif  // DASJOINT_STATS_HPP_
