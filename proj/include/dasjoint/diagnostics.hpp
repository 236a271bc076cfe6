#ifndef DASJOINT_DIAGNOSTICS_HPP_
#define DASJOINT_DIAGNOSTICS_HPP_

#include <string>
#include <vector>

#include "dasjoint/sampler.hpp"
#include "dasjoint/types.hpp"

namespace dasjoint {

// -2 x observed-data log likelihood given the subject effects: normal
// terms for the visits, lognormal densities for observed dropouts,
// survival terms for censored risks. Prior terms and augmented times stay
// out.
double deviance(const std::vector<SubjectEffects>& effects,
                const Hyperparams& hyper, const TrialData& data,
                LatentLink link);

struct DicResult {
  double dbar = 0.0;       // mean per-draw deviance
  double d_at_mean = 0.0;  // deviance at the posterior-mean parameters
  double p_d = 0.0;        // dbar - d_at_mean
  double dic = 0.0;        // 2*dbar - d_at_mean
};

DicResult dic_from_components(double dbar, double d_at_mean);

// Conditional DIC: the posterior mean is taken component-wise over every
// parameter including the subject effects.
DicResult dic(const std::vector<ChainOutput>& chains, const TrialData& data,
              LatentLink link);

// Split-chain potential scale reduction. Returns NaN when halves are
// shorter than 4 draws or the within variance vanishes.
double rhat(const std::vector<std::vector<double>>& chain_series);

struct EssResult {
  double ess = 0.0;                // NaN for degenerate series
  std::vector<double> acf;         // lags 1..L
};

// Autocorrelation by the standard biased estimator (chains averaged) and
// effective sample size by initial-positive-sequence truncation.
EssResult ess_and_acf(const std::vector<std::vector<double>>& chain_series,
                      int max_lag = 200);

// Flat view of the hyperparameter block, fixed ordering shared by the
// summaries, stored draws, and the DIC plug-in state.
std::vector<std::string> hyper_parameter_names(const Hyperparams& h,
                                               LatentLink link);
std::vector<double> flatten_hyper(const Hyperparams& h, LatentLink link);
void unflatten_hyper(const std::vector<double>& values, LatentLink link,
                     Hyperparams& h);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
  double rhat = 0.0;
  double ess = 0.0;
  double mh_acceptance = 0.0;  // NaN where not applicable
};

struct PosteriorSummary {
  std::vector<SummaryRow> rows;
  const SummaryRow& find(const std::string& name) const;
};

// Mean/sd/quantiles/R-hat/ESS for one scalar series split by chain.
SummaryRow summarize_scalar_series(const std::string& name,
                                   const std::vector<std::vector<double>>& chains,
                                   double mh_acceptance);

// Hyperparameters plus deviance; subject effects on request.
PosteriorSummary summarize(const std::vector<ChainOutput>& chains,
                           bool include_subject_effects = false);

// Type-7 interpolated quantile of an unsorted sample.
double quantile(std::vector<double> values, double p);

struct CurvePoint {
  double week = 0.0;
  double mean = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%
};

// Population trajectory for one arm on the raw score scale: each draw's
// treatment-level mean curve is exponentiated (the median response), then
// summarized pointwise.
std::vector<CurvePoint> population_curves(
    const std::vector<ChainOutput>& chains, const TrialData& data,
    int treatment, const std::vector<double>& grid_weeks);

}  // namespace dasjoint

#endif  // DASJOINT_DIAGNOSTICS_HPP_
