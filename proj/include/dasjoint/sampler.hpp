#ifndef DASJOINT_SAMPLER_HPP_
#define DASJOINT_SAMPLER_HPP_

#include <cstdint>
#include <vector>

#include "dasjoint/model.hpp"
#include "dasjoint/rng.hpp"
#include "dasjoint/types.hpp"

namespace dasjoint {

struct McmcConfig {
  int iterations = 10000;
  int burn_in = 5000;
  int thin = 5;
  int n_chains = 2;
  std::uint64_t seed = 0;
  LatentLink variant = LatentLink::AllShared;
  double adapt_target = 0.44;  // random-walk acceptance target
  int adapt_window = 50;       // iterations between burn-in adaptations
  // Change-point Metropolis steps applied at that stage of each cycle;
  // the step is cheap and the population-level change-point parameters
  // decorrelate roughly linearly in it.
  int kappa_steps = 3;
  PriorSpec priors;
  // Forces every omega coefficient to stay at zero (nesting checks).
  bool pin_omega_zero = false;

  int n_retained() const { return (iterations - burn_in) / thin; }
  void validate() const;
};

struct SamplerState {
  std::vector<SubjectEffects> effects;
  Hyperparams hyper;
  std::vector<double> step_kappa;    // per-subject proposal scales
  std::vector<double> step_effects;  // used on the nonconjugate path only
  // Scales of the interweaved change-point level moves.
  double step_kappa_translate = 0.5;
  double step_kappa_rescale = 0.5;
};

struct Draw {
  Hyperparams hyper;
  std::vector<SubjectEffects> effects;
};

struct AcceptanceStats {
  std::vector<double> kappa_rate;    // per subject, post burn-in
  std::vector<double> effects_rate;  // per subject; empty on conjugate path
  double mean_kappa_rate = 0.0;
  double mean_effects_rate = 0.0;
  double kappa_translate_rate = 0.0;
  double kappa_rescale_rate = 0.0;
  double kappa_refresh_rate = 0.0;
};

struct ChainOutput {
  std::vector<Draw> draws;
  std::vector<double> deviance;
  AcceptanceStats acceptance;
  std::uint64_t seed = 0;
  int chain_index = 0;
  McmcConfig config;
  std::vector<double> final_step_kappa;
  std::vector<double> final_step_effects;
};

// ---------------------------------------------------------------------------
// Individual update kernels. Each targets its exact full conditional with
// every other block held fixed; `rng` is the caller-owned stream for that
// site.

// Redraws the augmented time of every censored risk from its truncated
// conditional (Metropolis-corrected where the linear predictor depends on
// the time itself).
void impute_censored_dropout_times(SamplerState& state, const TrialData& data,
                                   const McmcConfig& cfg, RngStream& rng);

// Joint trivariate Gaussian draw of (alpha_baseline, beta1, beta2) from
// the conjugate full conditional. Invalid for TrajectoryAtDropout, where
// the coupling is nonlinear in the effects; those subjects go through
// update_effects_mh.
void update_subject_linear_effects(SamplerState& state, const TrialData& data,
                                   const McmcConfig& cfg, int subject,
                                   RngStream& rng);

// Random-walk Metropolis on the same block, for the nonconjugate variant.
bool update_effects_mh(SamplerState& state, const TrialData& data,
                       const McmcConfig& cfg, int subject, RngStream& rng);

// Adaptive random-walk Metropolis step on the change point.
bool update_changepoint(SamplerState& state, const TrialData& data,
                        const McmcConfig& cfg, int subject, RngStream& rng);

// Conjugate regression draw of each gamma block given the effects.
void update_gamma(SamplerState& state, const TrialData& data,
                  const McmcConfig& cfg, RngStream& rng);

// Interweaved refresh of the change-point level: holding each subject's
// standardized deviation fixed, one Metropolis translation of the level
// coefficients and one rescaling of the level variance, carrying the
// change points along. Breaks the slow joint random walk the centered
// parameterization leaves between sigma2_kappa and the ensemble.
struct InterweaveAccepts {
  int translate = 0;
  int rescale = 0;
  int refresh = 0;  // subjects whose independence proposal was accepted
};
InterweaveAccepts update_changepoint_level_interweave(SamplerState& state,
                                                      const TrialData& data,
                                                      const McmcConfig& cfg,
                                                      RngStream& rng);

// Conjugate inverse-gamma draws: residual plus the four effect variances,
// and the per-risk (per-group) dropout variances.
void update_longitudinal_variances(SamplerState& state, const TrialData& data,
                                   const McmcConfig& cfg, RngStream& rng);
void update_dropout_variances(SamplerState& state, const TrialData& data,
                              const McmcConfig& cfg, RngStream& rng);
void update_variances(SamplerState& state, const TrialData& data,
                      const McmcConfig& cfg, RngStream& rng);

// Joint conjugate draw of (phi_k, omega_k) for each risk, regressing the
// augmented/observed log times on [1, x, nu].
void update_dropout_regression(SamplerState& state, const TrialData& data,
                               const McmcConfig& cfg, RngStream& rng);

// ---------------------------------------------------------------------------
// Chain orchestration.

// Data-driven start values; chains beyond the first are over-dispersed.
SamplerState init_state(const McmcConfig& cfg, const TrialData& data,
                        int chain_index);

// Drives one chain sweep by sweep. Exposed so calibration harnesses can
// interleave sweeps with data regeneration.
class ChainRunner {
 public:
  ChainRunner(const McmcConfig& cfg, const TrialData& data, int chain_index);

  // One full update cycle; `iteration` is 1-based and controls burn-in
  // adaptation.
  void sweep(int iteration);

  SamplerState& state() { return state_; }
  const SamplerState& state() const { return state_; }
  const McmcConfig& config() const { return cfg_; }
  const TrialData& data() const { return data_; }
  // Swaps in regenerated observations for the same subjects.
  void set_data(TrialData data);

  AcceptanceStats acceptance(int post_burn_in_iterations) const;

 private:
  void adapt_steps();

  McmcConfig cfg_;
  TrialData data_;
  SamplerState state_;
  RngStream rng_impute_, rng_effects_, rng_kappa_, rng_gamma_, rng_var_,
      rng_dropout_reg_, rng_dropout_var_, rng_kappa_level_;
  std::vector<int> window_accept_kappa_, window_accept_effects_;
  int window_accept_translate_ = 0;
  int window_accept_rescale_ = 0;
  long total_accept_translate_ = 0;
  long total_accept_rescale_ = 0;
  long total_accept_refresh_ = 0;
  std::vector<long> total_accept_kappa_, total_accept_effects_;
  int window_count_ = 0;
  int adapt_round_ = 0;
};

// Runs one chain: fixed update order (impute, subject effects, change
// points, gamma, longitudinal variances, dropout regression, dropout
// variances), burn-in-only adaptation, thinned draws with per-draw
// deviance.
ChainOutput run_chain(const McmcConfig& cfg, const TrialData& data,
                      int chain_index);

// n_chains independent chains with deterministic per-chain substreams.
std::vector<ChainOutput> run_analysis(const McmcConfig& cfg,
                                      const TrialData& data);

}  // namespace dasjoint

#endif  // DASJOINT_SAMPLER_HPP_
