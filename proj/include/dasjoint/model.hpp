#ifndef DASJOINT_MODEL_HPP_
#define DASJOINT_MODEL_HPP_

#include <optional>
#include <vector>

#include "dasjoint/types.hpp"

namespace dasjoint {

// Log-scale trajectory mean: two straight lines meeting at the change
// point, parameterized by the week-0 value. Total over all finite t.
double eval_trajectory(const SubjectEffects& effects, double t);

// DAS28 composite from its four components. Throws std::domain_error
// outside the valid ranges (counts in 0..28, esr > 0, gh in 0..100).
double das28_score(double tender28, double swollen28, double esr,
                   double gh_vas);

// Sum of normal log-densities of the log scores around the trajectory;
// zero for a subject with no visits.
double loglik_longitudinal(const SubjectRecord& subject,
                           const SubjectEffects& effects, double sigma2_resid);

// The latent vector linking the trajectory to dropout. dropout_time is
// required only for TrajectoryAtDropout.
Eigen::VectorXd latent_link(LatentLink link, const SubjectEffects& effects,
                            std::optional<double> dropout_time = std::nullopt);

enum class DropoutMode {
  // Censored risks contribute the log-density of their imputed log time
  // under the (bound-restricted) event-time model; requires imputed times.
  Augmented,
  // Censored risks contribute the lognormal survival term at the
  // censoring time.
  Marginal,
};

// The latent vector entering risk k's predictor; for the trajectory link
// this evaluates at the risk's event time when observed, else at the
// current imputed time.
Eigen::VectorXd latent_for_risk(const SubjectRecord& subject,
                                const SubjectEffects& effects, LatentLink link,
                                Risk k);

// Linear predictor of log event time for one risk.
double dropout_linpred(const SubjectRecord& subject,
                       const SubjectEffects& effects, const Hyperparams& hyper,
                       LatentLink link, Risk k);

// Both risks' contributions for one subject: lognormal log-density at
// observed events plus the censored-risk term selected by `mode`.
double loglik_dropout(const SubjectRecord& subject,
                      const SubjectEffects& effects, const Hyperparams& hyper,
                      LatentLink link, DropoutMode mode);

// Subject-level normal priors around their treatment-dependent means plus
// the normal and inverse-gamma hyper-priors.
double log_prior(const std::vector<SubjectEffects>& effects,
                 const Hyperparams& hyper, const TrialData& data,
                 LatentLink link, const PriorSpec& priors);

// loglik_longitudinal + loglik_dropout(Augmented) over all subjects,
// plus log_prior. The quantity all Metropolis ratios target.
double joint_log_posterior(const std::vector<SubjectEffects>& effects,
                           const Hyperparams& hyper, const TrialData& data,
                           LatentLink link, const PriorSpec& priors);

}  // namespace dasjoint

#endif  // DASJOINT_MODEL_HPP_
