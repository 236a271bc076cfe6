#include "dasjoint/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dasjoint/stats.hpp"

namespace dasjoint {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double eval_trajectory(const SubjectEffects& e, double t) {
  const double d = t - e.kappa;
  return e.alpha_baseline + e.beta1 * e.kappa + e.beta1 * std::min(d, 0.0) +
         e.beta2 * std::max(d, 0.0);
}

double das28_score(double tender28, double swollen28, double esr,
                   double gh_vas) {
  if (!(tender28 >= 0.0 && tender28 <= 28.0))
    throw std::domain_error("das28_score: tender28 outside 0..28");
  if (!(swollen28 >= 0.0 && swollen28 <= 28.0))
    throw std::domain_error("das28_score: swollen28 outside 0..28");
  if (!(esr > 0.0)) throw std::domain_error("das28_score: esr must be > 0");
  if (!(gh_vas >= 0.0 && gh_vas <= 100.0))
    throw std::domain_error("das28_score: gh_vas outside 0..100");
  return 0.56 * std::sqrt(tender28) + 0.28 * std::sqrt(swollen28) +
         0.70 * std::log(esr) + 0.014 * gh_vas;
}

double loglik_longitudinal(const SubjectRecord& subject,
                           const SubjectEffects& effects,
                           double sigma2_resid) {
  if (!(sigma2_resid > 0.0))
    throw std::invalid_argument("loglik_longitudinal: sigma2_resid <= 0");
  double ll = 0.0;
  for (int j = 0; j < subject.n_visits(); ++j) {
    ll += normal_logpdf(subject.log_score[j],
                        eval_trajectory(effects, subject.visit_weeks[j]),
                        sigma2_resid);
  }
  return ll;
}

Eigen::VectorXd latent_link(LatentLink link, const SubjectEffects& effects,
                            std::optional<double> dropout_time) {
  Eigen::VectorXd nu(latent_dim(link));
  switch (link) {
    case LatentLink::Separate:
      break;
    case LatentLink::TrajectoryAtDropout:
      if (!dropout_time) {
        throw std::invalid_argument(
            "latent_link: dropout time required for trajectory link");
      }
      nu[0] = eval_trajectory(effects, *dropout_time);
      break;
    case LatentLink::Baseline:
      nu[0] = effects.alpha_baseline;
      break;
    case LatentLink::PreSlope:
      nu[0] = effects.beta1;
      break;
    case LatentLink::PostSlope:
      nu[0] = effects.beta2;
      break;
    case LatentLink::AllShared:
      nu[0] = effects.alpha_baseline;
      nu[1] = effects.beta1;
      nu[2] = effects.beta2;
      break;
  }
  return nu;
}

Eigen::VectorXd latent_for_risk(const SubjectRecord& subject,
                                const SubjectEffects& effects, LatentLink link,
                                Risk k) {
  const int ki = static_cast<int>(k);
  std::optional<double> t;
  if (link == LatentLink::TrajectoryAtDropout) {
    // The trajectory link evaluates at the risk's own time: the event
    // time when observed, the current imputed time otherwise.
    t = subject.dropout[ki].observed ? subject.dropout[ki].time_weeks
                                     : effects.imputed_dropout[ki];
  }
  return latent_link(link, effects, t);
}

double dropout_linpred(const SubjectRecord& subject,
                       const SubjectEffects& effects, const Hyperparams& hyper,
                       LatentLink link, Risk k) {
  const int ki = static_cast<int>(k);
  double theta = Hyperparams::level_mean(hyper.phi[ki], subject.dummies);
  if (link != LatentLink::Separate) {
    theta += hyper.omega[ki].dot(latent_for_risk(subject, effects, link, k));
  }
  return theta;
}

double loglik_dropout(const SubjectRecord& subject,
                      const SubjectEffects& effects, const Hyperparams& hyper,
                      LatentLink link, DropoutMode mode) {
  double ll = 0.0;
  const int group = subject.group();
  for (int ki = 0; ki < kNumRisks; ++ki) {
    const Risk k = static_cast<Risk>(ki);
    const double vs2 = hyper.varsigma2_for(k, group);
    if (!(vs2 > 0.0))
      throw std::invalid_argument("loglik_dropout: varsigma2 <= 0");
    const double theta = dropout_linpred(subject, effects, hyper, link, k);
    const DropoutObs& obs = subject.dropout[ki];
    if (obs.observed) {
      ll += lognormal_logpdf(obs.time_weeks, theta, vs2);
    } else if (mode == DropoutMode::Marginal) {
      ll += log_normal_sf((std::log(obs.time_weeks) - theta) / std::sqrt(vs2));
    } else {
      const double t_imp = effects.imputed_dropout[ki];
      if (!std::isfinite(t_imp) || !(t_imp > 0.0)) {
        throw std::invalid_argument(
            "loglik_dropout: censored risk has no imputed time (subject '" +
            subject.id + "')");
      }
      // Log-density of the augmented log time under the event-time model;
      // the bound indicator carries no parameters, so this is the term
      // entering every Metropolis ratio.
      if (t_imp <= obs.time_weeks) return kNegInf;
      ll += normal_logpdf(std::log(t_imp), theta, vs2);
    }
  }
  return ll;
}

namespace {

double normal_coef_prior(const Eigen::VectorXd& v, double mean, double var) {
  double lp = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j)
    lp += normal_logpdf(v[j], mean, var);
  return lp;
}

}  // namespace

double log_prior(const std::vector<SubjectEffects>& effects,
                 const Hyperparams& hyper, const TrialData& data,
                 LatentLink link, const PriorSpec& priors) {
  priors.validate();
  if (!(hyper.sigma2_resid > 0.0) || !(hyper.sigma2_alpha > 0.0) ||
      !(hyper.sigma2_beta1 > 0.0) || !(hyper.sigma2_beta2 > 0.0) ||
      !(hyper.sigma2_kappa > 0.0)) {
    throw std::invalid_argument("log_prior: non-positive variance");
  }
  double lp = 0.0;
  // Subject level, centered on the treatment-specific means.
  for (int i = 0; i < data.n_subjects(); ++i) {
    const auto& x = data.subjects[i].dummies;
    const auto& e = effects[i];
    lp += normal_logpdf(e.alpha_baseline,
                        Hyperparams::level_mean(hyper.gamma_alpha, x),
                        hyper.sigma2_alpha);
    lp += normal_logpdf(e.beta1, Hyperparams::level_mean(hyper.gamma_beta1, x),
                        hyper.sigma2_beta1);
    lp += normal_logpdf(e.beta2, Hyperparams::level_mean(hyper.gamma_beta2, x),
                        hyper.sigma2_beta2);
    lp += normal_logpdf(e.kappa, Hyperparams::level_mean(hyper.gamma_kappa, x),
                        hyper.sigma2_kappa);
  }
  // Coefficient hyper-priors.
  lp += normal_coef_prior(hyper.gamma_alpha, priors.gamma_mean,
                          priors.gamma_var);
  lp += normal_coef_prior(hyper.gamma_beta1, priors.gamma_mean,
                          priors.gamma_var);
  lp += normal_coef_prior(hyper.gamma_beta2, priors.gamma_mean,
                          priors.gamma_var);
  lp += normal_coef_prior(hyper.gamma_kappa, priors.gamma_kappa_mean,
                          priors.gamma_kappa_var);
  for (int k = 0; k < kNumRisks; ++k) {
    lp += normal_coef_prior(hyper.phi[k], priors.phi_mean, priors.phi_var);
    if (link != LatentLink::Separate) {
      lp += normal_coef_prior(hyper.omega[k], priors.omega_mean,
                              priors.omega_var);
    }
  }
  // Variance hyper-priors.
  const double a = priors.variance_shape, b = priors.variance_rate;
  lp += inverse_gamma_logpdf(hyper.sigma2_resid, a, b);
  lp += inverse_gamma_logpdf(hyper.sigma2_alpha, a, b);
  lp += inverse_gamma_logpdf(hyper.sigma2_beta1, a, b);
  lp += inverse_gamma_logpdf(hyper.sigma2_beta2, a, b);
  lp += inverse_gamma_logpdf(hyper.sigma2_kappa, a, b);
  for (int k = 0; k < kNumRisks; ++k) {
    for (Eigen::Index g = 0; g < hyper.varsigma2[k].size(); ++g) {
      if (!(hyper.varsigma2[k][g] > 0.0))
        throw std::invalid_argument("log_prior: non-positive variance");
      lp += inverse_gamma_logpdf(hyper.varsigma2[k][g], a, b);
    }
  }
  return lp;
}

double joint_log_posterior(const std::vector<SubjectEffects>& effects,
                           const Hyperparams& hyper, const TrialData& data,
                           LatentLink link, const PriorSpec& priors) {
  if (static_cast<int>(effects.size()) != data.n_subjects()) {
    throw std::invalid_argument(
        "joint_log_posterior: effects/data size mismatch");
  }
  double lp = log_prior(effects, hyper, data, link, priors);
  for (int i = 0; i < data.n_subjects(); ++i) {
    lp += loglik_longitudinal(data.subjects[i], effects[i],
                              hyper.sigma2_resid);
    lp += loglik_dropout(data.subjects[i], effects[i], hyper, link,
                         DropoutMode::Augmented);
  }
  return lp;
}

}  // namespace dasjoint
