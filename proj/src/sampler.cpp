#include "dasjoint/sampler.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "dasjoint/diagnostics.hpp"
#include "dasjoint/stats.hpp"

namespace dasjoint {

namespace {

// Per-site stream identifiers; the init site also covers start-value
// jitter and the first imputation draws.
constexpr std::uint64_t kSiteInit = 1;
constexpr std::uint64_t kSiteImpute = 2;
constexpr std::uint64_t kSiteEffects = 3;
constexpr std::uint64_t kSiteKappa = 4;
constexpr std::uint64_t kSiteGamma = 5;
constexpr std::uint64_t kSiteVar = 6;
constexpr std::uint64_t kSiteDropReg = 7;
constexpr std::uint64_t kSiteDropVar = 8;
constexpr std::uint64_t kSiteKappaLevel = 9;

// Visit count at and beyond which a subject's change point stays put
// during the non-centered rescale move.
constexpr int kCenteredVisitThreshold = 6;

constexpr double kMinLogStep = -18.0;
constexpr double kMaxLogStep = 14.0;

double log_dropout_time(const SubjectRecord& s, const SubjectEffects& e,
                        int k) {
  return std::log(s.dropout[k].observed ? s.dropout[k].time_weeks
                                        : e.imputed_dropout[k]);
}

// M^T omega, where nu = M (alpha_baseline, beta1, beta2).
Eigen::Vector3d coupling_row(LatentLink link, const Eigen::VectorXd& omega) {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  switch (link) {
    case LatentLink::Baseline:
      w[0] = omega[0];
      break;
    case LatentLink::PreSlope:
      w[1] = omega[0];
      break;
    case LatentLink::PostSlope:
      w[2] = omega[0];
      break;
    case LatentLink::AllShared:
      w[0] = omega[0];
      w[1] = omega[1];
      w[2] = omega[2];
      break;
    default:
      break;
  }
  return w;
}

// Draw from N(mean, P^{-1}) given the precision P.
template <typename MatrixType, typename VectorType>
VectorType precision_normal_draw(const MatrixType& precision,
                                 const VectorType& shift, RngStream& rng) {
  Eigen::LLT<MatrixType> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericError("conjugate update: precision matrix not SPD");
  }
  VectorType z(shift.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
  return llt.solve(shift) + llt.matrixU().solve(z);
}

// Likelihood factors that move with kappa; only the trajectory link makes
// the dropout terms depend on it.
double kappa_loglik(const SubjectRecord& s, const SubjectEffects& e,
                    const Hyperparams& h, const McmcConfig& cfg) {
  double lp = loglik_longitudinal(s, e, h.sigma2_resid);
  if (cfg.variant == LatentLink::TrajectoryAtDropout && !cfg.pin_omega_zero) {
    lp += loglik_dropout(s, e, h, cfg.variant, DropoutMode::Augmented);
  }
  return lp;
}

double kappa_log_conditional(const SubjectRecord& s, const SubjectEffects& e,
                             const Hyperparams& h, const McmcConfig& cfg) {
  return kappa_loglik(s, e, h, cfg) +
         normal_logpdf(e.kappa,
                       Hyperparams::level_mean(h.gamma_kappa, s.dummies),
                       h.sigma2_kappa);
}

double effects_log_conditional(const SubjectRecord& s, const SubjectEffects& e,
                               const Hyperparams& h, const McmcConfig& cfg) {
  double lp =
      normal_logpdf(e.alpha_baseline,
                    Hyperparams::level_mean(h.gamma_alpha, s.dummies),
                    h.sigma2_alpha) +
      normal_logpdf(e.beta1, Hyperparams::level_mean(h.gamma_beta1, s.dummies),
                    h.sigma2_beta1) +
      normal_logpdf(e.beta2, Hyperparams::level_mean(h.gamma_beta2, s.dummies),
                    h.sigma2_beta2);
  lp += loglik_longitudinal(s, e, h.sigma2_resid);
  lp += loglik_dropout(s, e, h, cfg.variant, DropoutMode::Augmented);
  return lp;
}

}  // namespace

void McmcConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations)
    throw ConfigError("burn_in must satisfy 0 <= burn_in < iterations");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (n_chains < 1) throw ConfigError("n_chains must be >= 1");
  if (!(adapt_target > 0.0 && adapt_target < 1.0))
    throw ConfigError("adapt_target must be in (0,1)");
  if (adapt_window < 1) throw ConfigError("adapt_window must be >= 1");
  if (kappa_steps < 1) throw ConfigError("kappa_steps must be >= 1");
  priors.validate();
}

void impute_censored_dropout_times(SamplerState& state, const TrialData& data,
                                   const McmcConfig& cfg, RngStream& rng) {
  const Hyperparams& h = state.hyper;
  for (int i = 0; i < data.n_subjects(); ++i) {
    const SubjectRecord& s = data.subjects[i];
    SubjectEffects& e = state.effects[i];
    const int g = s.group();
    for (int k = 0; k < kNumRisks; ++k) {
      if (s.dropout[k].observed) continue;
      const double bound = std::log(s.dropout[k].time_weeks);
      const double vs2 = h.varsigma2_for(static_cast<Risk>(k), g);
      const double sd = std::sqrt(vs2);
      if (cfg.variant != LatentLink::TrajectoryAtDropout) {
        const double theta =
            dropout_linpred(s, e, h, cfg.variant, static_cast<Risk>(k));
        e.imputed_dropout[k] =
            std::exp(sample_truncated_normal(theta, sd, bound, rng));
      } else {
        // The predictor feeds on the imputed time itself, so the
        // truncated draw is only a proposal and needs a Metropolis
        // correction.
        const double x_cur = std::log(e.imputed_dropout[k]);
        const double theta_cur =
            dropout_linpred(s, e, h, cfg.variant, static_cast<Risk>(k));
        const double x_prop =
            sample_truncated_normal(theta_cur, sd, bound, rng);
        SubjectEffects e_prop = e;
        e_prop.imputed_dropout[k] = std::exp(x_prop);
        const double theta_prop =
            dropout_linpred(s, e_prop, h, cfg.variant, static_cast<Risk>(k));
        double log_ratio = normal_logpdf(x_prop, theta_prop, vs2) -
                           normal_logpdf(x_cur, theta_cur, vs2);
        log_ratio += truncated_normal_logpdf(x_cur, theta_prop, sd, bound) -
                     truncated_normal_logpdf(x_prop, theta_cur, sd, bound);
        if (std::log(rng.uniform()) < log_ratio) {
          e.imputed_dropout[k] = e_prop.imputed_dropout[k];
        }
      }
    }
  }
}

void update_subject_linear_effects(SamplerState& state, const TrialData& data,
                                   const McmcConfig& cfg, int subject,
                                   RngStream& rng) {
  if (cfg.variant == LatentLink::TrajectoryAtDropout) {
    throw std::invalid_argument(
        "update_subject_linear_effects: trajectory link couples the effects "
        "nonlinearly; use update_effects_mh");
  }
  const SubjectRecord& s = data.subjects[subject];
  SubjectEffects& e = state.effects[subject];
  const Hyperparams& h = state.hyper;

  Eigen::Matrix3d precision = Eigen::Matrix3d::Zero();
  precision(0, 0) = 1.0 / h.sigma2_alpha;
  precision(1, 1) = 1.0 / h.sigma2_beta1;
  precision(2, 2) = 1.0 / h.sigma2_beta2;
  Eigen::Vector3d shift(
      Hyperparams::level_mean(h.gamma_alpha, s.dummies) / h.sigma2_alpha,
      Hyperparams::level_mean(h.gamma_beta1, s.dummies) / h.sigma2_beta1,
      Hyperparams::level_mean(h.gamma_beta2, s.dummies) / h.sigma2_beta2);

  const double inv_resid = 1.0 / h.sigma2_resid;
  for (int j = 0; j < s.n_visits(); ++j) {
    const double t = s.visit_weeks[j];
    const Eigen::Vector3d z(1.0, std::min(t, e.kappa),
                            std::max(t - e.kappa, 0.0));
    precision.noalias() += z * z.transpose() * inv_resid;
    shift.noalias() += z * (s.log_score[j] * inv_resid);
  }
  if (cfg.variant != LatentLink::Separate && !cfg.pin_omega_zero) {
    const int g = s.group();
    for (int k = 0; k < kNumRisks; ++k) {
      const Eigen::Vector3d w = coupling_row(cfg.variant, h.omega[k]);
      if (w.squaredNorm() == 0.0) continue;
      const double inv_v = 1.0 / h.varsigma2_for(static_cast<Risk>(k), g);
      const double resp = log_dropout_time(s, e, k) -
                          Hyperparams::level_mean(h.phi[k], s.dummies);
      precision.noalias() += w * w.transpose() * inv_v;
      shift.noalias() += w * (resp * inv_v);
    }
  }
  const Eigen::Vector3d u =
      precision_normal_draw<Eigen::Matrix3d, Eigen::Vector3d>(precision, shift,
                                                              rng);
  e.alpha_baseline = u[0];
  e.beta1 = u[1];
  e.beta2 = u[2];
}

bool update_effects_mh(SamplerState& state, const TrialData& data,
                       const McmcConfig& cfg, int subject, RngStream& rng) {
  const SubjectRecord& s = data.subjects[subject];
  SubjectEffects& e = state.effects[subject];
  const Hyperparams& h = state.hyper;
  const double step = state.step_effects[subject];
  SubjectEffects prop = e;
  // Component scales follow the current population SDs so one tuned
  // scalar serves the whole block; symmetric given the hyperparameters.
  prop.alpha_baseline += step * std::sqrt(h.sigma2_alpha) * rng.normal();
  prop.beta1 += step * std::sqrt(h.sigma2_beta1) * rng.normal();
  prop.beta2 += step * std::sqrt(h.sigma2_beta2) * rng.normal();
  const double log_ratio = effects_log_conditional(s, prop, h, cfg) -
                           effects_log_conditional(s, e, h, cfg);
  if (std::log(rng.uniform()) < log_ratio) {
    e = prop;
    return true;
  }
  return false;
}

bool update_changepoint(SamplerState& state, const TrialData& data,
                        const McmcConfig& cfg, int subject, RngStream& rng) {
  const SubjectRecord& s = data.subjects[subject];
  SubjectEffects& e = state.effects[subject];
  SubjectEffects prop = e;
  prop.kappa += state.step_kappa[subject] * rng.normal();
  const double log_ratio = kappa_log_conditional(s, prop, state.hyper, cfg) -
                           kappa_log_conditional(s, e, state.hyper, cfg);
  if (std::log(rng.uniform()) < log_ratio) {
    e = prop;
    return true;
  }
  return false;
}

namespace {

template <typename Accessor>
void draw_gamma_block(Eigen::VectorXd& gamma, const TrialData& data,
                      const std::vector<SubjectEffects>& effects,
                      Accessor&& value, double level_var, double prior_mean,
                      double prior_var, RngStream& rng) {
  const int p = data.n_dummies() + 1;
  Eigen::MatrixXd precision =
      Eigen::MatrixXd::Identity(p, p) / prior_var;
  Eigen::VectorXd shift = Eigen::VectorXd::Constant(p, prior_mean / prior_var);
  const double inv_v = 1.0 / level_var;
  Eigen::VectorXd x(p);
  for (int i = 0; i < data.n_subjects(); ++i) {
    x[0] = 1.0;
    for (int j = 0; j < data.n_dummies(); ++j)
      x[j + 1] = data.subjects[i].dummies[j];
    precision.noalias() += x * x.transpose() * inv_v;
    shift.noalias() += x * (value(effects[i]) * inv_v);
  }
  gamma = precision_normal_draw<Eigen::MatrixXd, Eigen::VectorXd>(precision,
                                                                  shift, rng);
}

}  // namespace

void update_gamma(SamplerState& state, const TrialData& data,
                  const McmcConfig& cfg, RngStream& rng) {
  Hyperparams& h = state.hyper;
  const PriorSpec& pr = cfg.priors;
  draw_gamma_block(
      h.gamma_alpha, data, state.effects,
      [](const SubjectEffects& e) { return e.alpha_baseline; }, h.sigma2_alpha,
      pr.gamma_mean, pr.gamma_var, rng);
  draw_gamma_block(
      h.gamma_beta1, data, state.effects,
      [](const SubjectEffects& e) { return e.beta1; }, h.sigma2_beta1,
      pr.gamma_mean, pr.gamma_var, rng);
  draw_gamma_block(
      h.gamma_beta2, data, state.effects,
      [](const SubjectEffects& e) { return e.beta2; }, h.sigma2_beta2,
      pr.gamma_mean, pr.gamma_var, rng);
  draw_gamma_block(
      h.gamma_kappa, data, state.effects,
      [](const SubjectEffects& e) { return e.kappa; }, h.sigma2_kappa,
      pr.gamma_kappa_mean, pr.gamma_kappa_var, rng);
}

InterweaveAccepts update_changepoint_level_interweave(SamplerState& state,
                                                      const TrialData& data,
                                                      const McmcConfig& cfg,
                                                      RngStream& rng) {
  InterweaveAccepts accepts;
  Hyperparams& h = state.hyper;
  const PriorSpec& pr = cfg.priors;
  const int n = data.n_subjects();
  const int p = data.n_dummies() + 1;
  std::vector<double> mu(n), u(n), loglik(n);
  double sd = std::sqrt(h.sigma2_kappa);
  for (int i = 0; i < n; ++i) {
    mu[i] = Hyperparams::level_mean(h.gamma_kappa, data.subjects[i].dummies);
    loglik[i] = kappa_loglik(data.subjects[i], state.effects[i], h, cfg);
    // Independence refresh from the prior conditional; the prior density
    // cancels against the proposal, leaving the likelihood ratio. Frees
    // the weakly identified change points from their random walk.
    SubjectEffects e = state.effects[i];
    e.kappa = mu[i] + sd * rng.normal();
    const double prop_loglik = kappa_loglik(data.subjects[i], e, h, cfg);
    if (std::log(rng.uniform()) < prop_loglik - loglik[i]) {
      state.effects[i].kappa = e.kappa;
      loglik[i] = prop_loglik;
      ++accepts.refresh;
    }
    u[i] = (state.effects[i].kappa - mu[i]) / sd;
  }

  // Translation: move the level coefficients, dragging the change points
  // along; the standardized deviations are invariant, so only the
  // coefficient priors and the likelihood enter the ratio.
  for (int round = 0; round < 3; ++round) {
  {
    Eigen::VectorXd prop = h.gamma_kappa;
    double log_ratio = 0.0;
    for (int j = 0; j < p; ++j) {
      const double shift = state.step_kappa_translate * rng.normal();
      log_ratio +=
          normal_logpdf(prop[j] + shift, pr.gamma_kappa_mean,
                        pr.gamma_kappa_var) -
          normal_logpdf(prop[j], pr.gamma_kappa_mean, pr.gamma_kappa_var);
      prop[j] += shift;
    }
    std::vector<double> new_loglik(n);
    for (int i = 0; i < n; ++i) {
      SubjectEffects e = state.effects[i];
      e.kappa = Hyperparams::level_mean(prop, data.subjects[i].dummies) +
                sd * u[i];
      new_loglik[i] = kappa_loglik(data.subjects[i], e, h, cfg);
      log_ratio += new_loglik[i] - loglik[i];
    }
    if (std::log(rng.uniform()) < log_ratio) {
      h.gamma_kappa = prop;
      for (int i = 0; i < n; ++i) {
        mu[i] =
            Hyperparams::level_mean(prop, data.subjects[i].dummies);
        state.effects[i].kappa = mu[i] + sd * u[i];
        loglik[i] = new_loglik[i];
      }
      ++accepts.translate;
    }
  }

  // Rescale: random walk on log sigma2_kappa along the non-centered
  // fiber. Subjects with enough visits pin their change point sharply;
  // dragging those into their likelihood wall would freeze the move, so
  // they stay put and contribute their prior ratio instead (a partially
  // non-centered parameterization, fixed by visit count).
  {
    const double cur_log = std::log(h.sigma2_kappa);
    const double prop_log = cur_log + state.step_kappa_rescale * rng.normal();
    const double prop_var = std::exp(prop_log);
    double log_ratio =
        inverse_gamma_logpdf(prop_var, pr.variance_shape, pr.variance_rate) -
        inverse_gamma_logpdf(h.sigma2_kappa, pr.variance_shape,
                             pr.variance_rate) +
        (prop_log - cur_log);  // log-scale proposal Jacobian
    const double prop_sd = std::sqrt(prop_var);
    std::vector<double> new_loglik(n);
    for (int i = 0; i < n; ++i) {
      if (data.subjects[i].n_visits() >= kCenteredVisitThreshold) {
        const double k = state.effects[i].kappa;
        log_ratio += normal_logpdf(k, mu[i], prop_var) -
                     normal_logpdf(k, mu[i], h.sigma2_kappa);
        new_loglik[i] = loglik[i];
        continue;
      }
      SubjectEffects e = state.effects[i];
      e.kappa = mu[i] + prop_sd * u[i];
      new_loglik[i] = kappa_loglik(data.subjects[i], e, h, cfg);
      log_ratio += new_loglik[i] - loglik[i];
    }
    if (std::log(rng.uniform()) < log_ratio) {
      h.sigma2_kappa = prop_var;
      sd = prop_sd;
      for (int i = 0; i < n; ++i) {
        if (data.subjects[i].n_visits() < kCenteredVisitThreshold) {
          state.effects[i].kappa = mu[i] + prop_sd * u[i];
        } else {
          u[i] = (state.effects[i].kappa - mu[i]) / sd;
        }
        loglik[i] = new_loglik[i];
      }
      ++accepts.rescale;
    }
  }
  }
  return accepts;
}

void update_longitudinal_variances(SamplerState& state, const TrialData& data,
                                   const McmcConfig& cfg, RngStream& rng) {
  Hyperparams& h = state.hyper;
  const double a = cfg.priors.variance_shape;
  const double b = cfg.priors.variance_rate;

  double ss = 0.0;
  long n = 0;
  for (int i = 0; i < data.n_subjects(); ++i) {
    const SubjectRecord& s = data.subjects[i];
    for (int j = 0; j < s.n_visits(); ++j) {
      const double r =
          s.log_score[j] - eval_trajectory(state.effects[i], s.visit_weeks[j]);
      ss += r * r;
      ++n;
    }
  }
  h.sigma2_resid = rng.inverse_gamma(a + 0.5 * n, b + 0.5 * ss);

  const int n_sub = data.n_subjects();
  auto level_update = [&](auto&& value, const Eigen::VectorXd& gamma) {
    double dev = 0.0;
    for (int i = 0; i < n_sub; ++i) {
      const double r =
          value(state.effects[i]) -
          Hyperparams::level_mean(gamma, data.subjects[i].dummies);
      dev += r * r;
    }
    return rng.inverse_gamma(a + 0.5 * n_sub, b + 0.5 * dev);
  };
  h.sigma2_alpha = level_update(
      [](const SubjectEffects& e) { return e.alpha_baseline; }, h.gamma_alpha);
  h.sigma2_beta1 = level_update(
      [](const SubjectEffects& e) { return e.beta1; }, h.gamma_beta1);
  h.sigma2_beta2 = level_update(
      [](const SubjectEffects& e) { return e.beta2; }, h.gamma_beta2);
  h.sigma2_kappa = level_update(
      [](const SubjectEffects& e) { return e.kappa; }, h.gamma_kappa);
}

void update_dropout_variances(SamplerState& state, const TrialData& data,
                              const McmcConfig& cfg, RngStream& rng) {
  Hyperparams& h = state.hyper;
  const double a = cfg.priors.variance_shape;
  const double b = cfg.priors.variance_rate;
  for (int k = 0; k < kNumRisks; ++k) {
    const int n_buckets = static_cast<int>(h.varsigma2[k].size());
    std::vector<double> ss(n_buckets, 0.0);
    std::vector<long> n(n_buckets, 0);
    for (int i = 0; i < data.n_subjects(); ++i) {
      const SubjectRecord& s = data.subjects[i];
      const int bucket = n_buckets == 1 ? 0 : s.group();
      const double theta = dropout_linpred(s, state.effects[i], h, cfg.variant,
                                           static_cast<Risk>(k));
      const double r = log_dropout_time(s, state.effects[i], k) - theta;
      ss[bucket] += r * r;
      ++n[bucket];
    }
    for (int g = 0; g < n_buckets; ++g) {
      h.varsigma2[k][g] = rng.inverse_gamma(a + 0.5 * n[g], b + 0.5 * ss[g]);
    }
  }
}

void update_variances(SamplerState& state, const TrialData& data,
                      const McmcConfig& cfg, RngStream& rng) {
  update_longitudinal_variances(state, data, cfg, rng);
  update_dropout_variances(state, data, cfg, rng);
}

void update_dropout_regression(SamplerState& state, const TrialData& data,
                               const McmcConfig& cfg, RngStream& rng) {
  Hyperparams& h = state.hyper;
  const PriorSpec& pr = cfg.priors;
  const int m1 = data.n_dummies() + 1;
  const bool with_omega =
      cfg.variant != LatentLink::Separate && !cfg.pin_omega_zero;
  const int q = with_omega ? latent_dim(cfg.variant) : 0;
  const int p = m1 + q;
  for (int k = 0; k < kNumRisks; ++k) {
    Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd shift(p);
    for (int j = 0; j < m1; ++j) {
      precision(j, j) = 1.0 / pr.phi_var;
      shift[j] = pr.phi_mean / pr.phi_var;
    }
    for (int j = m1; j < p; ++j) {
      precision(j, j) = 1.0 / pr.omega_var;
      shift[j] = pr.omega_mean / pr.omega_var;
    }
    Eigen::VectorXd row(p);
    for (int i = 0; i < data.n_subjects(); ++i) {
      const SubjectRecord& s = data.subjects[i];
      row[0] = 1.0;
      for (int j = 0; j < data.n_dummies(); ++j) row[j + 1] = s.dummies[j];
      if (with_omega) {
        row.tail(q) = latent_for_risk(s, state.effects[i], cfg.variant,
                                      static_cast<Risk>(k));
      }
      const double inv_v =
          1.0 / h.varsigma2_for(static_cast<Risk>(k), s.group());
      precision.noalias() += row * row.transpose() * inv_v;
      shift.noalias() += row * (log_dropout_time(s, state.effects[i], k) *
                                inv_v);
    }
    const Eigen::VectorXd coef =
        precision_normal_draw<Eigen::MatrixXd, Eigen::VectorXd>(precision,
                                                                shift, rng);
    h.phi[k] = coef.head(m1);
    if (with_omega) h.omega[k] = coef.tail(q);
  }
}

// ---------------------------------------------------------------------------
// Initialization.

namespace {

struct PiecewiseFit {
  double a = 0, b1 = 0, b2 = 0, kappa = 0;
  bool ok = false;
};

// Least-squares two-segment fit with the change point at the visit that
// minimizes the SSE.
PiecewiseFit fit_subject_ls(const SubjectRecord& s) {
  PiecewiseFit best;
  if (s.n_visits() < 3) return best;
  double best_sse = std::numeric_limits<double>::infinity();
  const int n = s.n_visits();
  Eigen::VectorXd y(n);
  for (int j = 0; j < n; ++j) y[j] = s.log_score[j];
  for (int c = 0; c < n; ++c) {
    const double kappa = s.visit_weeks[c];
    Eigen::MatrixXd a_mat(n, 3);
    for (int j = 0; j < n; ++j) {
      const double t = s.visit_weeks[j];
      a_mat(j, 0) = 1.0;
      a_mat(j, 1) = std::min(t, kappa);
      a_mat(j, 2) = std::max(t - kappa, 0.0);
    }
    Eigen::Matrix3d ata =
        a_mat.transpose() * a_mat + 1e-8 * Eigen::Matrix3d::Identity();
    const Eigen::Vector3d coef = ata.llt().solve(a_mat.transpose() * y);
    const double sse = (y - a_mat * coef).squaredNorm();
    if (sse < best_sse) {
      best_sse = sse;
      best = {coef[0], coef[1], coef[2], kappa, true};
    }
  }
  return best;
}

// Ridge regression of per-subject values on [1, dummies].
Eigen::VectorXd ridge_on_dummies(const TrialData& data,
                                 const std::vector<double>& values) {
  const int p = data.n_dummies() + 1;
  Eigen::MatrixXd ata = 1e-8 * Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd aty = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd x(p);
  for (int i = 0; i < data.n_subjects(); ++i) {
    x[0] = 1.0;
    for (int j = 0; j < data.n_dummies(); ++j)
      x[j + 1] = data.subjects[i].dummies[j];
    ata.noalias() += x * x.transpose();
    aty.noalias() += x * values[i];
  }
  return ata.llt().solve(aty);
}

double jitter_uniform(RngStream& rng) { return 2.0 * rng.uniform() - 1.0; }

}  // namespace

SamplerState init_state(const McmcConfig& cfg, const TrialData& data,
                        int chain_index) {
  const int n = data.n_subjects();
  SamplerState state;
  state.effects.resize(n);
  state.step_kappa.assign(n, 2.0);
  state.step_effects.assign(n, 0.3);
  state.hyper = make_hyperparams(data.n_dummies(), cfg.variant,
                                 data.n_treatments,
                                 cfg.priors.pooled_dropout_variance);
  Hyperparams& h = state.hyper;

  // Subject-level start values: piecewise least squares where possible,
  // arm means otherwise.
  std::vector<PiecewiseFit> fits(n);
  Eigen::Vector4d global_sum = Eigen::Vector4d::Zero();
  int global_count = 0;
  std::vector<Eigen::Vector4d> arm_sum(data.n_treatments,
                                       Eigen::Vector4d::Zero());
  std::vector<int> arm_count(data.n_treatments, 0);
  for (int i = 0; i < n; ++i) {
    fits[i] = fit_subject_ls(data.subjects[i]);
    if (fits[i].ok) {
      Eigen::Vector4d v(fits[i].a, fits[i].b1, fits[i].b2, fits[i].kappa);
      global_sum += v;
      ++global_count;
      arm_sum[data.subjects[i].group()] += v;
      ++arm_count[data.subjects[i].group()];
    }
  }
  const Eigen::Vector4d global_mean =
      global_count > 0
          ? Eigen::Vector4d(global_sum / global_count)
          : Eigen::Vector4d(0.0, 0.0, 0.0, cfg.priors.gamma_kappa_mean);
  for (int i = 0; i < n; ++i) {
    SubjectEffects& e = state.effects[i];
    if (fits[i].ok) {
      e.alpha_baseline = fits[i].a;
      e.beta1 = fits[i].b1;
      e.beta2 = fits[i].b2;
      e.kappa = fits[i].kappa;
      continue;
    }
    const int g = data.subjects[i].group();
    Eigen::Vector4d v =
        arm_count[g] > 0 ? Eigen::Vector4d(arm_sum[g] / arm_count[g])
                         : global_mean;
    if (data.subjects[i].n_visits() > 0) {
      // At least anchor the level at the subject's own mean score.
      double mean_score = 0.0;
      for (double ls : data.subjects[i].log_score) mean_score += ls;
      v[0] = mean_score / data.subjects[i].n_visits();
    }
    e.alpha_baseline = v[0];
    e.beta1 = v[1];
    e.beta2 = v[2];
    e.kappa = v[3];
  }

  // Population-level start values from pooled moments.
  std::vector<double> vals(n);
  auto level_init = [&](auto&& value, Eigen::VectorXd& gamma, double& var) {
    for (int i = 0; i < n; ++i) vals[i] = value(state.effects[i]);
    if (n > 0) gamma = ridge_on_dummies(data, vals);
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r =
          vals[i] - Hyperparams::level_mean(gamma, data.subjects[i].dummies);
      ss += r * r;
    }
    var = std::max(n > 1 ? ss / (n - 1) : 1.0, 1e-4);
  };
  level_init([](const SubjectEffects& e) { return e.alpha_baseline; },
             h.gamma_alpha, h.sigma2_alpha);
  level_init([](const SubjectEffects& e) { return e.beta1; }, h.gamma_beta1,
             h.sigma2_beta1);
  level_init([](const SubjectEffects& e) { return e.beta2; }, h.gamma_beta2,
             h.sigma2_beta2);
  level_init([](const SubjectEffects& e) { return e.kappa; }, h.gamma_kappa,
             h.sigma2_kappa);
  if (n == 0) h.gamma_kappa[0] = cfg.priors.gamma_kappa_mean;

  double ss_resid = 0.0;
  long n_obs = 0;
  for (int i = 0; i < n; ++i) {
    const SubjectRecord& s = data.subjects[i];
    for (int j = 0; j < s.n_visits(); ++j) {
      const double r =
          s.log_score[j] - eval_trajectory(state.effects[i], s.visit_weeks[j]);
      ss_resid += r * r;
      ++n_obs;
    }
  }
  h.sigma2_resid = std::max(n_obs > 3 ? ss_resid / n_obs : 0.05, 1e-4);

  for (int k = 0; k < kNumRisks; ++k) {
    for (int i = 0; i < n; ++i) {
      vals[i] = std::log(data.subjects[i].dropout[k].time_weeks);
    }
    if (n > 0) h.phi[k] = ridge_on_dummies(data, vals);
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r =
          vals[i] -
          Hyperparams::level_mean(h.phi[k], data.subjects[i].dummies);
      ss += r * r;
    }
    const double vs2 = std::max(n > 1 ? ss / (n - 1) : 1.0, 1e-3);
    h.varsigma2[k].setConstant(vs2);
  }

  RngStream rng(cfg.seed, {static_cast<std::uint64_t>(chain_index), kSiteInit});
  if (chain_index > 0) {
    // Over-dispersed starts: shift each coefficient by up to two
    // subject-level prior SDs, scale variances by up to 4x either way.
    auto jitter_vec = [&](Eigen::VectorXd& v, double sd) {
      for (Eigen::Index j = 0; j < v.size(); ++j)
        v[j] += 2.0 * jitter_uniform(rng) * sd;
    };
    jitter_vec(h.gamma_alpha, std::sqrt(h.sigma2_alpha));
    jitter_vec(h.gamma_beta1, std::sqrt(h.sigma2_beta1));
    jitter_vec(h.gamma_beta2, std::sqrt(h.sigma2_beta2));
    jitter_vec(h.gamma_kappa, std::sqrt(h.sigma2_kappa));
    auto jitter_var = [&](double& v) {
      v *= std::exp(jitter_uniform(rng) * std::log(4.0));
    };
    jitter_var(h.sigma2_resid);
    jitter_var(h.sigma2_alpha);
    jitter_var(h.sigma2_beta1);
    jitter_var(h.sigma2_beta2);
    jitter_var(h.sigma2_kappa);
    for (int k = 0; k < kNumRisks; ++k) {
      jitter_vec(h.phi[k], std::sqrt(h.varsigma2[k][0]));
      for (Eigen::Index g = 0; g < h.varsigma2[k].size(); ++g)
        jitter_var(h.varsigma2[k][g]);
    }
  }

  // Start the augmented times consistent with their bounds.
  for (int i = 0; i < n; ++i) {
    const SubjectRecord& s = data.subjects[i];
    for (int k = 0; k < kNumRisks; ++k) {
      if (s.dropout[k].observed) {
        state.effects[i].imputed_dropout[k] = s.dropout[k].time_weeks;
        continue;
      }
      const double theta =
          Hyperparams::level_mean(h.phi[k], s.dummies);
      const double sd =
          std::sqrt(h.varsigma2_for(static_cast<Risk>(k), s.group()));
      state.effects[i].imputed_dropout[k] = std::exp(sample_truncated_normal(
          theta, sd, std::log(s.dropout[k].time_weeks), rng));
    }
  }
  return state;
}

// ---------------------------------------------------------------------------
// Chain driver.

ChainRunner::ChainRunner(const McmcConfig& cfg, const TrialData& data,
                         int chain_index)
    : cfg_(cfg),
      data_(data),
      rng_impute_(cfg.seed, {static_cast<std::uint64_t>(chain_index),
                             kSiteImpute}),
      rng_effects_(cfg.seed, {static_cast<std::uint64_t>(chain_index),
                              kSiteEffects}),
      rng_kappa_(cfg.seed,
                 {static_cast<std::uint64_t>(chain_index), kSiteKappa}),
      rng_gamma_(cfg.seed,
                 {static_cast<std::uint64_t>(chain_index), kSiteGamma}),
      rng_var_(cfg.seed, {static_cast<std::uint64_t>(chain_index), kSiteVar}),
      rng_dropout_reg_(cfg.seed, {static_cast<std::uint64_t>(chain_index),
                                  kSiteDropReg}),
      rng_dropout_var_(cfg.seed, {static_cast<std::uint64_t>(chain_index),
                                  kSiteDropVar}),
      rng_kappa_level_(cfg.seed, {static_cast<std::uint64_t>(chain_index),
                                  kSiteKappaLevel}) {
  cfg_.validate();
  data_.validate();
  state_ = init_state(cfg_, data_, chain_index);
  const int n = data_.n_subjects();
  window_accept_kappa_.assign(n, 0);
  window_accept_effects_.assign(n, 0);
  total_accept_kappa_.assign(n, 0);
  total_accept_effects_.assign(n, 0);

  // A non-finite start is a data or configuration defect; identify the
  // offender rather than letting the chain wander on NaNs.
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(loglik_longitudinal(data_.subjects[i],
                                           state_.effects[i],
                                           state_.hyper.sigma2_resid))) {
      throw NumericError("non-finite longitudinal likelihood at "
                         "initialization for subject '" +
                         data_.subjects[i].id + "'");
    }
    if (!std::isfinite(loglik_dropout(data_.subjects[i], state_.effects[i],
                                      state_.hyper, cfg_.variant,
                                      DropoutMode::Augmented))) {
      throw NumericError(
          "non-finite dropout likelihood at initialization for subject '" +
          data_.subjects[i].id + "'");
    }
  }
  if (!std::isfinite(joint_log_posterior(state_.effects, state_.hyper, data_,
                                         cfg_.variant, cfg_.priors))) {
    throw NumericError("non-finite log posterior at initialization "
                       "(hyperparameter block)");
  }
}

void ChainRunner::set_data(TrialData data) {
  if (data.n_subjects() != data_.n_subjects()) {
    throw std::invalid_argument("set_data: subject count changed");
  }
  data_ = std::move(data);
}

void ChainRunner::sweep(int iteration) {
  impute_censored_dropout_times(state_, data_, cfg_, rng_impute_);
  const bool nonconjugate = cfg_.variant == LatentLink::TrajectoryAtDropout;
  const bool past_burn_in = iteration > cfg_.burn_in;
  for (int i = 0; i < data_.n_subjects(); ++i) {
    if (nonconjugate) {
      const bool acc = update_effects_mh(state_, data_, cfg_, i, rng_effects_);
      window_accept_effects_[i] += acc;
      total_accept_effects_[i] += past_burn_in && acc;
    } else {
      update_subject_linear_effects(state_, data_, cfg_, i, rng_effects_);
    }
  }
  for (int rep = 0; rep < cfg_.kappa_steps; ++rep) {
    for (int i = 0; i < data_.n_subjects(); ++i) {
      const bool acc = update_changepoint(state_, data_, cfg_, i, rng_kappa_);
      window_accept_kappa_[i] += acc;
      total_accept_kappa_[i] += past_burn_in && acc;
    }
  }
  update_gamma(state_, data_, cfg_, rng_gamma_);
  update_longitudinal_variances(state_, data_, cfg_, rng_var_);
  {
    const InterweaveAccepts acc = update_changepoint_level_interweave(
        state_, data_, cfg_, rng_kappa_level_);
    window_accept_translate_ += acc.translate;
    window_accept_rescale_ += acc.rescale;
    if (past_burn_in) {
      total_accept_translate_ += acc.translate;
      total_accept_rescale_ += acc.rescale;
      total_accept_refresh_ += acc.refresh;
    }
  }
  update_dropout_regression(state_, data_, cfg_, rng_dropout_reg_);
  update_dropout_variances(state_, data_, cfg_, rng_dropout_var_);

  if (!past_burn_in) {
    ++window_count_;
    if (window_count_ >= cfg_.adapt_window) adapt_steps();
  }
}

void ChainRunner::adapt_steps() {
  ++adapt_round_;
  const double gain = 1.0 / adapt_round_;
  auto adapt_scalar = [&](double& step, int& accepts, double target) {
    const double rate =
        static_cast<double>(accepts) / (3.0 * window_count_);
    step = std::exp(std::clamp(std::log(step) + gain * (rate - target),
                               kMinLogStep, kMaxLogStep));
    accepts = 0;
  };
  adapt_scalar(state_.step_kappa_translate, window_accept_translate_,
               cfg_.adapt_target);
  adapt_scalar(state_.step_kappa_rescale, window_accept_rescale_,
               cfg_.adapt_target);
  const int kappa_attempts = window_count_ * std::max(cfg_.kappa_steps, 1);
  for (std::size_t i = 0; i < state_.step_kappa.size(); ++i) {
    const double rate =
        static_cast<double>(window_accept_kappa_[i]) / kappa_attempts;
    double ls = std::log(state_.step_kappa[i]) +
                gain * (rate - cfg_.adapt_target);
    state_.step_kappa[i] = std::exp(std::clamp(ls, kMinLogStep, kMaxLogStep));
    window_accept_kappa_[i] = 0;
  }
  if (cfg_.variant == LatentLink::TrajectoryAtDropout) {
    for (std::size_t i = 0; i < state_.step_effects.size(); ++i) {
      const double rate =
          static_cast<double>(window_accept_effects_[i]) / window_count_;
      double ls = std::log(state_.step_effects[i]) +
                  gain * (rate - cfg_.adapt_target);
      state_.step_effects[i] =
          std::exp(std::clamp(ls, kMinLogStep, kMaxLogStep));
      window_accept_effects_[i] = 0;
    }
  }
  window_count_ = 0;
}

AcceptanceStats ChainRunner::acceptance(int post_burn_in_iterations) const {
  AcceptanceStats stats;
  const int n = data_.n_subjects();
  const double denom = std::max(post_burn_in_iterations, 1);
  const double kappa_denom = denom * std::max(cfg_.kappa_steps, 1);
  stats.kappa_rate.resize(n);
  for (int i = 0; i < n; ++i) {
    stats.kappa_rate[i] = total_accept_kappa_[i] / kappa_denom;
  }
  if (cfg_.variant == LatentLink::TrajectoryAtDropout) {
    stats.effects_rate.resize(n);
    for (int i = 0; i < n; ++i) {
      stats.effects_rate[i] = total_accept_effects_[i] / denom;
    }
  }
  const double interweave_attempts = 3.0 * denom;
  stats.kappa_translate_rate = total_accept_translate_ / interweave_attempts;
  stats.kappa_rescale_rate = total_accept_rescale_ / interweave_attempts;
  stats.kappa_refresh_rate =
      n > 0 ? total_accept_refresh_ / (denom * n) : 0.0;
  auto mean_of = [](const std::vector<double>& v) {
    return v.empty() ? 0.0
                     : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };
  stats.mean_kappa_rate = mean_of(stats.kappa_rate);
  stats.mean_effects_rate = mean_of(stats.effects_rate);
  return stats;
}

ChainOutput run_chain(const McmcConfig& cfg, const TrialData& data,
                      int chain_index) {
  ChainRunner runner(cfg, data, chain_index);
  ChainOutput out;
  out.seed = cfg.seed;
  out.chain_index = chain_index;
  out.config = cfg;
  out.draws.reserve(cfg.n_retained());
  out.deviance.reserve(cfg.n_retained());
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    runner.sweep(iter);
    if (iter > cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
      const SamplerState& st = runner.state();
      const double dev = deviance(st.effects, st.hyper, data, cfg.variant);
      if (!std::isfinite(dev)) {
        throw NumericError("non-finite deviance at iteration " +
                           std::to_string(iter));
      }
      out.draws.push_back({st.hyper, st.effects});
      out.deviance.push_back(dev);
    }
  }
  out.acceptance = runner.acceptance(cfg.iterations - cfg.burn_in);
  out.final_step_kappa = runner.state().step_kappa;
  out.final_step_effects = runner.state().step_effects;
  return out;
}

std::vector<ChainOutput> run_analysis(const McmcConfig& cfg,
                                      const TrialData& data) {
  cfg.validate();
  std::vector<std::future<ChainOutput>> futures;
  futures.reserve(cfg.n_chains);
  for (int c = 0; c < cfg.n_chains; ++c) {
    futures.push_back(std::async(std::launch::async, [&cfg, &data, c] {
      return run_chain(cfg, data, c);
    }));
  }
  std::vector<ChainOutput> out;
  out.reserve(cfg.n_chains);
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace dasjoint
