#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dasjoint/diagnostics.hpp"
#include "dasjoint/model.hpp"
#include "dasjoint/sampler.hpp"
#include "dasjoint/stats.hpp"
#include "test_helpers.hpp"

using namespace dasjoint;
using namespace dasjoint::testing;

namespace {

TrialData trial_of(std::vector<SubjectRecord> subjects) {
  TrialData d;
  d.subjects = std::move(subjects);
  d.study_end_week = 156.0;
  d.n_treatments = 3;
  return d;
}

McmcConfig config_for(LatentLink link) {
  McmcConfig cfg;
  cfg.variant = link;
  return cfg;
}

SamplerState state_with(const TrialData& data, const McmcConfig& cfg) {
  SamplerState st;
  st.effects.assign(data.n_subjects(), SubjectEffects{});
  st.step_kappa.assign(data.n_subjects(), 2.0);
  st.step_effects.assign(data.n_subjects(), 0.3);
  st.hyper = make_hyperparams(data.n_dummies(), cfg.variant,
                              data.n_treatments,
                              cfg.priors.pooled_dropout_variance);
  return st;
}

// ESS-aware Monte Carlo standard error for an autocorrelated series.
double mcmc_se(const std::vector<double>& draws) {
  const double ess = ess_and_acf({draws}).ess;
  return std::sqrt(variance(draws) / std::max(ess, 1.0));
}

}  // namespace

TEST_CASE("imputation leaves observed risks untouched") {
  auto s = make_subject("a", {0, 0}, {}, {30.0, true}, {30.0, false});
  TrialData data = trial_of({s});
  McmcConfig cfg = config_for(LatentLink::Separate);
  SamplerState st = state_with(data, cfg);
  st.effects[0].imputed_dropout = {30.0, 44.0};
  RngStream rng(1, {1});
  impute_censored_dropout_times(st, data, cfg, rng);
  CHECK(st.effects[0].imputed_dropout[0] == 30.0);   // observed: untouched
  CHECK(st.effects[0].imputed_dropout[1] != 44.0);   // censored: redrawn
  CHECK(st.effects[0].imputed_dropout[1] > 30.0);
}

TEST_CASE("imputation matches a rejection oracle on the lognormal tail") {
  // The censoring time sits at the median of the latent law.
  const double theta = std::log(40.0), vs2 = 0.49;
  auto s = make_subject("a", {0, 0}, {}, {40.0, false}, {1e-300, false});
  TrialData data = trial_of({s});
  McmcConfig cfg = config_for(LatentLink::Separate);
  SamplerState st = state_with(data, cfg);
  st.hyper.phi[0] << theta, 0.0, 0.0;
  st.hyper.varsigma2[0].setConstant(vs2);
  st.effects[0].imputed_dropout = {41.0, 1.0};

  RngStream rng(2, {1});
  std::vector<double> imputed;
  for (int j = 0; j < 50000; ++j) {
    impute_censored_dropout_times(st, data, cfg, rng);
    imputed.push_back(std::log(st.effects[0].imputed_dropout[0]));
    CHECK(st.effects[0].imputed_dropout[0] > 40.0);
  }
  std::vector<double> oracle;
  RngStream orng(3, {1});
  while (oracle.size() < imputed.size()) {
    const double draw = theta + std::sqrt(vs2) * orng.normal();
    if (draw > std::log(40.0)) oracle.push_back(draw);
  }
  CHECK(means_agree(imputed, oracle, 3.0));
  // Imputation median lands at the 75% point of the untruncated law.
  CHECK(quantile(imputed, 0.5) ==
        doctest::Approx(theta + std::sqrt(vs2) * normal_quantile(0.75))
            .epsilon(0.01));
}

TEST_CASE("imputation collapses to the deterministic limit") {
  auto s = make_subject("a", {0, 0}, {}, {40.0, false}, {10.0, false});
  TrialData data = trial_of({s});
  McmcConfig cfg = config_for(LatentLink::Separate);
  SamplerState st = state_with(data, cfg);
  st.hyper.phi[0] << std::log(20.0), 0.0, 0.0;  // median below the bound
  st.hyper.phi[1] << std::log(25.0), 0.0, 0.0;  // median above the bound
  st.hyper.varsigma2[0].setConstant(1e-12);
  st.hyper.varsigma2[1].setConstant(1e-12);
  st.effects[0].imputed_dropout = {41.0, 11.0};
  RngStream rng(4, {1});
  impute_censored_dropout_times(st, data, cfg, rng);
  CHECK(st.effects[0].imputed_dropout[0] ==
        doctest::Approx(40.0).epsilon(1e-5));
  CHECK(st.effects[0].imputed_dropout[0] > 40.0);
  CHECK(st.effects[0].imputed_dropout[1] ==
        doctest::Approx(25.0).epsilon(1e-5));
}

TEST_CASE("conjugate effects update reproduces the textbook posterior") {
  // One observation y=2 of the level at t=0 with unit noise and a unit
  // standard-normal prior: posterior N(1, 1/2).
  auto s = make_subject("a", {0, 0}, {{0.0, 2.0}}, {1e-300, false},
                        {1e-300, false});
  TrialData data = trial_of({s});
  McmcConfig cfg = config_for(LatentLink::Separate);
  SamplerState st = state_with(data, cfg);
  st.hyper.sigma2_resid = 1.0;
  st.hyper.sigma2_alpha = 1.0;
  st.effects[0].kappa = 5.0;
  st.effects[0].imputed_dropout = {1.0, 1.0};

  RngStream rng(5, {1});
  std::vector<double> draws;
  for (int j = 0; j < 50000; ++j) {
    update_subject_linear_effects(st, data, cfg, 0, rng);
    draws.push_back(st.effects[0].alpha_baseline);
  }
  CHECK(mean_within(draws, 1.0, 3.0));
  CHECK(variance_within(draws, 0.5, 3.0));
}

TEST_CASE("zero coupling gives bit-identical draws to the separate model") {
  auto s = make_subject("a", {1, 0}, {{0.0, 1.7}, {4.0, 1.5}, {12.0, 1.3}},
                        {30.0, true}, {30.0, false});
  TrialData data = trial_of({s});
  McmcConfig cfg6 = config_for(LatentLink::AllShared);
  McmcConfig cfg1 = config_for(LatentLink::Separate);
  SamplerState st6 = state_with(data, cfg6);
  SamplerState st1 = state_with(data, cfg1);
  for (SamplerState* st : {&st6, &st1}) {
    st->effects[0].kappa = 8.0;
    st->effects[0].imputed_dropout = {30.0, 44.0};
    st->hyper.sigma2_resid = 0.02;
  }
  RngStream a(6, {1}), b(6, {1});
  for (int j = 0; j < 200; ++j) {
    update_subject_linear_effects(st6, data, cfg6, 0, a);
    update_subject_linear_effects(st1, data, cfg1, 0, b);
    CHECK(st6.effects[0].alpha_baseline == st1.effects[0].alpha_baseline);
    CHECK(st6.effects[0].beta1 == st1.effects[0].beta1);
    CHECK(st6.effects[0].beta2 == st1.effects[0].beta2);
  }
}

TEST_CASE("conjugate effects update reproduces the prior with no data") {
  auto s = make_subject("a", {0, 1}, {}, {1e-300, false}, {1e-300, false});
  TrialData data = trial_of({s});
  McmcConfig cfg = config_for(LatentLink::Separate);
  SamplerState st = state_with(data, cfg);
  st.hyper.gamma_alpha << 1.4, 0.0, 0.3;
  st.hyper.gamma_beta1 << -0.05, 0.0, 0.01;
  st.hyper.sigma2_alpha = 0.09;
  st.hyper.sigma2_beta1 = 4e-4;
  st.effects[0].imputed_dropout = {1.0, 1.0};
  RngStream rng(7, {1});
  std::vector<double> alphas, beta1s;
  for (int j = 0; j < 50000; ++j) {
    update_subject_linear_effects(st, data, cfg, 0, rng);
    alphas.push_back(st.effects[0].alpha_baseline);
    beta1s.push_back(st.effects[0].beta1);
  }
  CHECK(mean_within(alphas, 1.7, 3.0));
  CHECK(variance_within(alphas, 0.09, 4.0));
  CHECK(mean_within(beta1s, -0.04, 3.0));
  CHECK(variance_within(beta1s, 4e-4, 4.0));
}

TEST_CASE("conjugate effects update rejects the trajectory link") {
  auto s = make_subject("a", {0, 0}, {}, {30.0, true}, {30.0, false});
  TrialData data = trial_of({s});
  McmcConfig cfg = config_for(LatentLink::TrajectoryAtDropout);
  SamplerState st = state_with(data, cfg);
  RngStream rng(8, {1});
  CHECK_THROWS_AS(update_subject_linear_effects(st, data, cfg, 0, rng),
                  std::invalid_argument);
}

TEST_CASE("change point metropolis") {
  SUBCASE("zero step is the identity and always accepts") {
    auto s = make_subject("a", {0, 0}, {{0.0, 1.7}, {8.0, 1.4}},
                          {1e-300, false}, {1e-300, false});
    TrialData data = trial_of({s});
    McmcConfig cfg = config_for(LatentLink::Separate);
    SamplerState st = state_with(data, cfg);
    st.effects[0].kappa = 7.0;
    st.effects[0].imputed_dropout = {1.0, 1.0};
    st.step_kappa[0] = 0.0;
    RngStream rng(9, {1});
    for (int j = 0; j < 50; ++j) {
      CHECK(update_changepoint(st, data, cfg, 0, rng));
      CHECK(st.effects[0].kappa == 7.0);
    }
  }
  SUBCASE("flat likelihood reproduces the prior") {
    auto s = make_subject("a", {1, 0}, {}, {1e-300, false}, {1e-300, false});
    TrialData data = trial_of({s});
    McmcConfig cfg = config_for(LatentLink::Separate);
    SamplerState st = state_with(data, cfg);
    st.hyper.gamma_kappa << 10.0, 3.0, 0.0;  // subject-level mean 13
    st.hyper.sigma2_kappa = 4.0;
    st.effects[0].kappa = 13.0;
    st.effects[0].imputed_dropout = {1.0, 1.0};
    st.step_kappa[0] = 5.0;
    RngStream rng(10, {1});
    std::vector<double> draws;
    for (int j = 0; j < 200000; ++j) {
      update_changepoint(st, data, cfg, 0, rng);
      if (j % 10 == 0) draws.push_back(st.effects[0].kappa);
    }
    CHECK(std::fabs(mean(draws) - 13.0) <= 3.0 * mcmc_se(draws));
    CHECK(variance(draws) == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("random-walk effects update") {
  auto s = make_subject("a", {0, 0}, {{0.0, 1.8}, {6.0, 1.5}, {16.0, 1.45}},
                        {30.0, false}, {25.0, true});
  TrialData data = trial_of({s});
  McmcConfig cfg_mh = config_for(LatentLink::TrajectoryAtDropout);
  McmcConfig cfg_cj = config_for(LatentLink::Separate);

  auto prepare = [&](SamplerState& st) {
    st.hyper.gamma_alpha << 1.6, 0.0, 0.0;
    st.hyper.gamma_beta1 << -0.03, 0.0, 0.0;
    st.hyper.sigma2_resid = 0.02;
    st.hyper.sigma2_alpha = 0.09;
    st.hyper.sigma2_beta1 = 1e-3;
    st.hyper.sigma2_beta2 = 1e-4;
    st.hyper.phi[0] << 4.0, 0.0, 0.0;
    st.hyper.phi[1] << 3.2, 0.0, 0.0;
    st.hyper.varsigma2[0].setConstant(1.0);
    st.hyper.varsigma2[1].setConstant(1.0);
    st.effects[0].kappa = 8.0;
    st.effects[0].imputed_dropout = {33.0, 25.0};
  };

  SUBCASE("zero step leaves the state untouched") {
    SamplerState st = state_with(data, cfg_mh);
    prepare(st);
    st.hyper.omega[0].setZero();
    st.hyper.omega[1].setZero();
    st.step_effects[0] = 0.0;
    RngStream rng(11, {1});
    const double a0 = st.effects[0].alpha_baseline;
    CHECK(update_effects_mh(st, data, cfg_mh, 0, rng));
    CHECK(st.effects[0].alpha_baseline == a0);
  }
  SUBCASE("with zero coupling the stationary marginals match the conjugate "
          "path") {
    SamplerState st_mh = state_with(data, cfg_mh);
    SamplerState st_cj = state_with(data, cfg_cj);
    prepare(st_mh);
    prepare(st_cj);
    st_mh.hyper.omega[0].setZero();
    st_mh.hyper.omega[1].setZero();
    st_mh.step_effects[0] = 0.8;
    RngStream rng_mh(12, {1}), rng_cj(13, {1});
    std::vector<double> mh_alpha, mh_beta1, cj_alpha, cj_beta1;
    for (int j = 0; j < 300000; ++j) {
      update_effects_mh(st_mh, data, cfg_mh, 0, rng_mh);
      if (j % 10 == 0) {
        mh_alpha.push_back(st_mh.effects[0].alpha_baseline);
        mh_beta1.push_back(st_mh.effects[0].beta1);
      }
    }
    for (int j = 0; j < 30000; ++j) {
      update_subject_linear_effects(st_cj, data, cfg_cj, 0, rng_cj);
      cj_alpha.push_back(st_cj.effects[0].alpha_baseline);
      cj_beta1.push_back(st_cj.effects[0].beta1);
    }
    const double se_a = std::sqrt(std::pow(mcmc_se(mh_alpha), 2) +
                                  variance(cj_alpha) / cj_alpha.size());
    CHECK(std::fabs(mean(mh_alpha) - mean(cj_alpha)) <= 4.0 * se_a);
    const double se_b = std::sqrt(std::pow(mcmc_se(mh_beta1), 2) +
                                  variance(cj_beta1) / cj_beta1.size());
    CHECK(std::fabs(mean(mh_beta1) - mean(cj_beta1)) <= 4.0 * se_b);
  }
}

TEST_CASE("gamma block updates") {
  McmcConfig cfg = config_for(LatentLink::Separate);

  SUBCASE("one-arm degenerate regression concentrates at the common value") {
    std::vector<SubjectRecord> subs;
    for (int i = 0; i < 40; ++i) {
      subs.push_back(make_subject("s" + std::to_string(i), {0, 0}, {},
                                  {1e-300, false}, {1e-300, false}));
    }
    TrialData data = trial_of(subs);
    SamplerState st = state_with(data, cfg);
    for (auto& e : st.effects) e.alpha_baseline = 1.25;
    st.hyper.sigma2_alpha = 1e-8;
    RngStream rng(14, {1});
    std::vector<double> draws;
    for (int j = 0; j < 5000; ++j) {
      update_gamma(st, data, cfg, rng);
      draws.push_back(st.hyper.gamma_alpha[0]);
    }
    CHECK(std::fabs(mean(draws) - 1.25) < 1e-3);
  }
  SUBCASE("balanced two-arm fixture matches the analytic ridge posterior") {
    std::vector<SubjectRecord> subs;
    std::vector<double> values;
    RngStream gen(15, {1});
    for (int i = 0; i < 30; ++i) {
      const bool arm1 = i % 2 == 0;
      subs.push_back(make_subject("s" + std::to_string(i),
                                  {arm1 ? 1.0 : 0.0, 0.0}, {},
                                  {1e-300, false}, {1e-300, false}));
      values.push_back((arm1 ? 1.0 : 2.0) + 0.3 * gen.normal());
    }
    TrialData data = trial_of(subs);
    SamplerState st = state_with(data, cfg);
    for (std::size_t i = 0; i < values.size(); ++i)
      st.effects[i].kappa = values[i];
    st.hyper.sigma2_kappa = 0.25;

    // Independent normal-equations evaluation of the ridge posterior
    // (prior N(12, 100) on each coefficient, noise variance 0.25).
    Eigen::MatrixXd x(30, 3);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = subs[i].dummies[0];
      x(i, 2) = subs[i].dummies[1];
      y[i] = values[i];
    }
    const Eigen::MatrixXd precision =
        x.transpose() * x / 0.25 + Eigen::MatrixXd::Identity(3, 3) / 100.0;
    const Eigen::VectorXd mean_vec = precision.ldlt().solve(
        x.transpose() * y / 0.25 +
        Eigen::VectorXd::Constant(3, 12.0 / 100.0));
    const Eigen::MatrixXd cov = precision.inverse();

    RngStream rng(16, {1});
    std::vector<std::vector<double>> draws(3);
    for (int j = 0; j < 50000; ++j) {
      update_gamma(st, data, cfg, rng);
      for (int c = 0; c < 3; ++c) draws[c].push_back(st.hyper.gamma_kappa[c]);
    }
    for (int c = 0; c < 3; ++c) {
      CHECK(mean_within(draws[c], mean_vec[c], 3.0));
      CHECK(variance_within(draws[c], cov(c, c), 4.0));
    }
  }
  SUBCASE("a coefficient with an empty arm reproduces its prior") {
    std::vector<SubjectRecord> subs;
    for (int i = 0; i < 20; ++i) {
      subs.push_back(make_subject("s" + std::to_string(i),
                                  {i % 2 == 0 ? 1.0 : 0.0, 0.0}, {},
                                  {1e-300, false}, {1e-300, false}));
    }
    TrialData data = trial_of(subs);  // nobody in arm 2
    SamplerState st = state_with(data, cfg);
    for (auto& e : st.effects) e.alpha_baseline = 1.5;
    st.hyper.sigma2_alpha = 0.1;
    RngStream rng(17, {1});
    std::vector<double> draws;
    for (int j = 0; j < 50000; ++j) {
      update_gamma(st, data, cfg, rng);
      draws.push_back(st.hyper.gamma_alpha[2]);
    }
    CHECK(mean_within(draws, 0.0, 3.0));
    CHECK(variance_within(draws, 1000.0, 4.0));
  }
}

TEST_CASE("variance updates") {
  McmcConfig cfg = config_for(LatentLink::Separate);

  SUBCASE("no data draws from the prior") {
    TrialData data = trial_of({});
    SamplerState st = state_with(data, cfg);
    RngStream rng(18, {1});
    std::vector<double> inv_resid, inv_vs;
    for (int j = 0; j < 50000; ++j) {
      update_variances(st, data, cfg, rng);
      inv_resid.push_back(1.0 / st.hyper.sigma2_resid);
      inv_vs.push_back(1.0 / st.hyper.varsigma2[0][1]);
    }
    // 1/sigma2 ~ Gamma(0.01, rate 0.01): mean 1.
    CHECK(mean_within(inv_resid, 1.0, 4.0));
    CHECK(mean_within(inv_vs, 1.0, 4.0));
  }
  SUBCASE("known residuals give the hand-computed shape and rate") {
    // Six visits, zero trajectory: the sum of squares is known exactly.
    std::vector<std::pair<double, double>> visits;
    double ss = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double y = 0.1 * (j + 1);
      visits.push_back({static_cast<double>(j), y});
      ss += y * y;
    }
    auto s = make_subject("a", {0, 0}, visits, {1e-300, false},
                          {1e-300, false});
    TrialData data = trial_of({s});
    SamplerState st = state_with(data, cfg);
    const double shape = 0.01 + 3.0, rate = 0.01 + 0.5 * ss;
    RngStream rng(19, {1});
    std::vector<double> draws;
    for (int j = 0; j < 50000; ++j) {
      update_longitudinal_variances(st, data, cfg, rng);
      draws.push_back(st.hyper.sigma2_resid);
    }
    // Long-run mean approaches rate/(shape-1); the variance follows the
    // inverse-gamma moment formula.
    CHECK(mean_within(draws, rate / (shape - 1.0), 4.0));
    const double var =
        rate * rate / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0));
    CHECK(std::fabs(variance(draws) - var) <=
          6.0 * var * std::sqrt(2.0 / (draws.size() - 1.0)) + 1e-6);
  }
}

TEST_CASE("dropout regression updates") {
  SUBCASE("a zero latent column reproduces the omega prior") {
    McmcConfig cfg = config_for(LatentLink::PostSlope);
    std::vector<SubjectRecord> subs;
    for (int i = 0; i < 25; ++i) {
      subs.push_back(make_subject("s" + std::to_string(i), {0, 0}, {},
                                  {20.0 + i, true}, {30.0 + i, false}));
    }
    TrialData data = trial_of(subs);
    SamplerState st = state_with(data, cfg);
    for (auto& e : st.effects) {
      e.beta2 = 0.0;  // latent column identically zero
      e.imputed_dropout = {25.0, 60.0};
    }
    RngStream rng(20, {1});
    std::vector<double> draws;
    for (int j = 0; j < 50000; ++j) {
      update_dropout_regression(st, data, cfg, rng);
      draws.push_back(st.hyper.omega[0][0]);
    }
    CHECK(mean_within(draws, 0.0, 3.0));
    CHECK(variance_within(draws, 1000.0, 4.0));
  }
  SUBCASE("noiseless coupling is recovered exactly") {
    McmcConfig cfg = config_for(LatentLink::PostSlope);
    std::vector<SubjectRecord> subs;
    const std::vector<double> betas = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (int i = 0; i < 5; ++i) {
      const double logd = 2.0 + 1.0 * betas[i];
      subs.push_back(make_subject("s" + std::to_string(i), {0, 0}, {},
                                  {std::exp(logd), true}, {1e-300, false}));
    }
    TrialData data = trial_of(subs);
    SamplerState st = state_with(data, cfg);
    for (int i = 0; i < 5; ++i) {
      st.effects[i].beta2 = betas[i];
      st.effects[i].imputed_dropout = {1.0, 1.0};
    }
    st.hyper.varsigma2[0].setConstant(1e-8);
    RngStream rng(21, {1});
    std::vector<double> phi0, omega;
    for (int j = 0; j < 20000; ++j) {
      update_dropout_regression(st, data, cfg, rng);
      phi0.push_back(st.hyper.phi[0][0]);
      omega.push_back(st.hyper.omega[0][0]);
    }
    CHECK(std::fabs(mean(phi0) - 2.0) < 1e-3);
    CHECK(std::fabs(mean(omega) - 1.0) < 1e-3);
  }
  SUBCASE("five-subject fixture matches the closed-form posterior") {
    McmcConfig cfg = config_for(LatentLink::Baseline);
    cfg.priors.pooled_dropout_variance = true;
    std::vector<SubjectRecord> subs;
    const std::vector<double> alphas = {1.2, 1.5, 1.9, 1.4, 1.7};
    const std::vector<double> logd = {3.0, 2.4, 2.0, 2.8, 2.2};
    const std::vector<std::vector<double>> dummies = {
        {0, 0}, {1, 0}, {0, 1}, {1, 0}, {0, 0}};
    for (int i = 0; i < 5; ++i) {
      subs.push_back(make_subject("s" + std::to_string(i), dummies[i], {},
                                  {std::exp(logd[i]), true},
                                  {1e-300, false}));
    }
    TrialData data = trial_of(subs);
    SamplerState st = state_with(data, cfg);
    for (int i = 0; i < 5; ++i) {
      st.effects[i].alpha_baseline = alphas[i];
      st.effects[i].imputed_dropout = {1.0, 1.0};
    }
    const double vs2 = 0.49;
    st.hyper.varsigma2[0].setConstant(vs2);
    st.hyper.varsigma2[1].setConstant(vs2);

    Eigen::MatrixXd x(5, 4);
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) {
      x(i, 0) = 1.0;
      x(i, 1) = dummies[i][0];
      x(i, 2) = dummies[i][1];
      x(i, 3) = alphas[i];
      y[i] = logd[i];
    }
    const Eigen::MatrixXd precision =
        x.transpose() * x / vs2 + Eigen::MatrixXd::Identity(4, 4) / 1000.0;
    const Eigen::VectorXd mean_vec =
        precision.ldlt().solve(x.transpose() * y / vs2);
    const Eigen::MatrixXd cov = precision.inverse();

    RngStream rng(22, {1});
    std::vector<std::vector<double>> draws(4);
    for (int j = 0; j < 50000; ++j) {
      update_dropout_regression(st, data, cfg, rng);
      for (int c = 0; c < 3; ++c) draws[c].push_back(st.hyper.phi[0][c]);
      draws[3].push_back(st.hyper.omega[0][0]);
    }
    for (int c = 0; c < 4; ++c) {
      CHECK(mean_within(draws[c], mean_vec[c], 4.0));
      CHECK(variance_within(draws[c], cov(c, c), 5.0));
    }
  }
}
