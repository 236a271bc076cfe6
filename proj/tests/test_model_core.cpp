#include <doctest.h>

#include <cmath>
#include <limits>

#include "dasjoint/model.hpp"
#include "dasjoint/rng.hpp"
#include "dasjoint/stats.hpp"
#include "test_helpers.hpp"

using namespace dasjoint;
using namespace dasjoint::testing;

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Independent two-branch evaluation of the piecewise trajectory.
double oracle_trajectory(double a, double b1, double b2, double k, double t) {
  if (t <= k) return a + b1 * t;
  return a + b1 * k + b2 * (t - k);
}

double oracle_normal_logpdf(double x, double mu, double var) {
  return -0.5 * std::log(2.0 * M_PI * var) -
         (x - mu) * (x - mu) / (2.0 * var);
}

SubjectEffects effects(double a, double b1, double b2, double k) {
  SubjectEffects e;
  e.alpha_baseline = a;
  e.beta1 = b1;
  e.beta2 = b2;
  e.kappa = k;
  return e;
}

}  // namespace

TEST_CASE("trajectory hits the hand-evaluated fixtures") {
  const SubjectEffects e = effects(1.5, -0.05, 0.005, 10.0);
  CHECK(eval_trajectory(e, 10.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eval_trajectory(e, 20.0) == doctest::Approx(1.05).epsilon(1e-12));
  CHECK(eval_trajectory(e, 10.0) ==
        doctest::Approx(oracle_trajectory(1.5, -0.05, 0.005, 10.0, 10.0)));
  CHECK(eval_trajectory(e, 20.0) ==
        doctest::Approx(oracle_trajectory(1.5, -0.05, 0.005, 10.0, 20.0)));
}

TEST_CASE("trajectory with zero slopes is the constant intercept") {
  for (double k : {-5.0, 0.0, 17.0}) {
    const SubjectEffects e = effects(1.5, 0.0, 0.0, k);
    for (double t : {-2.0, 0.0, 9.9, 10.0, 10.1, 156.0}) {
      CHECK(eval_trajectory(e, t) == doctest::Approx(1.5).epsilon(1e-14));
    }
  }
}

TEST_CASE("trajectory agrees with the two-branch form everywhere") {
  RngStream rng(7, {1});
  for (int rep = 0; rep < 300; ++rep) {
    const double a = 2.0 * rng.normal();
    const double b1 = 0.1 * rng.normal();
    const double b2 = 0.02 * rng.normal();
    const double k = 30.0 * rng.uniform() - 5.0;
    const SubjectEffects e = effects(a, b1, b2, k);
    for (int j = 0; j < 10; ++j) {
      const double t = 170.0 * rng.uniform() - 7.0;
      const double lhs = eval_trajectory(e, t);
      const double rhs = oracle_trajectory(a, b1, b2, k, t);
      CHECK(std::fabs(lhs - rhs) <=
            1e-12 * std::max(1.0, std::fabs(rhs)));
    }
  }
}

TEST_CASE("trajectory is continuous at the change point") {
  RngStream rng(8, {1});
  for (int rep = 0; rep < 200; ++rep) {
    const SubjectEffects e =
        effects(rng.normal(), 0.2 * rng.normal(), 0.2 * rng.normal(),
                20.0 * rng.uniform());
    for (double eps : {1e-6, 1e-8, 1e-10}) {
      const double gap = std::fabs(eval_trajectory(e, e.kappa - eps) -
                                   eval_trajectory(e, e.kappa + eps));
      CHECK(gap <= (std::fabs(e.beta1) + std::fabs(e.beta2)) * eps + 1e-15);
    }
  }
}

TEST_CASE("trajectory is piecewise linear away from the change point") {
  const SubjectEffects e = effects(1.2, -0.07, 0.004, 12.0);
  const double h = 1.5;
  for (double start : {-10.0, 13.0}) {  // grids fully on one side of kappa
    for (int j = 0; j < 5; ++j) {
      const double t = start + j * h;
      if (start < e.kappa && t + 2 * h >= e.kappa) break;
      const double second_diff = eval_trajectory(e, t + 2 * h) -
                                 2.0 * eval_trajectory(e, t + h) +
                                 eval_trajectory(e, t);
      CHECK(std::fabs(second_diff) <= 1e-10);
    }
  }
}

TEST_CASE("das28 score reproduces the composite range endpoints") {
  CHECK(das28_score(0, 0, 2, 0) == doctest::Approx(0.49).epsilon(0.025));
  CHECK(das28_score(0, 0, 2, 0) ==
        doctest::Approx(0.70 * std::log(2.0)).epsilon(1e-12));
  CHECK(das28_score(28, 28, 100, 100) ==
        doctest::Approx(9.07).epsilon(0.002));
  CHECK(das28_score(0, 0, 1, 0) == doctest::Approx(0.0));
}

TEST_CASE("das28 score rejects out-of-domain inputs") {
  CHECK_THROWS_AS(das28_score(0, 0, 0.0, 0), std::domain_error);
  CHECK_THROWS_AS(das28_score(0, 0, -1.0, 0), std::domain_error);
  CHECK_THROWS_AS(das28_score(-1, 0, 2, 0), std::domain_error);
  CHECK_THROWS_AS(das28_score(29, 0, 2, 0), std::domain_error);
  CHECK_THROWS_AS(das28_score(0, 30, 2, 0), std::domain_error);
  CHECK_THROWS_AS(das28_score(0, 0, 2, 101), std::domain_error);
}

TEST_CASE("das28 score is monotone nondecreasing in each argument") {
  RngStream rng(9, {1});
  for (int rep = 0; rep < 300; ++rep) {
    const double t = 28.0 * rng.uniform(), s = 28.0 * rng.uniform();
    const double esr = 1.0 + 99.0 * rng.uniform();
    const double gh = 100.0 * rng.uniform();
    const double base = das28_score(t, s, esr, gh);
    CHECK(das28_score(std::min(t + 1.0, 28.0), s, esr, gh) >= base);
    CHECK(das28_score(t, std::min(s + 1.0, 28.0), esr, gh) >= base);
    CHECK(das28_score(t, s, esr + 1.0, gh) >= base);
    CHECK(das28_score(t, s, esr, std::min(gh + 1.0, 100.0)) >= base);
  }
}

TEST_CASE("longitudinal log likelihood") {
  const SubjectEffects e = effects(1.5, -0.05, 0.005, 10.0);

  SUBCASE("empty subject contributes zero") {
    const auto s = make_subject("a", {0, 0}, {}, {50, false}, {50, false});
    CHECK(loglik_longitudinal(s, e, 1.0) == 0.0);
  }
  SUBCASE("single visit at its mean, unit variance") {
    const auto s = make_subject("a", {0, 0}, {{10.0, 1.0}}, {50, false},
                                {50, false});
    CHECK(loglik_longitudinal(s, e, 1.0) ==
          doctest::Approx(-0.5 * kLog2Pi).epsilon(1e-13));
  }
  SUBCASE("two visits match an independent density-product evaluation") {
    const auto s = make_subject("a", {0, 0}, {{4.0, 1.4}, {20.0, 1.0}},
                                {50, false}, {50, false});
    const double sigma2 = 0.04;
    const double expected =
        oracle_normal_logpdf(1.4, oracle_trajectory(1.5, -0.05, 0.005, 10, 4),
                             sigma2) +
        oracle_normal_logpdf(1.0,
                             oracle_trajectory(1.5, -0.05, 0.005, 10, 20),
                             sigma2);
    CHECK(loglik_longitudinal(s, e, sigma2) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

namespace {

Hyperparams basic_hyper(LatentLink link) {
  Hyperparams h = make_hyperparams(2, link, 3, true);
  h.phi[0] << 3.0, 0.0, 0.0;
  h.phi[1] << 3.5, 0.0, 0.0;
  h.varsigma2[0].setConstant(0.25);
  h.varsigma2[1].setConstant(0.25);
  return h;
}

}  // namespace

TEST_CASE("dropout log likelihood fixtures") {
  const SubjectEffects e = effects(1.5, -0.05, 0.005, 10.0);
  const double tiny = 1e-300;  // survival term is exactly zero in logs

  SUBCASE("observed event at the predictor median") {
    Hyperparams h = basic_hyper(LatentLink::Separate);
    const double theta = 3.0, vs2 = 0.25;
    const auto s = make_subject("a", {0, 0}, {},
                                {std::exp(theta), true}, {tiny, false});
    const double expected =
        -theta - 0.5 * std::log(2.0 * M_PI * vs2);
    CHECK(loglik_dropout(s, e, h, LatentLink::Separate,
                         DropoutMode::Marginal) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("censoring at the median leaves half the mass") {
    Hyperparams h = basic_hyper(LatentLink::Separate);
    const auto s = make_subject("a", {0, 0}, {}, {std::exp(3.0), false},
                                {tiny, false});
    CHECK(loglik_dropout(s, e, h, LatentLink::Separate,
                         DropoutMode::Marginal) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-12));
  }
  SUBCASE("zero coupling collapses to the separate model") {
    Hyperparams h6 = basic_hyper(LatentLink::AllShared);
    Hyperparams h1 = basic_hyper(LatentLink::Separate);
    const auto s = make_subject("a", {1, 0}, {}, {20.0, true}, {20.0, false});
    SubjectEffects ei = e;
    ei.imputed_dropout[1] = 33.0;
    CHECK(loglik_dropout(s, ei, h6, LatentLink::AllShared,
                         DropoutMode::Marginal) ==
          loglik_dropout(s, ei, h1, LatentLink::Separate,
                         DropoutMode::Marginal));
    CHECK(loglik_dropout(s, ei, h6, LatentLink::AllShared,
                         DropoutMode::Augmented) ==
          loglik_dropout(s, ei, h1, LatentLink::Separate,
                         DropoutMode::Augmented));
  }
  SUBCASE("augmented mode requires imputed times beyond the bound") {
    Hyperparams h = basic_hyper(LatentLink::Separate);
    const auto s = make_subject("a", {0, 0}, {}, {20.0, false}, {25.0, false});
    SubjectEffects ei = e;
    ei.imputed_dropout = {30.0, 10.0};  // second one violates its bound
    CHECK(loglik_dropout(s, ei, h, LatentLink::Separate,
                         DropoutMode::Augmented) ==
          -std::numeric_limits<double>::infinity());
    ei.imputed_dropout = {30.0, 0.0};
    CHECK_THROWS_AS(loglik_dropout(s, ei, h, LatentLink::Separate,
                                   DropoutMode::Augmented),
                    std::invalid_argument);
  }
}

TEST_CASE("importance identity links augmented and marginal modes") {
  // Averaging the augmented density over truncated-normal imputations,
  // weighted by the imputation density, recovers the survival terms.
  const SubjectEffects base = effects(1.5, -0.05, 0.005, 10.0);
  Hyperparams h = basic_hyper(LatentLink::AllShared);
  h.omega[0] << 0.2, 1.0, 3.0;
  h.omega[1] << -0.1, 0.5, -2.0;
  const auto s =
      make_subject("a", {0, 1}, {}, {40.0, false}, {60.0, false});
  const double marginal =
      loglik_dropout(s, base, h, LatentLink::AllShared, DropoutMode::Marginal);

  RngStream rng(42, {5});
  std::vector<double> ratios;
  const int n_draws = 100000;
  ratios.reserve(n_draws);
  for (int j = 0; j < n_draws; ++j) {
    SubjectEffects e = base;
    double log_q = 0.0;
    for (int k = 0; k < kNumRisks; ++k) {
      const double theta =
          dropout_linpred(s, base, h, LatentLink::AllShared,
                          static_cast<Risk>(k));
      const double sd = std::sqrt(h.varsigma2_for(static_cast<Risk>(k),
                                                  s.group()));
      const double bound = std::log(s.dropout[k].time_weeks);
      const double x = sample_truncated_normal(theta, sd, bound, rng);
      e.imputed_dropout[k] = std::exp(x);
      log_q += truncated_normal_logpdf(x, theta, sd, bound);
    }
    const double augmented = loglik_dropout(s, e, h, LatentLink::AllShared,
                                            DropoutMode::Augmented);
    ratios.push_back(std::exp(augmented - log_q));
  }
  CHECK(mean_within(ratios, std::exp(marginal), 3.0, 1e-12));
}

TEST_CASE("latent link projections") {
  const SubjectEffects e = effects(1.5, -0.05, 0.005, 10.0);
  CHECK(latent_link(LatentLink::Separate, e).size() == 0);
  CHECK(latent_link(LatentLink::Baseline, e)[0] == 1.5);
  CHECK(latent_link(LatentLink::PreSlope, e)[0] == -0.05);
  CHECK(latent_link(LatentLink::PostSlope, e)[0] == 0.005);
  const Eigen::VectorXd all = latent_link(LatentLink::AllShared, e);
  CHECK(all.size() == 3);
  CHECK(all[0] == 1.5);
  CHECK(all[1] == -0.05);
  CHECK(all[2] == 0.005);
  CHECK(latent_link(LatentLink::TrajectoryAtDropout, e, 20.0)[0] ==
        doctest::Approx(1.05).epsilon(1e-12));
  CHECK_THROWS_AS(latent_link(LatentLink::TrajectoryAtDropout, e),
                  std::invalid_argument);
}

namespace {

double oracle_invgamma_logpdf(double x, double a, double b) {
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

TrialData tiny_trial(std::vector<SubjectRecord> subjects) {
  TrialData d;
  d.subjects = std::move(subjects);
  d.study_end_week = 156.0;
  d.n_treatments = 3;
  return d;
}

}  // namespace

TEST_CASE("log prior fixtures") {
  PriorSpec priors;  // defaults

  SUBCASE("inverse-gamma term at 1 matches the closed form") {
    CHECK(inverse_gamma_logpdf(1.0, 0.01, 0.01) ==
          doctest::Approx(0.01 * std::log(0.01) - std::lgamma(0.01) - 0.01)
              .epsilon(1e-13));
    CHECK(inverse_gamma_logpdf(1.0, 0.01, 0.01) ==
          doctest::Approx(oracle_invgamma_logpdf(1.0, 0.01, 0.01)));
  }
  SUBCASE("a zero coefficient contributes the normal mode at variance 1000") {
    Hyperparams h = basic_hyper(LatentLink::Separate);
    const TrialData empty = tiny_trial({});
    const double base = log_prior({}, h, empty, LatentLink::Separate, priors);
    Hyperparams h2 = h;
    h2.gamma_alpha[1] = 1000.0;  // replace a zero gamma with a distant one
    const double moved =
        log_prior({}, h2, empty, LatentLink::Separate, priors);
    const double mode_term = -0.5 * std::log(2.0 * M_PI * 1000.0);
    const double distant_term = mode_term - 1000.0 * 1000.0 / (2.0 * 1000.0);
    CHECK(base - moved == doctest::Approx(mode_term - distant_term));
  }
  SUBCASE("subject at its treatment means adds four mode terms") {
    Hyperparams h = basic_hyper(LatentLink::Separate);
    h.gamma_alpha << 1.4, 0.2, -0.1;
    h.gamma_beta1 << -0.04, 0.01, 0.0;
    h.gamma_beta2 << 0.002, 0.0, 0.0;
    h.gamma_kappa << 12.0, 1.0, -1.0;
    h.sigma2_alpha = 0.25;
    h.sigma2_beta1 = 1e-4;
    h.sigma2_beta2 = 1e-5;
    h.sigma2_kappa = 9.0;
    const std::vector<double> x = {1.0, 0.0};
    SubjectEffects e;
    e.alpha_baseline = 1.4 + 0.2;
    e.beta1 = -0.04 + 0.01;
    e.beta2 = 0.002;
    e.kappa = 13.0;
    auto subj = make_subject("a", x, {}, {50, false}, {50, false});
    const TrialData with = tiny_trial({subj});
    const TrialData without = tiny_trial({});
    const double diff =
        log_prior({e}, h, with, LatentLink::Separate, priors) -
        log_prior({}, h, without, LatentLink::Separate, priors);
    const double expected = -0.5 * std::log(2.0 * M_PI * 0.25) -
                            0.5 * std::log(2.0 * M_PI * 1e-4) -
                            0.5 * std::log(2.0 * M_PI * 1e-5) -
                            0.5 * std::log(2.0 * M_PI * 9.0);
    CHECK(diff == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("non-positive variances are rejected") {
    Hyperparams h = basic_hyper(LatentLink::Separate);
    h.sigma2_kappa = 0.0;
    CHECK_THROWS_AS(log_prior({}, h, tiny_trial({}), LatentLink::Separate,
                              priors),
                    std::invalid_argument);
  }
}

namespace {

// A from-scratch evaluation of the whole augmented posterior for a
// two-subject fixture; shares nothing with the library path except the
// fixture values.
double brute_force_posterior(const TrialData& data,
                             const std::vector<SubjectEffects>& eff,
                             const Hyperparams& h, const PriorSpec& pr) {
  auto npdf = oracle_normal_logpdf;
  double lp = 0.0;
  for (int i = 0; i < data.n_subjects(); ++i) {
    const auto& s = data.subjects[i];
    const auto& e = eff[i];
    for (int j = 0; j < s.n_visits(); ++j) {
      lp += npdf(s.log_score[j],
                 oracle_trajectory(e.alpha_baseline, e.beta1, e.beta2,
                                   e.kappa, s.visit_weeks[j]),
                 h.sigma2_resid);
    }
    for (int k = 0; k < kNumRisks; ++k) {
      const double theta = h.phi[k][0] + h.phi[k][1] * s.dummies[0] +
                           h.phi[k][2] * s.dummies[1] +
                           h.omega[k][0] * e.alpha_baseline +
                           h.omega[k][1] * e.beta1 + h.omega[k][2] * e.beta2;
      const double vs2 = h.varsigma2[k][0];
      if (s.dropout[k].observed) {
        lp += -std::log(s.dropout[k].time_weeks) +
              npdf(std::log(s.dropout[k].time_weeks), theta, vs2);
      } else {
        lp += npdf(std::log(e.imputed_dropout[k]), theta, vs2);
      }
    }
    const double mu_a = h.gamma_alpha[0] + h.gamma_alpha[1] * s.dummies[0] +
                        h.gamma_alpha[2] * s.dummies[1];
    const double mu_b1 = h.gamma_beta1[0] + h.gamma_beta1[1] * s.dummies[0] +
                         h.gamma_beta1[2] * s.dummies[1];
    const double mu_b2 = h.gamma_beta2[0] + h.gamma_beta2[1] * s.dummies[0] +
                         h.gamma_beta2[2] * s.dummies[1];
    const double mu_k = h.gamma_kappa[0] + h.gamma_kappa[1] * s.dummies[0] +
                        h.gamma_kappa[2] * s.dummies[1];
    lp += npdf(e.alpha_baseline, mu_a, h.sigma2_alpha) +
          npdf(e.beta1, mu_b1, h.sigma2_beta1) +
          npdf(e.beta2, mu_b2, h.sigma2_beta2) +
          npdf(e.kappa, mu_k, h.sigma2_kappa);
  }
  for (int j = 0; j < 3; ++j) {
    lp += npdf(h.gamma_alpha[j], pr.gamma_mean, pr.gamma_var);
    lp += npdf(h.gamma_beta1[j], pr.gamma_mean, pr.gamma_var);
    lp += npdf(h.gamma_beta2[j], pr.gamma_mean, pr.gamma_var);
    lp += npdf(h.gamma_kappa[j], pr.gamma_kappa_mean, pr.gamma_kappa_var);
    for (int k = 0; k < kNumRisks; ++k)
      lp += npdf(h.phi[k][j], pr.phi_mean, pr.phi_var);
  }
  for (int k = 0; k < kNumRisks; ++k) {
    for (int j = 0; j < 3; ++j)
      lp += npdf(h.omega[k][j], pr.omega_mean, pr.omega_var);
    lp += oracle_invgamma_logpdf(h.varsigma2[k][0], pr.variance_shape,
                                 pr.variance_rate);
  }
  for (double v : {h.sigma2_resid, h.sigma2_alpha, h.sigma2_beta1,
                   h.sigma2_beta2, h.sigma2_kappa}) {
    lp += oracle_invgamma_logpdf(v, pr.variance_shape, pr.variance_rate);
  }
  return lp;
}

}  // namespace

TEST_CASE("joint log posterior") {
  PriorSpec priors;
  priors.pooled_dropout_variance = true;

  Hyperparams h = basic_hyper(LatentLink::AllShared);
  h.gamma_alpha << 1.4, 0.1, -0.2;
  h.gamma_beta1 << -0.05, 0.01, 0.02;
  h.gamma_beta2 << 0.001, 0.002, -0.001;
  h.gamma_kappa << 11.0, 2.0, -1.0;
  h.sigma2_resid = 0.04;
  h.sigma2_alpha = 0.09;
  h.sigma2_beta1 = 4e-4;
  h.sigma2_beta2 = 1e-5;
  h.sigma2_kappa = 4.0;
  h.omega[0] << 0.3, -1.0, 5.0;
  h.omega[1] << -0.2, 2.0, -8.0;

  auto s1 = make_subject("p1", {1, 0}, {{0.0, 1.69}, {8.0, 1.32}},
                         {30.0, true}, {30.0, false});
  auto s2 = make_subject("p2", {0, 0}, {{0.0, 1.75}, {8.0, 1.5}},
                         {80.0, false}, {64.0, true});
  const TrialData data = tiny_trial({s1, s2});

  SubjectEffects e1 = effects(1.65, -0.045, 0.003, 11.0);
  e1.imputed_dropout = {30.0, 44.0};
  SubjectEffects e2 = effects(1.72, -0.03, 0.001, 13.0);
  e2.imputed_dropout = {101.0, 64.0};
  const std::vector<SubjectEffects> eff = {e1, e2};

  SUBCASE("empty trial reduces to the prior") {
    const TrialData empty = tiny_trial({});
    CHECK(joint_log_posterior({}, h, empty, LatentLink::AllShared, priors) ==
          log_prior({}, h, empty, LatentLink::AllShared, priors));
  }
  SUBCASE("equals the sum of its three components") {
    double expected = log_prior(eff, h, data, LatentLink::AllShared, priors);
    for (int i = 0; i < 2; ++i) {
      expected += loglik_longitudinal(data.subjects[i], eff[i],
                                      h.sigma2_resid);
      expected += loglik_dropout(data.subjects[i], eff[i], h,
                                 LatentLink::AllShared,
                                 DropoutMode::Augmented);
    }
    CHECK(joint_log_posterior(eff, h, data, LatentLink::AllShared, priors) ==
          doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("matches a monolithic brute-force evaluation") {
    CHECK(joint_log_posterior(eff, h, data, LatentLink::AllShared, priors) ==
          doctest::Approx(brute_force_posterior(data, eff, h, priors))
              .epsilon(1e-12));
  }
  SUBCASE("likelihood is additive over disjoint subject sets") {
    const TrialData only1 = tiny_trial({s1});
    const TrialData only2 = tiny_trial({s2});
    const double lik_union =
        joint_log_posterior(eff, h, data, LatentLink::AllShared, priors) -
        log_prior(eff, h, data, LatentLink::AllShared, priors);
    const double lik_1 =
        joint_log_posterior({e1}, h, only1, LatentLink::AllShared, priors) -
        log_prior({e1}, h, only1, LatentLink::AllShared, priors);
    const double lik_2 =
        joint_log_posterior({e2}, h, only2, LatentLink::AllShared, priors) -
        log_prior({e2}, h, only2, LatentLink::AllShared, priors);
    CHECK(lik_union == doctest::Approx(lik_1 + lik_2).epsilon(1e-12));
  }
}
