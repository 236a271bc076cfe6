#include "dasjoint/datagen.hpp"

#include <cmath>
#include <limits>

#include "dasjoint/model.hpp"

namespace dasjoint {

void GenConfig::validate() const {
  if (n_per_arm.empty()) throw ConfigError("n_per_arm must be nonempty");
  for (int n : n_per_arm) {
    if (n < 0) throw ConfigError("n_per_arm entries must be >= 0");
  }
  if (!(study_end_week > 0.0))
    throw ConfigError("study_end_week must be > 0");
  double prev = -1.0;
  for (double w : visit_weeks) {
    if (!(w >= 0.0) || w > study_end_week)
      throw ConfigError("visit weeks must lie in [0, study_end_week]");
    if (w <= prev) throw ConfigError("visit weeks must strictly increase");
    prev = w;
  }
  if (!(noninformative_weekly_hazard >= 0.0 &&
        noninformative_weekly_hazard < 1.0)) {
    throw ConfigError("noninformative_weekly_hazard must be in [0,1)");
  }
  const int p = n_treatments();
  auto check_len = [&](const Eigen::VectorXd& v, const char* what) {
    if (static_cast<int>(v.size()) != p)
      throw ConfigError(std::string(what) + " must have one entry per arm");
  };
  check_len(truth.gamma_alpha, "gamma_alpha");
  check_len(truth.gamma_beta1, "gamma_beta1");
  check_len(truth.gamma_beta2, "gamma_beta2");
  check_len(truth.gamma_kappa, "gamma_kappa");
  if (!(truth.sigma2_resid > 0.0) || !(truth.sigma2_alpha > 0.0) ||
      !(truth.sigma2_beta1 > 0.0) || !(truth.sigma2_beta2 > 0.0) ||
      !(truth.sigma2_kappa > 0.0)) {
    throw ConfigError("all true variances must be > 0");
  }
  for (int k = 0; k < kNumRisks; ++k) {
    check_len(truth.phi[k], "phi");
    if (static_cast<int>(truth.omega[k].size()) != latent_dim(variant))
      throw ConfigError("omega length must match the latent link dimension");
    const auto vs = truth.varsigma2[k].size();
    if (vs != 1 && static_cast<int>(vs) != p)
      throw ConfigError("varsigma2 must be pooled or one entry per arm");
    for (Eigen::Index g = 0; g < vs; ++g) {
      if (!(truth.varsigma2[k][g] > 0.0))
        throw ConfigError("varsigma2 entries must be > 0");
    }
  }
}

SubjectRecord simulate_subject_record(const SubjectEffects& effects,
                                      const GenConfig& gen,
                                      const std::vector<double>& dummies,
                                      RngStream& rng,
                                      std::array<double, kNumRisks>* latent,
                                      ExitCause* cause, int* fp_failures) {
  const Hyperparams& h = gen.truth;
  SubjectRecord s;
  s.dummies = dummies;
  const int g = s.group();

  // Latent event time per risk.
  std::array<double, kNumRisks> d{};
  for (int k = 0; k < kNumRisks; ++k) {
    const double lin = Hyperparams::level_mean(h.phi[k], dummies);
    const double sd = std::sqrt(h.varsigma2_for(static_cast<Risk>(k), g));
    const double z = rng.normal();
    if (gen.variant != LatentLink::TrajectoryAtDropout) {
      const double theta =
          lin + h.omega[k].dot(latent_link(gen.variant, effects));
      d[k] = std::exp(theta + sd * z);
    } else {
      // The predictor needs the trajectory at the very time being drawn;
      // iterate the map to its fixed point with the noise held fixed.
      double t = std::exp(lin);
      bool converged = false;
      for (int round = 0; round < 50; ++round) {
        const double theta =
            lin + h.omega[k][0] * eval_trajectory(effects, t);
        const double t_next = std::exp(theta + sd * z);
        if (std::fabs(std::log(t_next) - std::log(t)) < 1e-8) {
          t = t_next;
          converged = true;
          break;
        }
        t = t_next;
      }
      if (!converged && fp_failures != nullptr) ++(*fp_failures);
      d[k] = t;
    }
  }
  if (latent != nullptr) *latent = d;

  double exit_noninf = std::numeric_limits<double>::infinity();
  if (gen.noninformative_weekly_hazard > 0.0) {
    const double rate = -std::log1p(-gen.noninformative_weekly_hazard);
    exit_noninf = -std::log(rng.uniform()) / rate;
  }

  const double t_min = std::min(d[0], d[1]);
  double exit_week;
  ExitCause realized;
  if (t_min < std::min(gen.study_end_week, exit_noninf)) {
    const int k_star = d[0] <= d[1] ? 0 : 1;
    s.dropout[k_star] = {t_min, true};
    s.dropout[1 - k_star] = {t_min, false};
    exit_week = t_min;
    realized = k_star == 0 ? ExitCause::AdverseEvent : ExitCause::Inefficacy;
  } else if (exit_noninf < gen.study_end_week) {
    s.dropout[0] = {exit_noninf, false};
    s.dropout[1] = {exit_noninf, false};
    s.noninformative_exit_week = exit_noninf;
    exit_week = exit_noninf;
    realized = ExitCause::Noninformative;
  } else {
    s.dropout[0] = {gen.study_end_week, false};
    s.dropout[1] = {gen.study_end_week, false};
    exit_week = gen.study_end_week;
    realized = ExitCause::Completed;
  }
  if (cause != nullptr) *cause = realized;

  const double resid_sd = std::sqrt(h.sigma2_resid);
  for (double w : gen.visit_weeks) {
    // Dropout cuts the schedule strictly before the exit; completers
    // attend through the administrative horizon.
    const bool attended = realized == ExitCause::Completed
                              ? w <= gen.study_end_week
                              : w < exit_week;
    if (!attended) continue;
    const double score =
        std::exp(eval_trajectory(effects, w) + resid_sd * rng.normal());
    s.visit_weeks.push_back(w);
    s.das28.push_back(score);
    s.log_score.push_back(std::log(score));
  }
  return s;
}

std::pair<TrialData, GroundTruth> simulate_trial(const GenConfig& gen,
                                                 std::uint64_t seed) {
  gen.validate();
  TrialData data;
  data.study_end_week = gen.study_end_week;
  data.n_treatments = gen.n_treatments();
  GroundTruth truth;
  const Hyperparams& h = gen.truth;

  int sid = 0;
  for (int arm = 0; arm < gen.n_treatments(); ++arm) {
    std::vector<double> dummies(gen.n_treatments() - 1, 0.0);
    if (arm > 0) dummies[arm - 1] = 1.0;
    for (int rep = 0; rep < gen.n_per_arm[arm]; ++rep, ++sid) {
      RngStream rng(seed, {0xDA7AULL, static_cast<std::uint64_t>(sid)});
      SubjectEffects e;
      e.alpha_baseline = Hyperparams::level_mean(h.gamma_alpha, dummies) +
                         std::sqrt(h.sigma2_alpha) * rng.normal();
      e.beta1 = Hyperparams::level_mean(h.gamma_beta1, dummies) +
                std::sqrt(h.sigma2_beta1) * rng.normal();
      e.beta2 = Hyperparams::level_mean(h.gamma_beta2, dummies) +
                std::sqrt(h.sigma2_beta2) * rng.normal();
      e.kappa = Hyperparams::level_mean(h.gamma_kappa, dummies) +
                std::sqrt(h.sigma2_kappa) * rng.normal();

      std::array<double, kNumRisks> latent{};
      ExitCause cause;
      SubjectRecord s =
          simulate_subject_record(e, gen, dummies, rng, &latent, &cause,
                                  &truth.fixed_point_failures);
      s.id = "s" + std::to_string(sid + 1);
      e.imputed_dropout = latent;  // true augmented values, handy downstream
      data.subjects.push_back(std::move(s));
      truth.effects.push_back(e);
      truth.latent_dropout.push_back(latent);
      truth.cause.push_back(cause);
    }
  }
  data.validate();
  return {std::move(data), std::move(truth)};
}

std::vector<DispositionRow> disposition_table(const TrialData& data) {
  const int arms = data.n_treatments;
  std::vector<DispositionRow> rows(arms + 1);
  for (int a = 0; a < arms; ++a) rows[a].label = "arm" + std::to_string(a);
  rows[arms].label = "total";

  for (const auto& s : data.subjects) {
    ExitCause cause = ExitCause::Completed;
    if (s.dropout[0].observed) {
      cause = ExitCause::AdverseEvent;
    } else if (s.dropout[1].observed) {
      cause = ExitCause::Inefficacy;
    } else if (s.noninformative_exit_week &&
               *s.noninformative_exit_week < data.study_end_week) {
      cause = ExitCause::Noninformative;
    }
    for (int r : {s.group(), arms}) {
      DispositionRow& row = rows[r];
      ++row.n;
      switch (cause) {
        case ExitCause::Completed:
          ++row.completed;
          break;
        case ExitCause::AdverseEvent:
          ++row.adverse_event;
          break;
        case ExitCause::Inefficacy:
          ++row.inefficacy;
          break;
        case ExitCause::Noninformative:
          ++row.other;
          break;
      }
    }
  }
  for (auto& row : rows) {
    if (row.n == 0) continue;
    const double scale = 100.0 / row.n;
    row.pct_completed = scale * row.completed;
    row.pct_adverse_event = scale * row.adverse_event;
    row.pct_inefficacy = scale * row.inefficacy;
    row.pct_other = scale * row.other;
  }
  return rows;
}

GenConfig example_gen_config() {
  GenConfig gen;
  // Arm 0 is the reference (combination) arm; arms 1 and 2 are the two
  // monotherapies.
  gen.n_per_arm = {231, 228, 223};
  gen.visit_weeks = {0,  2,  4,  8,  12, 16,  24,  32,  44,
                     56, 68, 80, 92, 104, 116, 128, 140, 156};
  gen.variant = LatentLink::AllShared;
  gen.study_end_week = 156.0;
  gen.noninformative_weekly_hazard = 0.00147;

  Hyperparams& h = gen.truth;
  h = make_hyperparams(2, gen.variant, 3, false);
  h.gamma_alpha << 1.80, 0.0, 0.0;
  h.gamma_beta1 << -0.055, 0.020, 0.010;
  h.gamma_beta2 << -0.001, 0.003, 0.002;
  h.gamma_kappa << 12.0, 0.0, 0.0;
  h.sigma2_resid = 0.030;
  h.sigma2_alpha = 0.090;
  h.sigma2_beta1 = 4.0e-4;
  h.sigma2_beta2 = 2.5e-5;
  h.sigma2_kappa = 9.0;
  // Higher activity and steeper late worsening shorten the latent times.
  h.omega[0] << -0.30, -2.0, -20.0;
  h.omega[1] << -0.60, -4.0, -60.0;
  h.phi[0] << 6.30, -0.25, -0.03;  // adverse events, similar across arms
  h.phi[1] << 7.47, -0.55, -0.58;  // inefficacy, worst on arm 1
  h.varsigma2[0].setConstant(1.3);
  h.varsigma2[1].setConstant(1.3);
  return gen;
}

}  // namespace dasjoint
