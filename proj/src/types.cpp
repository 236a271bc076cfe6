#include "dasjoint/types.hpp"

#include <cmath>

namespace dasjoint {

int latent_dim(LatentLink link) {
  switch (link) {
    case LatentLink::Separate:
      return 0;
    case LatentLink::TrajectoryAtDropout:
    case LatentLink::Baseline:
    case LatentLink::PreSlope:
    case LatentLink::PostSlope:
      return 1;
    case LatentLink::AllShared:
      return 3;
  }
  throw std::invalid_argument("unknown latent link");
}

LatentLink latent_link_from_index(int index) {
  if (index < 1 || index > 6) {
    throw ConfigError("model variant must be in 1..6, got " +
                      std::to_string(index));
  }
  return static_cast<LatentLink>(index);
}

std::string latent_link_name(LatentLink link) {
  switch (link) {
    case LatentLink::Separate:
      return "separate";
    case LatentLink::TrajectoryAtDropout:
      return "trajectory_at_dropout";
    case LatentLink::Baseline:
      return "baseline";
    case LatentLink::PreSlope:
      return "pre_slope";
    case LatentLink::PostSlope:
      return "post_slope";
    case LatentLink::AllShared:
      return "all_shared";
  }
  return "unknown";
}

int SubjectRecord::group() const {
  for (std::size_t j = 0; j < dummies.size(); ++j) {
    if (dummies[j] != 0.0) return static_cast<int>(j) + 1;
  }
  return 0;
}

void TrialData::validate() const {
  if (n_treatments < 1) throw SchemaError("n_treatments must be >= 1");
  if (!(study_end_week > 0.0)) throw SchemaError("study_end_week must be > 0");
  const int m = n_dummies();
  for (const auto& s : subjects) {
    const std::string where = "subject '" + s.id + "': ";
    if (static_cast<int>(s.dummies.size()) != m) {
      throw SchemaError(where + "expected " + std::to_string(m) +
                        " treatment dummies");
    }
    int set = 0;
    for (double d : s.dummies) {
      if (d != 0.0 && d != 1.0)
        throw SchemaError(where + "treatment dummies must be 0 or 1");
      set += d != 0.0;
    }
    if (set > 1)
      throw SchemaError(where + "more than one treatment dummy set");
    if (s.visit_weeks.size() != s.log_score.size() ||
        s.visit_weeks.size() != s.das28.size()) {
      throw SchemaError(where + "visit fields have mismatched lengths");
    }
    double prev = -1.0;
    for (std::size_t j = 0; j < s.visit_weeks.size(); ++j) {
      const double w = s.visit_weeks[j];
      if (!(w >= 0.0) || w > study_end_week)
        throw SchemaError(where + "visit week outside [0, study_end_week]");
      if (w <= prev)
        throw SchemaError(where + "visit weeks not strictly increasing");
      prev = w;
      if (!std::isfinite(s.log_score[j]))
        throw SchemaError(where + "non-finite log score");
    }
    for (int k = 0; k < kNumRisks; ++k) {
      if (!(s.dropout[k].time_weeks > 0.0))
        throw SchemaError(where + "dropout/censoring times must be > 0");
      if (s.dropout[k].observed) {
        for (double w : s.visit_weeks) {
          if (w >= s.dropout[k].time_weeks)
            throw SchemaError(where +
                              "visit at or after an observed dropout time");
        }
      }
    }
    if (s.dropout[0].observed && s.dropout[1].observed)
      throw SchemaError(where + "both competing risks marked observed");
    if (s.noninformative_exit_week &&
        !(*s.noninformative_exit_week > 0.0)) {
      throw SchemaError(where + "noninformative exit week must be > 0");
    }
  }
}

double Hyperparams::level_mean(const Eigen::VectorXd& gamma,
                               const std::vector<double>& dummies) {
  double mu = gamma[0];
  for (std::size_t j = 0; j < dummies.size(); ++j) {
    mu += gamma[static_cast<Eigen::Index>(j) + 1] * dummies[j];
  }
  return mu;
}

void PriorSpec::validate() const {
  if (!(gamma_var > 0.0) || !(gamma_kappa_var > 0.0) || !(phi_var > 0.0) ||
      !(omega_var > 0.0)) {
    throw ConfigError("prior variances must be > 0");
  }
  if (!(variance_shape > 0.0) || !(variance_rate > 0.0)) {
    throw ConfigError("inverse-gamma prior shape/rate must be > 0");
  }
}

Hyperparams make_hyperparams(int n_dummies, LatentLink link, int n_groups,
                             bool pooled_dropout_variance) {
  Hyperparams h;
  const int p = n_dummies + 1;
  h.gamma_alpha = Eigen::VectorXd::Zero(p);
  h.gamma_beta1 = Eigen::VectorXd::Zero(p);
  h.gamma_beta2 = Eigen::VectorXd::Zero(p);
  h.gamma_kappa = Eigen::VectorXd::Zero(p);
  const int q = latent_dim(link);
  const int g = pooled_dropout_variance ? 1 : n_groups;
  for (int k = 0; k < kNumRisks; ++k) {
    h.phi[k] = Eigen::VectorXd::Zero(p);
    h.omega[k] = Eigen::VectorXd::Zero(q);
    h.varsigma2[k] = Eigen::VectorXd::Ones(g);
  }
  return h;
}

}  // namespace dasjoint
