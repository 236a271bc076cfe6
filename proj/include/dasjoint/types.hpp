#ifndef DASJOINT_TYPES_HPP_
#define DASJOINT_TYPES_HPP_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dasjoint {

// Error classes map onto distinct CLI exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Competing exit risks: an adverse event or inefficacious treatment.
enum class Risk : int { AdverseEvent = 0, Inefficacy = 1 };
inline constexpr int kNumRisks = 2;

// Which subject-level latent quantity couples the score trajectory to the
// dropout times.
enum class LatentLink : int {
  Separate = 1,            // no coupling
  TrajectoryAtDropout = 2, // trajectory value at the dropout time
  Baseline = 3,            // intercept
  PreSlope = 4,            // slope before the change point
  PostSlope = 5,           // slope after the change point
  AllShared = 6,           // (intercept, both slopes)
};

int latent_dim(LatentLink link);
LatentLink latent_link_from_index(int index);  // 1..6
std::string latent_link_name(LatentLink link);

// One risk's observation: an event time if observed, else the censoring
// time.
struct DropoutObs {
  double time_weeks = 0.0;
  bool observed = false;
};

struct SubjectRecord {
  std::string id;
  std::vector<double> dummies;  // treatment dummies, at most one set
  std::vector<double> visit_weeks;
  std::vector<double> das28;      // raw composite score
  std::vector<double> log_score;  // log(das28), the modeling scale
  std::array<DropoutObs, kNumRisks> dropout{};
  std::optional<double> noninformative_exit_week;

  int n_visits() const { return static_cast<int>(visit_weeks.size()); }
  // 0 for the reference arm, 1 + j when dummy j is set.
  int group() const;
};

struct TrialData {
  std::vector<SubjectRecord> subjects;
  double study_end_week = 156.0;
  int n_treatments = 3;

  int n_subjects() const { return static_cast<int>(subjects.size()); }
  int n_dummies() const { return n_treatments - 1; }
  // Throws SchemaError on any structural violation.
  void validate() const;
};

// Subject-level latent state. alpha_baseline is the log-score at week 0;
// the trajectory is parameterized so the two segments meet at kappa.
struct SubjectEffects {
  double alpha_baseline = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double kappa = 0.0;
  // Augmented log-scale-free times for censored risks; ignored where the
  // event was observed.
  std::array<double, kNumRisks> imputed_dropout{0.0, 0.0};
};

// Population-level parameters. Coefficient vectors have length
// n_dummies + 1 with the intercept first. varsigma2[k] has one entry per
// treatment group, or a single pooled entry.
struct Hyperparams {
  Eigen::VectorXd gamma_alpha, gamma_beta1, gamma_beta2, gamma_kappa;
  double sigma2_resid = 1.0;
  double sigma2_alpha = 1.0, sigma2_beta1 = 1.0, sigma2_beta2 = 1.0,
         sigma2_kappa = 1.0;
  std::array<Eigen::VectorXd, kNumRisks> phi;
  std::array<Eigen::VectorXd, kNumRisks> omega;  // length latent_dim(link)
  std::array<Eigen::VectorXd, kNumRisks> varsigma2;

  double varsigma2_for(Risk k, int group) const {
    const Eigen::VectorXd& v = varsigma2[static_cast<int>(k)];
    return v.size() == 1 ? v[0] : v[group];
  }
  // Linear predictor of the subject-level mean at one level, [1, x] basis.
  static double level_mean(const Eigen::VectorXd& gamma,
                           const std::vector<double>& dummies);
};

// Hyper-prior settings. Defaults are deliberately vague; tests that need
// proper moments override them.
struct PriorSpec {
  double gamma_mean = 0.0;
  double gamma_var = 1000.0;
  // The change-point level is centered where a change point is plausible
  // rather than at zero.
  double gamma_kappa_mean = 12.0;
  double gamma_kappa_var = 100.0;
  double phi_mean = 0.0;
  double phi_var = 1000.0;
  double omega_mean = 0.0;
  double omega_var = 1000.0;
  double variance_shape = 0.01;  // inverse-gamma, all variance parameters
  double variance_rate = 0.01;
  // One dropout variance per risk instead of per risk per treatment group.
  bool pooled_dropout_variance = false;

  void validate() const;
};

Hyperparams make_hyperparams(int n_dummies, LatentLink link, int n_groups,
                             bool pooled_dropout_variance);

}  // namespace dasjoint

#endif  // DASJOINT_TYPES_HPP_
