#ifndef DASJOINT_DATAGEN_HPP_
#define DASJOINT_DATAGEN_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dasjoint/rng.hpp"
#include "dasjoint/types.hpp"

namespace dasjoint {

struct GenConfig {
  std::vector<int> n_per_arm;        // one entry per treatment group
  std::vector<double> visit_weeks;   // strictly increasing from 0
  Hyperparams truth;
  LatentLink variant = LatentLink::AllShared;
  double study_end_week = 156.0;
  // Weekly probability of an administrative/other exit, independent of
  // the disease process.
  double noninformative_weekly_hazard = 0.0;

  int n_treatments() const { return static_cast<int>(n_per_arm.size()); }
  void validate() const;
};

enum class ExitCause : int {
  Completed = 0,
  AdverseEvent = 1,
  Inefficacy = 2,
  Noninformative = 3,
};

struct GroundTruth {
  std::vector<SubjectEffects> effects;
  std::vector<std::array<double, kNumRisks>> latent_dropout;
  std::vector<ExitCause> cause;
  // Fixed-point rounds that failed to converge (trajectory link only).
  int fixed_point_failures = 0;
};

// Observable record for one subject given its latent effects: latent
// lognormal times per risk, earliest one realized if it beats the
// administrative horizon and any noninformative exit, visits strictly
// before the exit (completers keep the full schedule), scores with
// residual noise.
SubjectRecord simulate_subject_record(const SubjectEffects& effects,
                                      const GenConfig& gen,
                                      const std::vector<double>& dummies,
                                      RngStream& rng,
                                      std::array<double, kNumRisks>* latent,
                                      ExitCause* cause, int* fp_failures);

std::pair<TrialData, GroundTruth> simulate_trial(const GenConfig& gen,
                                                 std::uint64_t seed);

struct DispositionRow {
  std::string label;  // per-arm label or "total"
  int n = 0;
  int completed = 0;
  int adverse_event = 0;
  int inefficacy = 0;
  int other = 0;  // administrative + other noninformative exits
  double pct_completed = 0.0;
  double pct_adverse_event = 0.0;
  double pct_inefficacy = 0.0;
  double pct_other = 0.0;
};

// Exit-cause counts and percentages per arm plus a pooled row; the cause
// is read off the censoring pattern of the record itself.
std::vector<DispositionRow> disposition_table(const TrialData& data);

// Simulation setup calibrated so the realized disposition pattern matches
// a three-arm trial with heavy early dropout: roughly 48% completion,
// 22% adverse-event exits and 14% inefficacy exits overall, with
// inefficacy highest on arm 1 and lowest on arm 0.
GenConfig example_gen_config();

}  // namespace dasjoint

#endif  // DASJOINT_DATAGEN_HPP_
