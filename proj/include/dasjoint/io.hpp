#ifndef DASJOINT_IO_HPP_
#define DASJOINT_IO_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dasjoint/datagen.hpp"
#include "dasjoint/diagnostics.hpp"
#include "dasjoint/sampler.hpp"
#include "dasjoint/types.hpp"

namespace dasjoint {

inline constexpr const char* kToolVersion = "0.1.0";

// Full round-trip decimal formatting; every numeric output re-parses to
// the identical double.
std::string format_double(double v);

std::uint64_t fnv1a_file(const std::string& path);

// Flat `key = value` files; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(const std::string& path);

// ---------------------------------------------------------------------------
// Trial data.

// Longitudinal CSV: subject_id,week,das28 — or component columns
// subject_id,week,tender28,swollen28,esr,gh_vas, composed via das28_score.
// Subjects CSV: subject_id,x1,x2,ae_week,ae_event,effy_week,effy_event,
// exit_week (exit_week may be empty). Scores are log-transformed here.
TrialData ingest(const std::string& longitudinal_path,
                 const std::string& subjects_path, double study_end_week,
                 int n_treatments = 3);

void write_trial_csv(const TrialData& data,
                     const std::string& longitudinal_path,
                     const std::string& subjects_path);

// ---------------------------------------------------------------------------
// Run configuration.

struct RunConfig {
  McmcConfig mcmc;
  std::string longitudinal_path;
  std::string subjects_path;
  std::string out_dir = ".";
  std::string variant_spec = "6";  // "1".."6" or "all"
  double study_end_week = 156.0;
  bool emit_draws = false;
  bool emit_effect_draws = false;
  bool emit_summaries = true;
  bool emit_curves = true;
  bool emit_disposition = false;
  std::vector<double> curve_grid;  // empty -> every 4 weeks

  std::vector<LatentLink> variants() const;
  std::vector<double> resolved_grid() const;
};

RunConfig parse_run_config(const std::string& path);
RunConfig run_config_from_kv(const KeyValues& kv);
KeyValues run_config_to_kv(const RunConfig& cfg);

GenConfig parse_gen_config(const std::string& path);
GenConfig gen_config_from_kv(const KeyValues& kv);
KeyValues gen_config_to_kv(const GenConfig& gen);

// ---------------------------------------------------------------------------
// Result emission. All tables are plain CSV with documented headers.

void write_disposition_csv(const std::vector<DispositionRow>& rows,
                           const std::string& path);

void write_summary_csv(const PosteriorSummary& summary,
                       const std::string& path);

struct DicTableEntry {
  int variant = 0;
  DicResult result;
};

// Sorted ascending by DIC (ties keep variant order); the minimum is
// marked preferred and exact ties with it are flagged.
void write_dic_csv(std::vector<DicTableEntry> entries,
                   const std::string& path);

struct LabeledCurves {
  std::string model_label;
  int arm = 0;
  bool dashed = false;
  std::vector<CurvePoint> points;
};

void write_curves_csv(const std::vector<LabeledCurves>& curves,
                      const std::string& path);

// Minimal static SVG: one polyline per (model, arm), dashed strokes for
// joint-model curves.
void write_curves_svg(const std::vector<LabeledCurves>& curves,
                      const std::string& title, const std::string& path);

void write_draws_csv(const ChainOutput& chain, const std::string& path,
                     bool include_effects);

struct DrawsTable {
  std::vector<std::string> columns;            // excludes "iteration"
  std::vector<std::vector<double>> series;     // per column
};
DrawsTable read_draws_csv(const std::string& path);

// The manifest echoes the resolved configuration plus input checksums and
// is itself parseable as a run configuration.
void write_manifest(const KeyValues& entries, const std::string& path);

}  // namespace dasjoint

#endif  // DASJOINT_IO_HPP_
