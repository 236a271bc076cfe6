#include "dasjoint/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dasjoint/model.hpp"

namespace dasjoint {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (s.empty()) throw SchemaError(where + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw SchemaError(where + ": cannot parse number '" + s + "'");
  return v;
}

long parse_long(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw SchemaError(where + ": cannot parse integer '" + s + "'");
  return v;
}

bool parse_bool(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(where + ": cannot parse boolean '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& raw,
                                      const std::string& where) {
  std::vector<double> out;
  for (const auto& tok : split(raw, ',')) {
    if (trim(tok).empty()) continue;
    out.push_back(parse_double(tok, where));
  }
  return out;
}

Eigen::VectorXd parse_vector(const std::string& raw,
                             const std::string& where) {
  const std::vector<double> v = parse_double_list(raw, where);
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (j > 0) out += ",";
    out += format_double(v[j]);
  }
  return out;
}

std::string join_vector(const Eigen::VectorXd& v) {
  return join_doubles(std::vector<double>(v.data(), v.data() + v.size()));
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input file '" + path + "'");
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file for hashing: '" + path + "'");
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in = open_input(path);
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + " line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(path + " line " + std::to_string(line_no) +
                        ": empty key");
    }
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

// ---------------------------------------------------------------------------
// Trial data.

TrialData ingest(const std::string& longitudinal_path,
                 const std::string& subjects_path, double study_end_week,
                 int n_treatments) {
  TrialData data;
  data.study_end_week = study_end_week;
  data.n_treatments = n_treatments;
  if (n_treatments != 3) {
    throw SchemaError("the subjects schema carries two treatment dummies "
                      "(three arms)");
  }

  std::map<std::string, int> index_by_id;
  {
    std::ifstream in = open_input(subjects_path);
    std::string line;
    int row = 0;
    if (!std::getline(in, line)) {
      throw SchemaError(subjects_path + ": empty file");
    }
    ++row;
    const std::string expected =
        "subject_id,x1,x2,ae_week,ae_event,effy_week,effy_event,exit_week";
    if (trim(line) != expected) {
      throw SchemaError(subjects_path + ": header must be '" + expected +
                        "'");
    }
    while (std::getline(in, line)) {
      ++row;
      if (trim(line).empty()) continue;
      const std::string where =
          subjects_path + " row " + std::to_string(row);
      const auto f = split(line, ',');
      if (f.size() != 8) {
        throw SchemaError(where + ": expected 8 fields, got " +
                          std::to_string(f.size()));
      }
      SubjectRecord s;
      s.id = trim(f[0]);
      if (s.id.empty()) throw SchemaError(where + ": empty subject_id");
      if (index_by_id.count(s.id)) {
        throw SchemaError(where + ": duplicate subject_id '" + s.id + "'");
      }
      s.dummies = {parse_double(f[1], where), parse_double(f[2], where)};
      for (double d : s.dummies) {
        if (d != 0.0 && d != 1.0)
          throw SchemaError(where + ": treatment dummies must be 0 or 1");
      }
      if (s.dummies[0] == 1.0 && s.dummies[1] == 1.0) {
        throw SchemaError(where + ": both treatment dummies set");
      }
      for (int k = 0; k < kNumRisks; ++k) {
        const double t = parse_double(f[3 + 2 * k], where);
        const long ev = parse_long(f[4 + 2 * k], where);
        if (!(t > 0.0))
          throw SchemaError(where + ": dropout/censoring time must be > 0");
        if (ev != 0 && ev != 1)
          throw SchemaError(where + ": event flag must be 0 or 1");
        s.dropout[k] = {t, ev == 1};
      }
      if (s.dropout[0].observed && s.dropout[1].observed) {
        throw SchemaError(where + ": both competing risks marked observed");
      }
      if (!trim(f[7]).empty()) {
        const double w = parse_double(f[7], where);
        if (!(w > 0.0)) throw SchemaError(where + ": exit_week must be > 0");
        s.noninformative_exit_week = w;
      }
      index_by_id[s.id] = data.n_subjects();
      data.subjects.push_back(std::move(s));
    }
  }

  {
    std::ifstream in = open_input(longitudinal_path);
    std::string line;
    int row = 0;
    if (!std::getline(in, line)) {
      throw SchemaError(longitudinal_path + ": empty file");
    }
    ++row;
    const std::string header = trim(line);
    bool composite;
    if (header == "subject_id,week,das28") {
      composite = true;
    } else if (header ==
               "subject_id,week,tender28,swollen28,esr,gh_vas") {
      composite = false;
    } else {
      throw SchemaError(longitudinal_path +
                        ": header must be 'subject_id,week,das28' or "
                        "'subject_id,week,tender28,swollen28,esr,gh_vas'");
    }
    while (std::getline(in, line)) {
      ++row;
      if (trim(line).empty()) continue;
      const std::string where =
          longitudinal_path + " row " + std::to_string(row);
      const auto f = split(line, ',');
      const std::size_t expected_fields = composite ? 3 : 6;
      if (f.size() != expected_fields) {
        throw SchemaError(where + ": expected " +
                          std::to_string(expected_fields) + " fields, got " +
                          std::to_string(f.size()));
      }
      const std::string id = trim(f[0]);
      const auto it = index_by_id.find(id);
      if (it == index_by_id.end()) {
        throw SchemaError(where + ": unknown subject '" + id + "'");
      }
      SubjectRecord& s = data.subjects[it->second];
      const double week = parse_double(f[1], where);
      if (!(week >= 0.0) || week > study_end_week) {
        throw SchemaError(where + ": week outside [0, study_end_week]");
      }
      if (!s.visit_weeks.empty() && week <= s.visit_weeks.back()) {
        throw SchemaError(where + ": visit weeks not strictly increasing");
      }
      for (int k = 0; k < kNumRisks; ++k) {
        if (s.dropout[k].observed && week >= s.dropout[k].time_weeks) {
          throw SchemaError(where + ": visit at or after subject '" + id +
                            "' informative dropout");
        }
      }
      double score;
      if (composite) {
        score = parse_double(f[2], where);
        if (!(score > 0.0)) {
          throw SchemaError(where + ": das28 must be > 0 (log scale)");
        }
      } else {
        try {
          score = das28_score(parse_double(f[2], where),
                              parse_double(f[3], where),
                              parse_double(f[4], where),
                              parse_double(f[5], where));
        } catch (const std::domain_error& e) {
          throw SchemaError(where + ": " + e.what());
        }
      }
      s.visit_weeks.push_back(week);
      s.das28.push_back(score);
      s.log_score.push_back(std::log(score));
    }
  }
  data.validate();
  return data;
}

void write_trial_csv(const TrialData& data,
                     const std::string& longitudinal_path,
                     const std::string& subjects_path) {
  {
    std::ofstream out = open_output(subjects_path);
    out << "subject_id,x1,x2,ae_week,ae_event,effy_week,effy_event,"
           "exit_week\n";
    for (const auto& s : data.subjects) {
      out << s.id;
      for (double d : s.dummies) out << ',' << format_double(d);
      for (int k = 0; k < kNumRisks; ++k) {
        out << ',' << format_double(s.dropout[k].time_weeks) << ','
            << (s.dropout[k].observed ? 1 : 0);
      }
      out << ',';
      if (s.noninformative_exit_week)
        out << format_double(*s.noninformative_exit_week);
      out << '\n';
    }
  }
  {
    std::ofstream out = open_output(longitudinal_path);
    out << "subject_id,week,das28\n";
    for (const auto& s : data.subjects) {
      for (int j = 0; j < s.n_visits(); ++j) {
        out << s.id << ',' << format_double(s.visit_weeks[j]) << ','
            << format_double(s.das28[j]) << '\n';
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Run configuration.

std::vector<LatentLink> RunConfig::variants() const {
  std::vector<LatentLink> out;
  if (trim(variant_spec) == "all") {
    for (int v = 1; v <= 6; ++v) out.push_back(latent_link_from_index(v));
    return out;
  }
  for (const auto& tok : split(variant_spec, ',')) {
    if (trim(tok).empty()) continue;
    out.push_back(latent_link_from_index(
        static_cast<int>(parse_long(tok, "variant"))));
  }
  if (out.empty()) throw ConfigError("no model variant requested");
  return out;
}

std::vector<double> RunConfig::resolved_grid() const {
  if (!curve_grid.empty()) return curve_grid;
  std::vector<double> grid;
  for (double w = 0.0; w < study_end_week; w += 4.0) grid.push_back(w);
  grid.push_back(study_end_week);
  return grid;
}

RunConfig run_config_from_kv(const KeyValues& kv) {
  RunConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "longitudinal") {
      cfg.longitudinal_path = value;
    } else if (key == "subjects") {
      cfg.subjects_path = value;
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "variant") {
      cfg.variant_spec = value;
    } else if (key == "study_end_week") {
      cfg.study_end_week = parse_double(value, key);
    } else if (key == "iterations") {
      cfg.mcmc.iterations = static_cast<int>(parse_long(value, key));
    } else if (key == "burn_in") {
      cfg.mcmc.burn_in = static_cast<int>(parse_long(value, key));
    } else if (key == "thin") {
      cfg.mcmc.thin = static_cast<int>(parse_long(value, key));
    } else if (key == "chains") {
      cfg.mcmc.n_chains = static_cast<int>(parse_long(value, key));
    } else if (key == "seed") {
      cfg.mcmc.seed = static_cast<std::uint64_t>(parse_long(value, key));
    } else if (key == "adapt_target") {
      cfg.mcmc.adapt_target = parse_double(value, key);
    } else if (key == "adapt_window") {
      cfg.mcmc.adapt_window = static_cast<int>(parse_long(value, key));
    } else if (key == "kappa_prior_mean") {
      cfg.mcmc.priors.gamma_kappa_mean = parse_double(value, key);
    } else if (key == "kappa_prior_var") {
      cfg.mcmc.priors.gamma_kappa_var = parse_double(value, key);
    } else if (key == "pooled_dropout_variance") {
      cfg.mcmc.priors.pooled_dropout_variance = parse_bool(value, key);
    } else if (key == "pin_omega_zero") {
      cfg.mcmc.pin_omega_zero = parse_bool(value, key);
    } else if (key == "emit_draws") {
      cfg.emit_draws = parse_bool(value, key);
    } else if (key == "emit_effect_draws") {
      cfg.emit_effect_draws = parse_bool(value, key);
    } else if (key == "emit_summaries") {
      cfg.emit_summaries = parse_bool(value, key);
    } else if (key == "emit_curves") {
      cfg.emit_curves = parse_bool(value, key);
    } else if (key == "emit_disposition") {
      cfg.emit_disposition = parse_bool(value, key);
    } else if (key == "curve_grid") {
      cfg.curve_grid = parse_double_list(value, key);
    } else if (key == "tool_version" || key == "command" ||
               key == "longitudinal_fnv1a" || key == "subjects_fnv1a") {
      // manifest echo fields
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
  try {
    cfg.mcmc.validate();
    cfg.variants();
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& path) {
  return run_config_from_kv(read_key_values(path));
}

KeyValues run_config_to_kv(const RunConfig& cfg) {
  KeyValues kv;
  kv["longitudinal"] = cfg.longitudinal_path;
  kv["subjects"] = cfg.subjects_path;
  kv["out"] = cfg.out_dir;
  kv["variant"] = cfg.variant_spec;
  kv["study_end_week"] = format_double(cfg.study_end_week);
  kv["iterations"] = std::to_string(cfg.mcmc.iterations);
  kv["burn_in"] = std::to_string(cfg.mcmc.burn_in);
  kv["thin"] = std::to_string(cfg.mcmc.thin);
  kv["chains"] = std::to_string(cfg.mcmc.n_chains);
  kv["seed"] = std::to_string(cfg.mcmc.seed);
  kv["adapt_target"] = format_double(cfg.mcmc.adapt_target);
  kv["adapt_window"] = std::to_string(cfg.mcmc.adapt_window);
  kv["kappa_prior_mean"] = format_double(cfg.mcmc.priors.gamma_kappa_mean);
  kv["kappa_prior_var"] = format_double(cfg.mcmc.priors.gamma_kappa_var);
  kv["pooled_dropout_variance"] =
      cfg.mcmc.priors.pooled_dropout_variance ? "true" : "false";
  if (cfg.mcmc.pin_omega_zero) kv["pin_omega_zero"] = "true";
  kv["emit_draws"] = cfg.emit_draws ? "true" : "false";
  kv["emit_effect_draws"] = cfg.emit_effect_draws ? "true" : "false";
  kv["emit_summaries"] = cfg.emit_summaries ? "true" : "false";
  kv["emit_curves"] = cfg.emit_curves ? "true" : "false";
  kv["emit_disposition"] = cfg.emit_disposition ? "true" : "false";
  if (!cfg.curve_grid.empty()) kv["curve_grid"] = join_doubles(cfg.curve_grid);
  return kv;
}

GenConfig gen_config_from_kv(const KeyValues& kv) {
  GenConfig gen;
  if (auto it = kv.find("preset"); it != kv.end()) {
    if (it->second == "tempo_like") {
      gen = example_gen_config();
    } else {
      throw ConfigError("unknown preset '" + it->second + "'");
    }
  } else {
    gen.truth = make_hyperparams(2, gen.variant, 3, false);
  }
  // Arm count first so vector lengths can be validated downstream.
  if (auto it = kv.find("n_per_arm"); it != kv.end()) {
    gen.n_per_arm.clear();
    for (const auto& tok : split(it->second, ',')) {
      if (trim(tok).empty()) continue;
      gen.n_per_arm.push_back(
          static_cast<int>(parse_long(tok, "n_per_arm")));
    }
  }
  if (auto it = kv.find("variant"); it != kv.end()) {
    gen.variant = latent_link_from_index(
        static_cast<int>(parse_long(it->second, "variant")));
  }
  for (const auto& [key, value] : kv) {
    if (key == "preset" || key == "n_per_arm" || key == "variant" ||
        key == "tool_version" || key == "command" || key == "out" ||
        key == "seed") {
      continue;
    }
    if (key == "visit_weeks") {
      gen.visit_weeks = parse_double_list(value, key);
    } else if (key == "study_end_week") {
      gen.study_end_week = parse_double(value, key);
    } else if (key == "noninformative_weekly_hazard") {
      gen.noninformative_weekly_hazard = parse_double(value, key);
    } else if (key == "true_gamma_alpha") {
      gen.truth.gamma_alpha = parse_vector(value, key);
    } else if (key == "true_gamma_beta1") {
      gen.truth.gamma_beta1 = parse_vector(value, key);
    } else if (key == "true_gamma_beta2") {
      gen.truth.gamma_beta2 = parse_vector(value, key);
    } else if (key == "true_gamma_kappa") {
      gen.truth.gamma_kappa = parse_vector(value, key);
    } else if (key == "true_sigma2_resid") {
      gen.truth.sigma2_resid = parse_double(value, key);
    } else if (key == "true_sigma2_alpha") {
      gen.truth.sigma2_alpha = parse_double(value, key);
    } else if (key == "true_sigma2_beta1") {
      gen.truth.sigma2_beta1 = parse_double(value, key);
    } else if (key == "true_sigma2_beta2") {
      gen.truth.sigma2_beta2 = parse_double(value, key);
    } else if (key == "true_sigma2_kappa") {
      gen.truth.sigma2_kappa = parse_double(value, key);
    } else if (key == "true_phi_ae") {
      gen.truth.phi[0] = parse_vector(value, key);
    } else if (key == "true_phi_effy") {
      gen.truth.phi[1] = parse_vector(value, key);
    } else if (key == "true_omega_ae") {
      gen.truth.omega[0] = parse_vector(value, key);
    } else if (key == "true_omega_effy") {
      gen.truth.omega[1] = parse_vector(value, key);
    } else if (key == "true_varsigma2_ae") {
      gen.truth.varsigma2[0] = parse_vector(value, key);
    } else if (key == "true_varsigma2_effy") {
      gen.truth.varsigma2[1] = parse_vector(value, key);
    } else {
      throw ConfigError("unknown simulation key '" + key + "'");
    }
  }
  try {
    gen.validate();
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
  return gen;
}

GenConfig parse_gen_config(const std::string& path) {
  return gen_config_from_kv(read_key_values(path));
}

KeyValues gen_config_to_kv(const GenConfig& gen) {
  KeyValues kv;
  {
    std::string arms;
    for (std::size_t a = 0; a < gen.n_per_arm.size(); ++a) {
      if (a > 0) arms += ",";
      arms += std::to_string(gen.n_per_arm[a]);
    }
    kv["n_per_arm"] = arms;
  }
  kv["visit_weeks"] = join_doubles(gen.visit_weeks);
  kv["variant"] = std::to_string(static_cast<int>(gen.variant));
  kv["study_end_week"] = format_double(gen.study_end_week);
  kv["noninformative_weekly_hazard"] =
      format_double(gen.noninformative_weekly_hazard);
  kv["true_gamma_alpha"] = join_vector(gen.truth.gamma_alpha);
  kv["true_gamma_beta1"] = join_vector(gen.truth.gamma_beta1);
  kv["true_gamma_beta2"] = join_vector(gen.truth.gamma_beta2);
  kv["true_gamma_kappa"] = join_vector(gen.truth.gamma_kappa);
  kv["true_sigma2_resid"] = format_double(gen.truth.sigma2_resid);
  kv["true_sigma2_alpha"] = format_double(gen.truth.sigma2_alpha);
  kv["true_sigma2_beta1"] = format_double(gen.truth.sigma2_beta1);
  kv["true_sigma2_beta2"] = format_double(gen.truth.sigma2_beta2);
  kv["true_sigma2_kappa"] = format_double(gen.truth.sigma2_kappa);
  kv["true_phi_ae"] = join_vector(gen.truth.phi[0]);
  kv["true_phi_effy"] = join_vector(gen.truth.phi[1]);
  if (latent_dim(gen.variant) > 0) {
    kv["true_omega_ae"] = join_vector(gen.truth.omega[0]);
    kv["true_omega_effy"] = join_vector(gen.truth.omega[1]);
  }
  kv["true_varsigma2_ae"] = join_vector(gen.truth.varsigma2[0]);
  kv["true_varsigma2_effy"] = join_vector(gen.truth.varsigma2[1]);
  return kv;
}

// ---------------------------------------------------------------------------
// Result emission.

void write_disposition_csv(const std::vector<DispositionRow>& rows,
                           const std::string& path) {
  std::ofstream out = open_output(path);
  out << "arm,n,completed,adverse_event,inefficacy,other,pct_completed,"
         "pct_adverse_event,pct_inefficacy,pct_other\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.n << ',' << r.completed << ','
        << r.adverse_event << ',' << r.inefficacy << ',' << r.other << ','
        << format_double(r.pct_completed) << ','
        << format_double(r.pct_adverse_event) << ','
        << format_double(r.pct_inefficacy) << ','
        << format_double(r.pct_other) << '\n';
  }
}

void write_summary_csv(const PosteriorSummary& summary,
                       const std::string& path) {
  std::ofstream out = open_output(path);
  out << "parameter,mean,sd,q2.5,q50,q97.5,rhat,ess,mh_acceptance\n";
  for (const auto& r : summary.rows) {
    out << r.name << ',' << format_double(r.mean) << ','
        << format_double(r.sd) << ',' << format_double(r.q025) << ','
        << format_double(r.q50) << ',' << format_double(r.q975) << ','
        << format_double(r.rhat) << ',' << format_double(r.ess) << ','
        << format_double(r.mh_acceptance) << '\n';
  }
}

void write_dic_csv(std::vector<DicTableEntry> entries,
                   const std::string& path) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const DicTableEntry& a, const DicTableEntry& b) {
                     if (a.result.dic != b.result.dic)
                       return a.result.dic < b.result.dic;
                     return a.variant < b.variant;
                   });
  std::ofstream out = open_output(path);
  out << "variant,model,dbar,d_at_mean,p_d,dic,preferred,"
         "tied_with_preferred\n";
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const auto& e = entries[j];
    const bool tied =
        j > 0 && e.result.dic == entries.front().result.dic;
    out << e.variant << ','
        << latent_link_name(latent_link_from_index(e.variant)) << ','
        << format_double(e.result.dbar) << ','
        << format_double(e.result.d_at_mean) << ','
        << format_double(e.result.p_d) << ',' << format_double(e.result.dic)
        << ',' << (j == 0 ? 1 : 0) << ',' << (tied ? 1 : 0) << '\n';
  }
}

void write_curves_csv(const std::vector<LabeledCurves>& curves,
                      const std::string& path) {
  std::ofstream out = open_output(path);
  out << "model,arm,week,mean,q2.5,q97.5\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << c.model_label << ',' << c.arm << ',' << format_double(p.week)
          << ',' << format_double(p.mean) << ',' << format_double(p.lower)
          << ',' << format_double(p.upper) << '\n';
    }
  }
}

void write_curves_svg(const std::vector<LabeledCurves>& curves,
                      const std::string& title, const std::string& path) {
  const double width = 760, height = 480;
  const double ml = 64, mr = 24, mt = 40, mb = 48;
  double max_week = 1.0, max_y = 1.0;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      max_week = std::max(max_week, p.week);
      max_y = std::max(max_y, p.mean);
    }
  }
  max_y = std::ceil(max_y + 0.5);
  const auto sx = [&](double w) {
    return ml + (width - ml - mr) * w / max_week;
  };
  const auto sy = [&](double y) {
    return height - mb - (height - mt - mb) * y / max_y;
  };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#8c564b", "#e377c2"};
  std::ofstream out = open_output(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<text x=\"" << ml << "\" y=\"24\" font-size=\"15\">" << title
      << "</text>\n";
  // Axes with a light grid.
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 6; ++tick) {
    const double w = max_week * tick / 6.0;
    out << "<text x=\"" << sx(w) - 8 << "\" y=\"" << height - mb + 18
        << "\" font-size=\"11\">" << static_cast<int>(w + 0.5)
        << "</text>\n";
    const double y = max_y * tick / 6.0;
    out << "<text x=\"" << ml - 34 << "\" y=\"" << sy(y) + 4
        << "\" font-size=\"11\">" << y << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << sy(y) << "\" x2=\""
        << width - mr << "\" y2=\"" << sy(y)
        << "\" stroke=\"#dddddd\"/>\n";
  }
  out << "<text x=\"" << (ml + width - mr) / 2 - 30 << "\" y=\""
      << height - 12 << "\" font-size=\"12\">week</text>\n";
  out << "<text x=\"10\" y=\"" << (mt + height - mb) / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 14 "
      << (mt + height - mb) / 2 << ")\">DAS28</text>\n";
  int color_idx = 0;
  double legend_y = mt + 8;
  for (const auto& c : curves) {
    const char* color = palette[c.arm % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\"";
    if (c.dashed) out << " stroke-dasharray=\"7,4\"";
    out << " points=\"";
    for (const auto& p : c.points) out << sx(p.week) << ',' << sy(p.mean) << ' ';
    out << "\"/>\n";
    out << "<line x1=\"" << width - mr - 170 << "\" y1=\"" << legend_y
        << "\" x2=\"" << width - mr - 140 << "\" y2=\"" << legend_y
        << "\" stroke=\"" << color << "\" stroke-width=\"1.8\""
        << (c.dashed ? " stroke-dasharray=\"7,4\"" : "") << "/>\n";
    out << "<text x=\"" << width - mr - 132 << "\" y=\"" << legend_y + 4
        << "\" font-size=\"11\">" << c.model_label << " arm" << c.arm
        << "</text>\n";
    legend_y += 16;
    ++color_idx;
  }
  (void)color_idx;
  out << "</svg>\n";
}

void write_draws_csv(const ChainOutput& chain, const std::string& path,
                     bool include_effects) {
  std::ofstream out = open_output(path);
  const LatentLink link = chain.config.variant;
  const std::vector<std::string> names =
      chain.draws.empty()
          ? std::vector<std::string>{}
          : hyper_parameter_names(chain.draws.front().hyper, link);
  out << "iteration,deviance";
  for (const auto& n : names) out << ',' << n;
  if (include_effects && !chain.draws.empty()) {
    const std::size_t n_sub = chain.draws.front().effects.size();
    for (std::size_t i = 0; i < n_sub; ++i) {
      out << ",alpha_baseline[" << i << "],beta1[" << i << "],beta2[" << i
          << "],kappa[" << i << ']';
    }
  }
  out << '\n';
  for (std::size_t d = 0; d < chain.draws.size(); ++d) {
    out << d + 1 << ',' << format_double(chain.deviance[d]);
    for (double v : flatten_hyper(chain.draws[d].hyper, link)) {
      out << ',' << format_double(v);
    }
    if (include_effects) {
      for (const auto& e : chain.draws[d].effects) {
        out << ',' << format_double(e.alpha_baseline) << ','
            << format_double(e.beta1) << ',' << format_double(e.beta2) << ','
            << format_double(e.kappa);
      }
    }
    out << '\n';
  }
}

DrawsTable read_draws_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path + ": empty file");
  const auto header = split(trim(line), ',');
  if (header.size() < 2 || header[0] != "iteration") {
    throw SchemaError(path + ": expected an 'iteration,...' header");
  }
  DrawsTable table;
  table.columns.assign(header.begin() + 1, header.end());
  table.series.resize(table.columns.size());
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) {
      throw SchemaError(path + " row " + std::to_string(row) +
                        ": field count mismatch");
    }
    for (std::size_t j = 1; j < f.size(); ++j) {
      table.series[j - 1].push_back(
          parse_double(f[j], path + " row " + std::to_string(row)));
    }
  }
  return table;
}

void write_manifest(const KeyValues& entries, const std::string& path) {
  std::ofstream out = open_output(path);
  for (const auto& [key, value] : entries) {
    out << key << " = " << value << '\n';
  }
}

}  // namespace dasjoint
