// Command-line front end: simulate / fit / diagnose / compare.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dasjoint/datagen.hpp"
#include "dasjoint/diagnostics.hpp"
#include "dasjoint/io.hpp"
#include "dasjoint/sampler.hpp"

namespace fs = std::filesystem;
using namespace dasjoint;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSchema = 3;
constexpr int kExitNumeric = 4;

struct CommonArgs {
  std::string config_path;
  std::optional<std::int64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool config_required) {
  auto* opt = cmd->add_option("--config", args->config_path,
                              "flat key = value configuration file");
  if (config_required) opt->required();
  cmd->add_option("--seed", args->seed, "root RNG seed (overrides config)");
  cmd->add_option("--variant", args->variant,
                  "model variant 1..6, a comma list, or 'all'");
  cmd->add_option("--out", args->out, "output directory (overrides config)");
}

std::string out_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "'");
}

int run_simulate(const CommonArgs& args) {
  GenConfig gen = parse_gen_config(args.config_path);
  const KeyValues kv = read_key_values(args.config_path);
  std::uint64_t seed = 0;
  if (auto it = kv.find("seed"); it != kv.end())
    seed = std::strtoull(it->second.c_str(), nullptr, 10);
  if (args.seed) seed = static_cast<std::uint64_t>(*args.seed);
  std::string dir = args.out.value_or(
      kv.count("out") ? kv.at("out") : std::string("."));
  ensure_out_dir(dir);

  const auto [data, truth] = simulate_trial(gen, seed);
  write_trial_csv(data, out_path(dir, "longitudinal.csv"),
                  out_path(dir, "subjects.csv"));
  write_disposition_csv(disposition_table(data),
                        out_path(dir, "disposition.csv"));
  {
    // Ground truth for recovery studies.
    std::ofstream out(out_path(dir, "truth.csv"));
    out << "subject_id,alpha_baseline,beta1,beta2,kappa,latent_ae,"
           "latent_effy,cause\n";
    for (int i = 0; i < data.n_subjects(); ++i) {
      out << data.subjects[i].id << ','
          << format_double(truth.effects[i].alpha_baseline) << ','
          << format_double(truth.effects[i].beta1) << ','
          << format_double(truth.effects[i].beta2) << ','
          << format_double(truth.effects[i].kappa) << ','
          << format_double(truth.latent_dropout[i][0]) << ','
          << format_double(truth.latent_dropout[i][1]) << ','
          << static_cast<int>(truth.cause[i]) << '\n';
    }
  }
  KeyValues manifest = gen_config_to_kv(gen);
  manifest["command"] = "simulate";
  manifest["seed"] = std::to_string(seed);
  manifest["out"] = dir;
  manifest["tool_version"] = kToolVersion;
  write_manifest(manifest, out_path(dir, "manifest.txt"));
  std::cout << "simulated " << data.n_subjects() << " subjects into " << dir
            << "\n";
  return kExitOk;
}

RunConfig load_run_config(const CommonArgs& args) {
  RunConfig cfg = parse_run_config(args.config_path);
  if (args.seed) cfg.mcmc.seed = static_cast<std::uint64_t>(*args.seed);
  if (args.variant) cfg.variant_spec = *args.variant;
  if (args.out) cfg.out_dir = *args.out;
  if (cfg.longitudinal_path.empty() || cfg.subjects_path.empty()) {
    throw ConfigError("config must name 'longitudinal' and 'subjects' files");
  }
  return cfg;
}

std::string variant_tag(LatentLink link) {
  return "m" + std::to_string(static_cast<int>(link));
}

int run_fit(const CommonArgs& args, bool compare_mode) {
  RunConfig cfg = load_run_config(args);
  const std::vector<LatentLink> variants = cfg.variants();
  if (compare_mode && variants.size() < 2) {
    throw ConfigError("compare needs at least two variants");
  }
  ensure_out_dir(cfg.out_dir);
  const TrialData data = ingest(cfg.longitudinal_path, cfg.subjects_path,
                                cfg.study_end_week);

  if (cfg.emit_disposition) {
    write_disposition_csv(disposition_table(data),
                          out_path(cfg.out_dir, "disposition.csv"));
  }

  std::vector<DicTableEntry> dic_entries;
  std::vector<LabeledCurves> figure_curves;
  std::optional<std::pair<double, LatentLink>> best_joint;
  bool has_separate = false;

  for (LatentLink link : variants) {
    McmcConfig mcmc = cfg.mcmc;
    mcmc.variant = link;
    const std::vector<ChainOutput> chains = run_analysis(mcmc, data);
    const std::string tag = variant_tag(link);

    if (cfg.emit_summaries) {
      write_summary_csv(summarize(chains, cfg.emit_effect_draws),
                        out_path(cfg.out_dir, "summary_" + tag + ".csv"));
    }
    const DicResult d = dic(chains, data, link);
    dic_entries.push_back({static_cast<int>(link), d});

    if (cfg.emit_curves) {
      std::vector<LabeledCurves> model_curves;
      for (int arm = 0; arm < data.n_treatments; ++arm) {
        model_curves.push_back({tag, arm, link != LatentLink::Separate,
                                population_curves(chains, data, arm,
                                                  cfg.resolved_grid())});
      }
      write_curves_csv(model_curves,
                       out_path(cfg.out_dir, "curves_" + tag + ".csv"));
      if (link == LatentLink::Separate) {
        has_separate = true;
        for (auto& c : model_curves) figure_curves.push_back(c);
      } else if (!best_joint || d.dic < best_joint->first) {
        // Keep only the best joint model on the figure.
        std::erase_if(figure_curves,
                      [](const LabeledCurves& c) { return c.dashed; });
        for (auto& c : model_curves) figure_curves.push_back(c);
        best_joint = {d.dic, link};
      }
    }
    if (cfg.emit_draws) {
      for (const auto& chain : chains) {
        write_draws_csv(chain,
                        out_path(cfg.out_dir,
                                 "draws_" + tag + "_chain" +
                                     std::to_string(chain.chain_index) +
                                     ".csv"),
                        cfg.emit_effect_draws);
      }
    }
  }

  write_dic_csv(dic_entries,
                out_path(cfg.out_dir,
                         compare_mode ? "dic_compare.csv" : "dic.csv"));
  if (cfg.emit_curves && !figure_curves.empty()) {
    write_curves_svg(figure_curves,
                     has_separate && figure_curves.size() >
                                         static_cast<std::size_t>(
                                             data.n_treatments)
                         ? "Population DAS28: separate (solid) vs joint "
                           "(dashed)"
                         : "Population DAS28 trajectories",
                     out_path(cfg.out_dir, "curves.svg"));
  }

  KeyValues manifest = run_config_to_kv(cfg);
  manifest["command"] = compare_mode ? "compare" : "fit";
  manifest["tool_version"] = kToolVersion;
  manifest["longitudinal_fnv1a"] =
      std::to_string(fnv1a_file(cfg.longitudinal_path));
  manifest["subjects_fnv1a"] = std::to_string(fnv1a_file(cfg.subjects_path));
  write_manifest(manifest, out_path(cfg.out_dir, "manifest.txt"));

  if (compare_mode) {
    std::stable_sort(dic_entries.begin(), dic_entries.end(),
                     [](const DicTableEntry& a, const DicTableEntry& b) {
                       if (a.result.dic != b.result.dic)
                         return a.result.dic < b.result.dic;
                       return a.variant < b.variant;
                     });
    std::cout << "DIC ranking (best first):\n";
    for (const auto& e : dic_entries) {
      std::cout << "  model " << e.variant << "  dic="
                << format_double(e.result.dic) << "  p_d="
                << format_double(e.result.p_d)
                << (e.result.dic == dic_entries.front().result.dic &&
                            &e != &dic_entries.front()
                        ? "  (tie)"
                        : "")
                << "\n";
    }
  } else {
    std::cout << "fit complete; outputs in " << cfg.out_dir << "\n";
  }
  return kExitOk;
}

int run_diagnose(const CommonArgs& args) {
  RunConfig cfg = parse_run_config(args.config_path);
  if (args.variant) cfg.variant_spec = *args.variant;
  const std::string draws_dir = cfg.out_dir;
  const std::string dir = args.out.value_or(cfg.out_dir);
  ensure_out_dir(dir);

  for (LatentLink link : cfg.variants()) {
    const std::string tag = variant_tag(link);
    std::vector<DrawsTable> tables;
    for (int c = 0;; ++c) {
      const std::string path = out_path(
          draws_dir, "draws_" + tag + "_chain" + std::to_string(c) + ".csv");
      if (!fs::exists(path)) break;
      tables.push_back(read_draws_csv(path));
    }
    if (tables.empty()) {
      throw ConfigError("no draws files for variant " + tag + " under '" +
                        draws_dir + "' (fit with emit_draws = true first)");
    }
    PosteriorSummary summary;
    std::ofstream acf_out(out_path(dir, "acf_" + tag + ".csv"));
    acf_out << "parameter,lag,acf\n";
    for (std::size_t col = 0; col < tables.front().columns.size(); ++col) {
      std::vector<std::vector<double>> chains;
      for (const auto& t : tables) chains.push_back(t.series[col]);
      const std::string& name = tables.front().columns[col];
      summary.rows.push_back(summarize_scalar_series(
          name, chains, std::numeric_limits<double>::quiet_NaN()));
      const EssResult er = ess_and_acf(chains, 40);
      for (std::size_t lag = 0; lag < er.acf.size(); ++lag) {
        acf_out << name << ',' << lag + 1 << ','
                << format_double(er.acf[lag]) << '\n';
      }
    }
    write_summary_csv(summary, out_path(dir, "summary_" + tag + ".csv"));
    std::cout << "diagnostics for " << tag << " written to " << dir << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian joint modeling of longitudinal DAS28 scores and "
               "competing-risk dropout"};
  app.require_subcommand(1);

  CommonArgs sim_args, fit_args, diag_args, cmp_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "generate a synthetic trial from a simulation config");
  add_common(sim, &sim_args, true);
  CLI::App* fit = app.add_subcommand(
      "fit", "fit one or more model variants to a trial");
  add_common(fit, &fit_args, true);
  CLI::App* diag = app.add_subcommand(
      "diagnose", "re-summarize stored draws (R-hat, ESS, ACF)");
  add_common(diag, &diag_args, true);
  CLI::App* cmp = app.add_subcommand(
      "compare", "fit several variants and rank them by DIC");
  add_common(cmp, &cmp_args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_args);
    if (fit->parsed()) return run_fit(fit_args, false);
    if (diag->parsed()) return run_diagnose(diag_args);
    if (cmp->parsed()) return run_fit(cmp_args, true);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SchemaError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
