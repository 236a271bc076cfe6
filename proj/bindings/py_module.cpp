// Python bindings for the core operations: simulation, fitting, model
// comparison, and the small numeric utilities.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "dasjoint/datagen.hpp"
#include "dasjoint/diagnostics.hpp"
#include "dasjoint/io.hpp"
#include "dasjoint/model.hpp"
#include "dasjoint/sampler.hpp"
#include "dasjoint/stats.hpp"

namespace py = pybind11;
using namespace dasjoint;

namespace {

// pybind11 cannot bind std::array<Eigen::VectorXd, 2> members directly;
// expose per-risk accessors instead.
template <typename T>
auto risk_getter(std::array<T, kNumRisks> Hyperparams::* member, int k) {
  return [member, k](const Hyperparams& h) { return (h.*member)[k]; };
}

template <typename T>
auto risk_setter(std::array<T, kNumRisks> Hyperparams::* member, int k) {
  return [member, k](Hyperparams& h, const T& v) { (h.*member)[k] = v; };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Joint change-point model for longitudinal DAS28 scores with "
            "competing-risk informative dropout";
  m.attr("__version__") = kToolVersion;

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<SchemaError>(m, "SchemaError");
  py::register_exception<NumericError>(m, "NumericError");

  py::enum_<LatentLink>(m, "LatentLink")
      .value("SEPARATE", LatentLink::Separate)
      .value("TRAJECTORY_AT_DROPOUT", LatentLink::TrajectoryAtDropout)
      .value("BASELINE", LatentLink::Baseline)
      .value("PRE_SLOPE", LatentLink::PreSlope)
      .value("POST_SLOPE", LatentLink::PostSlope)
      .value("ALL_SHARED", LatentLink::AllShared);
  m.def("latent_link_from_index", &latent_link_from_index, py::arg("index"));

  py::class_<DropoutObs>(m, "DropoutObs")
      .def(py::init<>())
      .def_readwrite("time_weeks", &DropoutObs::time_weeks)
      .def_readwrite("observed", &DropoutObs::observed);

  py::class_<SubjectRecord>(m, "SubjectRecord")
      .def(py::init<>())
      .def_readwrite("id", &SubjectRecord::id)
      .def_readwrite("dummies", &SubjectRecord::dummies)
      .def_readwrite("visit_weeks", &SubjectRecord::visit_weeks)
      .def_readwrite("das28", &SubjectRecord::das28)
      .def_readwrite("log_score", &SubjectRecord::log_score)
      .def_readwrite("noninformative_exit_week",
                     &SubjectRecord::noninformative_exit_week)
      .def_property(
          "ae",
          [](const SubjectRecord& s) { return s.dropout[0]; },
          [](SubjectRecord& s, const DropoutObs& o) { s.dropout[0] = o; })
      .def_property(
          "effy",
          [](const SubjectRecord& s) { return s.dropout[1]; },
          [](SubjectRecord& s, const DropoutObs& o) { s.dropout[1] = o; })
      .def("group", &SubjectRecord::group);

  py::class_<TrialData>(m, "TrialData")
      .def(py::init<>())
      .def_readwrite("subjects", &TrialData::subjects)
      .def_readwrite("study_end_week", &TrialData::study_end_week)
      .def_readwrite("n_treatments", &TrialData::n_treatments)
      .def("n_subjects", &TrialData::n_subjects)
      .def("validate", &TrialData::validate);

  py::class_<SubjectEffects>(m, "SubjectEffects")
      .def(py::init<>())
      .def(py::init([](double a, double b1, double b2, double k) {
             SubjectEffects e;
             e.alpha_baseline = a;
             e.beta1 = b1;
             e.beta2 = b2;
             e.kappa = k;
             return e;
           }),
           py::arg("alpha_baseline"), py::arg("beta1"), py::arg("beta2"),
           py::arg("kappa"))
      .def_readwrite("alpha_baseline", &SubjectEffects::alpha_baseline)
      .def_readwrite("beta1", &SubjectEffects::beta1)
      .def_readwrite("beta2", &SubjectEffects::beta2)
      .def_readwrite("kappa", &SubjectEffects::kappa)
      .def_readwrite("imputed_dropout", &SubjectEffects::imputed_dropout);

  py::class_<Hyperparams>(m, "Hyperparams")
      .def(py::init<>())
      .def_readwrite("gamma_alpha", &Hyperparams::gamma_alpha)
      .def_readwrite("gamma_beta1", &Hyperparams::gamma_beta1)
      .def_readwrite("gamma_beta2", &Hyperparams::gamma_beta2)
      .def_readwrite("gamma_kappa", &Hyperparams::gamma_kappa)
      .def_readwrite("sigma2_resid", &Hyperparams::sigma2_resid)
      .def_readwrite("sigma2_alpha", &Hyperparams::sigma2_alpha)
      .def_readwrite("sigma2_beta1", &Hyperparams::sigma2_beta1)
      .def_readwrite("sigma2_beta2", &Hyperparams::sigma2_beta2)
      .def_readwrite("sigma2_kappa", &Hyperparams::sigma2_kappa)
      .def_property("phi_ae", risk_getter(&Hyperparams::phi, 0),
                    risk_setter(&Hyperparams::phi, 0))
      .def_property("phi_effy", risk_getter(&Hyperparams::phi, 1),
                    risk_setter(&Hyperparams::phi, 1))
      .def_property("omega_ae", risk_getter(&Hyperparams::omega, 0),
                    risk_setter(&Hyperparams::omega, 0))
      .def_property("omega_effy", risk_getter(&Hyperparams::omega, 1),
                    risk_setter(&Hyperparams::omega, 1))
      .def_property("varsigma2_ae", risk_getter(&Hyperparams::varsigma2, 0),
                    risk_setter(&Hyperparams::varsigma2, 0))
      .def_property("varsigma2_effy", risk_getter(&Hyperparams::varsigma2, 1),
                    risk_setter(&Hyperparams::varsigma2, 1));
  m.def("make_hyperparams", &make_hyperparams, py::arg("n_dummies"),
        py::arg("link"), py::arg("n_groups"),
        py::arg("pooled_dropout_variance") = false);

  py::class_<PriorSpec>(m, "PriorSpec")
      .def(py::init<>())
      .def_readwrite("gamma_mean", &PriorSpec::gamma_mean)
      .def_readwrite("gamma_var", &PriorSpec::gamma_var)
      .def_readwrite("gamma_kappa_mean", &PriorSpec::gamma_kappa_mean)
      .def_readwrite("gamma_kappa_var", &PriorSpec::gamma_kappa_var)
      .def_readwrite("phi_mean", &PriorSpec::phi_mean)
      .def_readwrite("phi_var", &PriorSpec::phi_var)
      .def_readwrite("omega_mean", &PriorSpec::omega_mean)
      .def_readwrite("omega_var", &PriorSpec::omega_var)
      .def_readwrite("variance_shape", &PriorSpec::variance_shape)
      .def_readwrite("variance_rate", &PriorSpec::variance_rate)
      .def_readwrite("pooled_dropout_variance",
                     &PriorSpec::pooled_dropout_variance);

  py::class_<McmcConfig>(m, "McmcConfig")
      .def(py::init<>())
      .def_readwrite("iterations", &McmcConfig::iterations)
      .def_readwrite("burn_in", &McmcConfig::burn_in)
      .def_readwrite("thin", &McmcConfig::thin)
      .def_readwrite("n_chains", &McmcConfig::n_chains)
      .def_readwrite("seed", &McmcConfig::seed)
      .def_readwrite("variant", &McmcConfig::variant)
      .def_readwrite("adapt_target", &McmcConfig::adapt_target)
      .def_readwrite("adapt_window", &McmcConfig::adapt_window)
      .def_readwrite("kappa_steps", &McmcConfig::kappa_steps)
      .def_readwrite("priors", &McmcConfig::priors)
      .def_readwrite("pin_omega_zero", &McmcConfig::pin_omega_zero);

  py::class_<Draw>(m, "Draw")
      .def_readonly("hyper", &Draw::hyper)
      .def_readonly("effects", &Draw::effects);

  py::class_<AcceptanceStats>(m, "AcceptanceStats")
      .def_readonly("kappa_rate", &AcceptanceStats::kappa_rate)
      .def_readonly("effects_rate", &AcceptanceStats::effects_rate)
      .def_readonly("mean_kappa_rate", &AcceptanceStats::mean_kappa_rate)
      .def_readonly("mean_effects_rate", &AcceptanceStats::mean_effects_rate)
      .def_readonly("kappa_translate_rate",
                    &AcceptanceStats::kappa_translate_rate)
      .def_readonly("kappa_rescale_rate", &AcceptanceStats::kappa_rescale_rate)
      .def_readonly("kappa_refresh_rate",
                    &AcceptanceStats::kappa_refresh_rate);

  py::class_<ChainOutput>(m, "ChainOutput")
      .def_readonly("draws", &ChainOutput::draws)
      .def_readonly("deviance", &ChainOutput::deviance)
      .def_readonly("acceptance", &ChainOutput::acceptance)
      .def_readonly("seed", &ChainOutput::seed)
      .def_readonly("chain_index", &ChainOutput::chain_index);

  py::enum_<ExitCause>(m, "ExitCause")
      .value("COMPLETED", ExitCause::Completed)
      .value("ADVERSE_EVENT", ExitCause::AdverseEvent)
      .value("INEFFICACY", ExitCause::Inefficacy)
      .value("NONINFORMATIVE", ExitCause::Noninformative);

  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init<>())
      .def_readwrite("n_per_arm", &GenConfig::n_per_arm)
      .def_readwrite("visit_weeks", &GenConfig::visit_weeks)
      .def_readwrite("truth", &GenConfig::truth)
      .def_readwrite("variant", &GenConfig::variant)
      .def_readwrite("study_end_week", &GenConfig::study_end_week)
      .def_readwrite("noninformative_weekly_hazard",
                     &GenConfig::noninformative_weekly_hazard);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("effects", &GroundTruth::effects)
      .def_readonly("latent_dropout", &GroundTruth::latent_dropout)
      .def_readonly("cause", &GroundTruth::cause)
      .def_readonly("fixed_point_failures",
                    &GroundTruth::fixed_point_failures);

  py::class_<DispositionRow>(m, "DispositionRow")
      .def_readonly("label", &DispositionRow::label)
      .def_readonly("n", &DispositionRow::n)
      .def_readonly("completed", &DispositionRow::completed)
      .def_readonly("adverse_event", &DispositionRow::adverse_event)
      .def_readonly("inefficacy", &DispositionRow::inefficacy)
      .def_readonly("other", &DispositionRow::other)
      .def_readonly("pct_completed", &DispositionRow::pct_completed)
      .def_readonly("pct_adverse_event", &DispositionRow::pct_adverse_event)
      .def_readonly("pct_inefficacy", &DispositionRow::pct_inefficacy)
      .def_readonly("pct_other", &DispositionRow::pct_other);

  py::class_<DicResult>(m, "DicResult")
      .def_readonly("dbar", &DicResult::dbar)
      .def_readonly("d_at_mean", &DicResult::d_at_mean)
      .def_readonly("p_d", &DicResult::p_d)
      .def_readonly("dic", &DicResult::dic);

  py::class_<SummaryRow>(m, "SummaryRow")
      .def_readonly("name", &SummaryRow::name)
      .def_readonly("mean", &SummaryRow::mean)
      .def_readonly("sd", &SummaryRow::sd)
      .def_readonly("q025", &SummaryRow::q025)
      .def_readonly("q50", &SummaryRow::q50)
      .def_readonly("q975", &SummaryRow::q975)
      .def_readonly("rhat", &SummaryRow::rhat)
      .def_readonly("ess", &SummaryRow::ess)
      .def_readonly("mh_acceptance", &SummaryRow::mh_acceptance);

  py::class_<PosteriorSummary>(m, "PosteriorSummary")
      .def_readonly("rows", &PosteriorSummary::rows)
      .def("find", &PosteriorSummary::find, py::arg("name"),
           py::return_value_policy::reference_internal);

  py::class_<CurvePoint>(m, "CurvePoint")
      .def_readonly("week", &CurvePoint::week)
      .def_readonly("mean", &CurvePoint::mean)
      .def_readonly("lower", &CurvePoint::lower)
      .def_readonly("upper", &CurvePoint::upper);

  // Core operations.
  m.def("das28_score", &das28_score, py::arg("tender28"), py::arg("swollen28"),
        py::arg("esr"), py::arg("gh_vas"));
  m.def("eval_trajectory", &eval_trajectory, py::arg("effects"), py::arg("t"));
  m.def(
      "latent_link",
      [](LatentLink link, const SubjectEffects& e,
         std::optional<double> dropout_time) {
        return latent_link(link, e, dropout_time);
      },
      py::arg("link"), py::arg("effects"),
      py::arg("dropout_time") = std::nullopt);
  m.def(
      "sample_truncated_normal",
      [](double mean, double sd, double lower, std::uint64_t seed, int n) {
        RngStream rng(seed, {0xF00DULL});
        std::vector<double> out(n);
        for (auto& v : out) v = sample_truncated_normal(mean, sd, lower, rng);
        return out;
      },
      py::arg("mean"), py::arg("sd"), py::arg("lower"), py::arg("seed"),
      py::arg("n") = 1);

  m.def("simulate_trial", &simulate_trial, py::arg("gen"), py::arg("seed"));
  m.def("disposition_table", &disposition_table, py::arg("data"));
  m.def("example_gen_config", &example_gen_config);

  m.def("run_chain", &run_chain, py::arg("config"), py::arg("data"),
        py::arg("chain_index") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("run_analysis", &run_analysis, py::arg("config"), py::arg("data"),
        py::call_guard<py::gil_scoped_release>());

  m.def("deviance", &deviance, py::arg("effects"), py::arg("hyper"),
        py::arg("data"), py::arg("link"));
  m.def("dic", &dic, py::arg("chains"), py::arg("data"), py::arg("link"));
  m.def("rhat", &rhat, py::arg("chain_series"));
  m.def(
      "ess_and_acf",
      [](const std::vector<std::vector<double>>& chains, int max_lag) {
        const EssResult r = ess_and_acf(chains, max_lag);
        return py::make_tuple(r.ess, r.acf);
      },
      py::arg("chain_series"), py::arg("max_lag") = 200);
  m.def("summarize", &summarize, py::arg("chains"),
        py::arg("include_subject_effects") = false);
  m.def("population_curves", &population_curves, py::arg("chains"),
        py::arg("data"), py::arg("treatment"), py::arg("grid_weeks"));

  m.def("ingest", &ingest, py::arg("longitudinal_path"),
        py::arg("subjects_path"), py::arg("study_end_week") = 156.0,
        py::arg("n_treatments") = 3);
  m.def("write_trial_csv", &write_trial_csv, py::arg("data"),
        py::arg("longitudinal_path"), py::arg("subjects_path"));
}
