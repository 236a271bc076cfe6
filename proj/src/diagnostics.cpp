#include "dasjoint/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dasjoint/model.hpp"

namespace dasjoint {

namespace {
const double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double deviance(const std::vector<SubjectEffects>& effects,
                const Hyperparams& hyper, const TrialData& data,
                LatentLink link) {
  double ll = 0.0;
  for (int i = 0; i < data.n_subjects(); ++i) {
    ll += loglik_longitudinal(data.subjects[i], effects[i],
                              hyper.sigma2_resid);
    ll += loglik_dropout(data.subjects[i], effects[i], hyper, link,
                         DropoutMode::Marginal);
  }
  return -2.0 * ll;
}

DicResult dic_from_components(double dbar, double d_at_mean) {
  DicResult r;
  r.dbar = dbar;
  r.d_at_mean = d_at_mean;
  r.p_d = dbar - d_at_mean;
  r.dic = 2.0 * dbar - d_at_mean;
  return r;
}

DicResult dic(const std::vector<ChainOutput>& chains, const TrialData& data,
              LatentLink link) {
  long n_draws = 0;
  double dev_sum = 0.0;
  for (const auto& c : chains) {
    for (double d : c.deviance) {
      dev_sum += d;
      ++n_draws;
    }
  }
  if (n_draws == 0) throw std::invalid_argument("dic: no retained draws");

  // Component-wise posterior means of everything, subject effects
  // included (conditional focus).
  std::vector<double> hyper_acc;
  std::vector<SubjectEffects> eff_acc;
  for (const auto& c : chains) {
    for (const auto& draw : c.draws) {
      const std::vector<double> flat = flatten_hyper(draw.hyper, link);
      if (hyper_acc.empty()) {
        hyper_acc.assign(flat.size(), 0.0);
        eff_acc.assign(draw.effects.size(), SubjectEffects{});
      }
      for (std::size_t j = 0; j < flat.size(); ++j) hyper_acc[j] += flat[j];
      for (std::size_t i = 0; i < draw.effects.size(); ++i) {
        eff_acc[i].alpha_baseline += draw.effects[i].alpha_baseline;
        eff_acc[i].beta1 += draw.effects[i].beta1;
        eff_acc[i].beta2 += draw.effects[i].beta2;
        eff_acc[i].kappa += draw.effects[i].kappa;
        for (int k = 0; k < kNumRisks; ++k)
          eff_acc[i].imputed_dropout[k] += draw.effects[i].imputed_dropout[k];
      }
    }
  }
  for (double& v : hyper_acc) v /= n_draws;
  for (auto& e : eff_acc) {
    e.alpha_baseline /= n_draws;
    e.beta1 /= n_draws;
    e.beta2 /= n_draws;
    e.kappa /= n_draws;
    for (int k = 0; k < kNumRisks; ++k) e.imputed_dropout[k] /= n_draws;
  }
  Hyperparams mean_hyper = chains.front().draws.front().hyper;
  unflatten_hyper(hyper_acc, link, mean_hyper);
  return dic_from_components(dev_sum / n_draws,
                             deviance(eff_acc, mean_hyper, data, link));
}

double rhat(const std::vector<std::vector<double>>& chain_series) {
  std::vector<std::pair<double, double>> halves;  // (mean, variance)
  for (const auto& chain : chain_series) {
    const int nh = static_cast<int>(chain.size()) / 2;
    if (nh < 4) return kNaN;
    const int offsets[2] = {0, static_cast<int>(chain.size()) - nh};
    for (int start : offsets) {
      double mean = 0.0;
      for (int j = 0; j < nh; ++j) mean += chain[start + j];
      mean /= nh;
      double var = 0.0;
      for (int j = 0; j < nh; ++j) {
        const double d = chain[start + j] - mean;
        var += d * d;
      }
      halves.emplace_back(mean, var / (nh - 1));
    }
  }
  const int m = static_cast<int>(halves.size());
  const int nh = static_cast<int>(chain_series.front().size()) / 2;
  double w = 0.0, grand = 0.0;
  for (const auto& [mean, var] : halves) {
    w += var;
    grand += mean;
  }
  w /= m;
  grand /= m;
  if (!(w > 0.0)) return kNaN;
  double b_over_n = 0.0;
  for (const auto& [mean, var] : halves) {
    const double d = mean - grand;
    b_over_n += d * d;
  }
  b_over_n /= (m - 1);
  const double var_plus = (nh - 1.0) / nh * w + b_over_n;
  return std::sqrt(var_plus / w);
}

EssResult ess_and_acf(const std::vector<std::vector<double>>& chain_series,
                      int max_lag) {
  long total = 0;
  for (const auto& c : chain_series) total += static_cast<long>(c.size());
  if (chain_series.empty() || total < 10) {
    throw std::invalid_argument("ess_and_acf: need at least 10 draws");
  }
  const int n = static_cast<int>(chain_series.front().size());
  for (const auto& c : chain_series) {
    if (static_cast<int>(c.size()) != n)
      throw std::invalid_argument("ess_and_acf: unequal chain lengths");
  }
  const int n_chains = static_cast<int>(chain_series.size());
  const int lags = std::min(max_lag, n - 1);

  std::vector<double> means(n_chains), vars(n_chains);
  for (int c = 0; c < n_chains; ++c) {
    double m = 0.0;
    for (double v : chain_series[c]) m += v;
    means[c] = m / n;
    double s = 0.0;
    for (double v : chain_series[c]) s += (v - means[c]) * (v - means[c]);
    vars[c] = n > 1 ? s / (n - 1) : 0.0;
  }
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / n_chains;
  EssResult res;
  if (!(w > 0.0)) {
    res.ess = kNaN;
    res.acf.assign(lags, kNaN);
    return res;
  }
  double between = 0.0;
  if (n_chains > 1) {
    double grand = std::accumulate(means.begin(), means.end(), 0.0) / n_chains;
    for (double m : means) between += (m - grand) * (m - grand);
    between /= (n_chains - 1);
  }
  const double var_plus = (n - 1.0) / n * w + between;

  // Biased autocovariances averaged across chains.
  std::vector<double> gamma_bar(lags + 1, 0.0);
  for (int c = 0; c < n_chains; ++c) {
    const auto& x = chain_series[c];
    for (int t = 0; t <= lags; ++t) {
      double g = 0.0;
      for (int j = 0; j + t < n; ++j)
        g += (x[j] - means[c]) * (x[j + t] - means[c]);
      gamma_bar[t] += g / n;
    }
  }
  for (double& g : gamma_bar) g /= n_chains;

  std::vector<double> rho(lags + 1);
  for (int t = 0; t <= lags; ++t)
    rho[t] = 1.0 - (w - gamma_bar[t]) / var_plus;

  // Geyer initial positive sequence over lag pairs.
  double pair_sum = 0.0;
  for (int m2 = 0; 2 * m2 + 1 <= lags; ++m2) {
    const double pair = rho[2 * m2] + rho[2 * m2 + 1];
    if (pair <= 0.0) break;
    pair_sum += pair;
  }
  const double tau = std::max(2.0 * pair_sum - 1.0, 1e-12);
  res.ess = std::min(static_cast<double>(total),
                     static_cast<double>(total) / tau);
  res.acf.assign(rho.begin() + 1, rho.end());
  return res;
}

// ---------------------------------------------------------------------------
// Flattened hyperparameter view.

namespace {

void for_each_hyper_block(
    const Hyperparams& h, LatentLink link,
    const std::function<void(const std::string&, const Eigen::VectorXd&)>&
        on_vector,
    const std::function<void(const std::string&, double)>& on_scalar) {
  on_vector("gamma_alpha", h.gamma_alpha);
  on_vector("gamma_beta1", h.gamma_beta1);
  on_vector("gamma_beta2", h.gamma_beta2);
  on_vector("gamma_kappa", h.gamma_kappa);
  on_scalar("sigma2_resid", h.sigma2_resid);
  on_scalar("sigma2_alpha", h.sigma2_alpha);
  on_scalar("sigma2_beta1", h.sigma2_beta1);
  on_scalar("sigma2_beta2", h.sigma2_beta2);
  on_scalar("sigma2_kappa", h.sigma2_kappa);
  const char* risk_tag[kNumRisks] = {"ae", "effy"};
  for (int k = 0; k < kNumRisks; ++k)
    on_vector(std::string("phi_") + risk_tag[k], h.phi[k]);
  if (link != LatentLink::Separate) {
    for (int k = 0; k < kNumRisks; ++k)
      on_vector(std::string("omega_") + risk_tag[k], h.omega[k]);
  }
  for (int k = 0; k < kNumRisks; ++k)
    on_vector(std::string("varsigma2_") + risk_tag[k], h.varsigma2[k]);
}

}  // namespace

std::vector<std::string> hyper_parameter_names(const Hyperparams& h,
                                               LatentLink link) {
  std::vector<std::string> names;
  for_each_hyper_block(
      h, link,
      [&](const std::string& base, const Eigen::VectorXd& v) {
        for (Eigen::Index j = 0; j < v.size(); ++j)
          names.push_back(base + "[" + std::to_string(j) + "]");
      },
      [&](const std::string& base, double) { names.push_back(base); });
  return names;
}

std::vector<double> flatten_hyper(const Hyperparams& h, LatentLink link) {
  std::vector<double> out;
  for_each_hyper_block(
      h, link,
      [&](const std::string&, const Eigen::VectorXd& v) {
        out.insert(out.end(), v.data(), v.data() + v.size());
      },
      [&](const std::string&, double x) { out.push_back(x); });
  return out;
}

void unflatten_hyper(const std::vector<double>& values, LatentLink link,
                     Hyperparams& h) {
  std::size_t pos = 0;
  auto take_vec = [&](Eigen::VectorXd& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = values.at(pos++);
  };
  auto take_scalar = [&](double& x) { x = values.at(pos++); };
  take_vec(h.gamma_alpha);
  take_vec(h.gamma_beta1);
  take_vec(h.gamma_beta2);
  take_vec(h.gamma_kappa);
  take_scalar(h.sigma2_resid);
  take_scalar(h.sigma2_alpha);
  take_scalar(h.sigma2_beta1);
  take_scalar(h.sigma2_beta2);
  take_scalar(h.sigma2_kappa);
  for (int k = 0; k < kNumRisks; ++k) take_vec(h.phi[k]);
  if (link != LatentLink::Separate) {
    for (int k = 0; k < kNumRisks; ++k) take_vec(h.omega[k]);
  }
  for (int k = 0; k < kNumRisks; ++k) take_vec(h.varsigma2[k]);
  if (pos != values.size()) {
    throw std::invalid_argument("unflatten_hyper: size mismatch");
  }
}

// ---------------------------------------------------------------------------
// Summaries.

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

const SummaryRow& PosteriorSummary::find(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw std::invalid_argument("summary has no parameter '" + name + "'");
}

SummaryRow summarize_scalar_series(const std::string& name,
                                   const std::vector<std::vector<double>>& chains,
                                   double acceptance) {
  SummaryRow row;
  row.name = name;
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  const std::size_t n = pooled.size();
  double mean = 0.0;
  for (double v : pooled) mean += v;
  mean /= static_cast<double>(n);
  row.mean = mean;
  if (n > 1) {
    double ss = 0.0;
    for (double v : pooled) ss += (v - mean) * (v - mean);
    row.sd = std::sqrt(ss / (static_cast<double>(n) - 1.0));
  } else {
    row.sd = kNaN;
  }
  row.q025 = quantile(pooled, 0.025);
  row.q50 = quantile(pooled, 0.50);
  row.q975 = quantile(pooled, 0.975);
  row.rhat = rhat(chains);
  if (n >= 10) {
    row.ess = ess_and_acf(chains).ess;
  } else {
    row.ess = kNaN;
  }
  row.mh_acceptance = acceptance;
  return row;
}

PosteriorSummary summarize(const std::vector<ChainOutput>& chains,
                           bool include_subject_effects) {
  if (chains.empty() || chains.front().draws.empty()) {
    throw std::invalid_argument("summarize: no retained draws");
  }
  const LatentLink link = chains.front().config.variant;
  const std::vector<std::string> names =
      hyper_parameter_names(chains.front().draws.front().hyper, link);
  const int n_chains = static_cast<int>(chains.size());

  // Series layout: chains x draws, one block per parameter.
  std::vector<std::vector<std::vector<double>>> series(
      names.size(),
      std::vector<std::vector<double>>(n_chains));
  for (int c = 0; c < n_chains; ++c) {
    for (const auto& draw : chains[c].draws) {
      const std::vector<double> flat = flatten_hyper(draw.hyper, link);
      for (std::size_t j = 0; j < names.size(); ++j)
        series[j][c].push_back(flat[j]);
    }
  }
  PosteriorSummary summary;
  for (std::size_t j = 0; j < names.size(); ++j) {
    summary.rows.push_back(summarize_scalar_series(names[j], series[j], kNaN));
  }
  {
    std::vector<std::vector<double>> dev(n_chains);
    for (int c = 0; c < n_chains; ++c) dev[c] = chains[c].deviance;
    summary.rows.push_back(summarize_scalar_series("deviance", dev, kNaN));
  }
  if (include_subject_effects) {
    const std::size_t n_sub = chains.front().draws.front().effects.size();
    auto effect_series = [&](auto&& get) {
      std::vector<std::vector<double>> s(n_chains);
      for (int c = 0; c < n_chains; ++c) {
        for (const auto& draw : chains[c].draws) s[c].push_back(get(draw));
      }
      return s;
    };
    for (std::size_t i = 0; i < n_sub; ++i) {
      const std::string idx = "[" + std::to_string(i) + "]";
      const double acc_kappa =
          i < chains.front().acceptance.kappa_rate.size()
              ? chains.front().acceptance.kappa_rate[i]
              : kNaN;
      const double acc_eff =
          i < chains.front().acceptance.effects_rate.size()
              ? chains.front().acceptance.effects_rate[i]
              : kNaN;
      summary.rows.push_back(summarize_scalar_series(
          "alpha_baseline" + idx,
          effect_series([i](const Draw& d) {
            return d.effects[i].alpha_baseline;
          }),
          acc_eff));
      summary.rows.push_back(summarize_scalar_series(
          "beta1" + idx,
          effect_series([i](const Draw& d) { return d.effects[i].beta1; }),
          acc_eff));
      summary.rows.push_back(summarize_scalar_series(
          "beta2" + idx,
          effect_series([i](const Draw& d) { return d.effects[i].beta2; }),
          acc_eff));
      summary.rows.push_back(summarize_scalar_series(
          "kappa" + idx,
          effect_series([i](const Draw& d) { return d.effects[i].kappa; }),
          acc_kappa));
    }
  }
  return summary;
}

std::vector<CurvePoint> population_curves(
    const std::vector<ChainOutput>& chains, const TrialData& data,
    int treatment, const std::vector<double>& grid_weeks) {
  if (treatment < 0 || treatment >= data.n_treatments) {
    throw std::invalid_argument("population_curves: treatment out of range");
  }
  for (double w : grid_weeks) {
    if (!(w >= 0.0) || w > data.study_end_week) {
      throw std::invalid_argument(
          "population_curves: grid week outside [0, study_end_week]");
    }
  }
  std::vector<double> dummies(data.n_dummies(), 0.0);
  if (treatment > 0) dummies[treatment - 1] = 1.0;

  std::vector<std::vector<double>> values(grid_weeks.size());
  for (const auto& chain : chains) {
    for (const auto& draw : chain.draws) {
      SubjectEffects level;
      level.alpha_baseline =
          Hyperparams::level_mean(draw.hyper.gamma_alpha, dummies);
      level.beta1 = Hyperparams::level_mean(draw.hyper.gamma_beta1, dummies);
      level.beta2 = Hyperparams::level_mean(draw.hyper.gamma_beta2, dummies);
      level.kappa = Hyperparams::level_mean(draw.hyper.gamma_kappa, dummies);
      for (std::size_t g = 0; g < grid_weeks.size(); ++g) {
        values[g].push_back(std::exp(eval_trajectory(level, grid_weeks[g])));
      }
    }
  }
  if (!values.empty() && values.front().empty()) {
    throw std::invalid_argument("population_curves: no retained draws");
  }
  std::vector<CurvePoint> out(grid_weeks.size());
  for (std::size_t g = 0; g < grid_weeks.size(); ++g) {
    double mean = 0.0;
    for (double v : values[g]) mean += v;
    out[g].week = grid_weeks[g];
    out[g].mean = mean / static_cast<double>(values[g].size());
    out[g].lower = quantile(values[g], 0.025);
    out[g].upper = quantile(values[g], 0.975);
  }
  return out;
}

}  // namespace dasjoint
