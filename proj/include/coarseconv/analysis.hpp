#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coarseconv/bootstrap.hpp"
#include "coarseconv/data_model.hpp"
#include "coarseconv/distribution.hpp"
#include "coarseconv/errors.hpp"
#include "coarseconv/glm.hpp"
#include "coarseconv/imputation.hpp"
#include "coarseconv/treatment_effect.hpp"

namespace coarseconv {

struct AlphaGrid {
  std::vector<double> alpha0;
  std::vector<double> alpha1;
};

inline AlphaGrid default_alpha_grid() {
  AlphaGrid g;
  for (int v = -10; v <= 6; ++v) {
    g.alpha0.push_back(v);
    g.alpha1.push_back(v);
  }
  return g;
}

struct AnalysisConfig {
  int K = 8;
  AlphaGrid grid = default_alpha_grid();
  bool standardize = true;
  double ridge = 0.0;
  int bootstrap_replicates = 1000;  // 0 disables the bootstrap
  std::uint64_t seed = 12345;
  double level = 0.95;
  int threads = 0;
  bool keep_replicates = false;
  bool dump_imputations = false;
};

struct KolmogorovRow {
  int arm = 0;
  double alpha = 0.0;
  int k_star = 1;
  double distance = 0.0;
};

struct ContourRow {
  double alpha0 = 0.0, alpha1 = 0.0;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double odds_ratio = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  std::string error;  // empty on success
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  bool reject_null = false;  // ci_low > 1
};

struct PipelineOutput {
  FitReport fit_a, fit_b, fit_d;
  ModelParams params;
  double pooled_cavitation_weight = 0.0;
  std::vector<ConversionDistribution> distributions;
  std::vector<KolmogorovRow> kolmogorov;
  std::vector<ContourRow> contour;
  ImputationStats stats;
  std::vector<std::string> warnings;
};

namespace detail_analysis {

inline std::string fmt_alpha(double a) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", a);
  return buf;
}

inline void note_dropped(const FitReport& rep, const char* model,
                         const std::vector<std::string>& names,
                         std::vector<std::string>& warnings) {
  for (int j : rep.dropped)
    warnings.push_back(std::string("model ") + model + ": column '" +
                       names[j] + "' is all-zero and was dropped");
}

// Hazard sequences per arm for every alpha in that arm's grid list.
struct ArmCurves {
  std::vector<ConversionDistribution> dists;          // one per alpha
  std::vector<std::vector<std::optional<double>>> hazards;
};

inline ArmCurves arm_curves(const CohortImputations& ci, int arm,
                            const std::vector<double>& alphas,
                            bool standardize) {
  ArmCurves out;
  out.dists.reserve(alphas.size());
  for (double a : alphas) {
    out.dists.push_back(marginal_distribution(ci, arm, a, standardize));
    out.hazards.push_back(hazard_sequence(out.dists.back()));
  }
  return out;
}

}  // namespace detail_analysis

// Point-estimate pipeline: fit the three sub-models, compute the per-arm
// sensitivity curves, the Kolmogorov diagnostics against the benchmark, and
// the treatment-effect contour over the (alpha0, alpha1) grid.
inline PipelineOutput run_pipeline(const Cohort& cohort,
                                   const AnalysisConfig& cfg) {
  if (cohort.K != cfg.K)
    throw ContractError("run_pipeline: cohort K does not match config K");
  if (cfg.grid.alpha0.empty() || cfg.grid.alpha1.empty())
    throw ContractError("run_pipeline: alpha grid is empty");

  PipelineOutput out;
  FitOptions fopt;
  fopt.ridge = cfg.ridge;
  out.fit_a = fit_submodel(cohort, SubModel::A, fopt);
  out.fit_b = fit_submodel(cohort, SubModel::B, fopt);
  out.fit_d = fit_submodel(cohort, SubModel::D, fopt);
  out.params = ModelParams{cohort.K, out.fit_a.coef, out.fit_b.coef,
                           out.fit_d.coef};
  detail_analysis::note_dropped(out.fit_a, "a", coef_names(SubModel::A, cfg.K),
                                out.warnings);
  detail_analysis::note_dropped(out.fit_b, "b", coef_names(SubModel::B, cfg.K),
                                out.warnings);
  detail_analysis::note_dropped(out.fit_d, "d", coef_names(SubModel::D, cfg.K),
                                out.warnings);

  const CohortImputations ci = precompute_cohort(cohort, out.params, &out.stats);
  out.pooled_cavitation_weight = ci.pooled_cavitation_weight;

  const auto curves0 =
      detail_analysis::arm_curves(ci, 0, cfg.grid.alpha0, cfg.standardize);
  const auto curves1 =
      detail_analysis::arm_curves(ci, 1, cfg.grid.alpha1, cfg.standardize);

  for (int arm = 0; arm <= 1; ++arm) {
    const auto& alphas = arm ? cfg.grid.alpha1 : cfg.grid.alpha0;
    const auto& curves = arm ? curves1 : curves0;
    const ConversionDistribution bench =
        marginal_distribution(ci, arm, 0.0, cfg.standardize);
    for (size_t i = 0; i < alphas.size(); ++i) {
      out.distributions.push_back(curves.dists[i]);
      const KolmogorovResult kr = signed_kolmogorov(curves.dists[i], bench);
      out.kolmogorov.push_back({arm, alphas[i], kr.k_star, kr.distance});
    }
  }

  for (size_t i = 0; i < cfg.grid.alpha0.size(); ++i) {
    for (size_t j = 0; j < cfg.grid.alpha1.size(); ++j) {
      ContourRow row;
      row.alpha0 = cfg.grid.alpha0[i];
      row.alpha1 = cfg.grid.alpha1[j];
      try {
        const EffectFit fit = fit_effect(curves0.hazards[i], curves1.hazards[j]);
        row.beta = fit.beta;
        row.odds_ratio = fit.odds_ratio();
        row.converged = fit.converged;
      } catch (const Error& e) {
        row.error = e.what();
      }
      out.contour.push_back(row);
    }
  }
  return out;
}

inline std::vector<std::string> estimand_names(const AnalysisConfig& cfg) {
  std::vector<std::string> names;
  for (auto [model, sm] : {std::pair{"a", SubModel::A},
                           std::pair{"b", SubModel::B},
                           std::pair{"d", SubModel::D}}) {
    for (const std::string& term : coef_names(sm, cfg.K))
      names.push_back(std::string("or:") + model + ":" + term);
  }
  for (double a0 : cfg.grid.alpha0)
    for (double a1 : cfg.grid.alpha1)
      names.push_back("or:effect:a0=" + detail_analysis::fmt_alpha(a0) +
                      ",a1=" + detail_analysis::fmt_alpha(a1));
  return names;
}

// Estimand vector for one (re)sampled cohort: exponentiated sub-model
// coefficients, then the treatment odds ratio at every grid point, in
// estimand_names order. Grid points whose effect fit fails yield NaN; a
// failed sub-model fit throws and fails the whole replicate.
inline std::vector<double> pipeline_estimands(const Cohort& cohort,
                                              const AnalysisConfig& cfg) {
  FitOptions fopt;
  fopt.ridge = cfg.ridge;
  const FitReport fa = fit_submodel(cohort, SubModel::A, fopt);
  const FitReport fb = fit_submodel(cohort, SubModel::B, fopt);
  const FitReport fd = fit_submodel(cohort, SubModel::D, fopt);
  const ModelParams params{cohort.K, fa.coef, fb.coef, fd.coef};

  std::vector<double> est;
  for (const FitReport* rep : {&fa, &fb, &fd}) {
    for (size_t j = 0; j < rep->coef.size(); ++j)
      est.push_back(rep->is_dropped(static_cast<int>(j))
                        ? std::numeric_limits<double>::quiet_NaN()
                        : std::exp(rep->coef[j]));
  }

  const CohortImputations ci = precompute_cohort(cohort, params);
  const auto curves0 =
      detail_analysis::arm_curves(ci, 0, cfg.grid.alpha0, cfg.standardize);
  const auto curves1 =
      detail_analysis::arm_curves(ci, 1, cfg.grid.alpha1, cfg.standardize);
  for (size_t i = 0; i < cfg.grid.alpha0.size(); ++i) {
    for (size_t j = 0; j < cfg.grid.alpha1.size(); ++j) {
      double value = std::numeric_limits<double>::quiet_NaN();
      try {
        value = fit_effect(curves0.hazards[i], curves1.hazards[j]).odds_ratio();
      } catch (const Error&) {
        // leave NaN; recorded via the bootstrap's finite-count bookkeeping
      }
      est.push_back(value);
    }
  }
  return est;
}

struct AnalysisResult {
  PipelineOutput point;
  std::optional<BootstrapOutcome> boot;
};

// Full analysis: point estimates plus percentile intervals from a
// within-arm nonparametric bootstrap that reruns the whole pipeline on each
// replicate. Interval columns are merged into the contour rows.
inline AnalysisResult run_analysis(const Cohort& cohort,
                                   const AnalysisConfig& cfg) {
  AnalysisResult result;
  result.point = run_pipeline(cohort, cfg);

  if (cfg.bootstrap_replicates > 0) {
    BootstrapConfig bcfg;
    bcfg.replicates = cfg.bootstrap_replicates;
    bcfg.seed = cfg.seed;
    bcfg.level = cfg.level;
    bcfg.threads = cfg.threads;
    bcfg.keep_replicates = cfg.keep_replicates;
    result.boot = bootstrap_run(
        cohort,
        [&cfg](const Cohort& c) { return pipeline_estimands(c, cfg); },
        bcfg, estimand_names(cfg));

    const size_t n_coefs = result.point.fit_a.coef.size() +
                           result.point.fit_b.coef.size() +
                           result.point.fit_d.coef.size();
    size_t idx = n_coefs;
    for (ContourRow& row : result.point.contour) {
      row.ci_low = result.boot->lower[idx];
      row.ci_high = result.boot->upper[idx];
      row.reject_null = std::isfinite(row.ci_low) && row.ci_low > 1.0;
      ++idx;
    }
  }
  return result;
}

}  // namespace coarseconv
