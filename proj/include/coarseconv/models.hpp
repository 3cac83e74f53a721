#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "coarseconv/data_model.hpp"
#include "coarseconv/errors.hpp"

namespace coarseconv {

inline double expit(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// Previous-visit features shared by all sub-models. All four are gated to
// zero at week 1, where there is no previous visit.
struct LagFeatures {
  double culture_missing = 0;        // M_{k-1} for culture
  double culture_obs_negative = 0;   // observed and negative at k-1
  double smear_missing = 0;
  double smear_obs_negative = 0;
};

inline LagFeatures lag_features_from(TestResult culture_prev,
                                     TestResult smear_prev) {
  LagFeatures f;
  f.culture_missing = is_missing(culture_prev) ? 1.0 : 0.0;
  f.culture_obs_negative =
      (!is_missing(culture_prev) && negativity(culture_prev) == 1) ? 1.0 : 0.0;
  f.smear_missing = is_missing(smear_prev) ? 1.0 : 0.0;
  f.smear_obs_negative =
      (!is_missing(smear_prev) && negativity(smear_prev) == 1) ? 1.0 : 0.0;
  return f;
}

inline LagFeatures lag_features(const PatientRecord& p, int week) {
  if (week <= 1) return LagFeatures{};
  const VisitRecord& prev = p.visit(week - 1);
  return lag_features_from(prev.culture, prev.smear);
}

// Sub-model identifiers:
//   A: culture missing at week k
//   B: culture negative at week k, given observed
//   D: smear negative at week k, given observed
// The smear-missingness law (SmearMissParams below) is never fitted by the
// analysis; the target probabilities do not depend on it. It exists so the
// simulator and the enumeration oracles can carry a full data law.
enum class SubModel { A, B, D };

// Coefficient layouts. Model A has per-week intercepts and per-week
// cavitation interactions; B and D have per-week intercepts plus a single
// cavitation main effect. Kept as plain index arithmetic so the design
// matrix builder and the pointwise predictors cannot disagree.
namespace layout {

inline int a_size(int K) { return 2 * K + 5; }
inline int a_week(int /*K*/, int wk) { return wk - 1; }
inline int a_week_cav(int K, int wk) { return K + wk - 1; }
inline int a_lag_culture_missing(int K) { return 2 * K + 0; }
inline int a_lag_culture_neg(int K) { return 2 * K + 1; }
inline int a_lag_smear_missing(int K) { return 2 * K + 2; }
inline int a_lag_smear_neg(int K) { return 2 * K + 3; }
inline int a_treatment(int K) { return 2 * K + 4; }

inline int b_size(int K) { return K + 6; }
inline int b_week(int /*K*/, int wk) { return wk - 1; }
inline int b_lag_culture_missing(int K) { return K + 0; }
inline int b_lag_culture_neg(int K) { return K + 1; }
inline int b_lag_smear_missing(int K) { return K + 2; }
inline int b_lag_smear_neg(int K) { return K + 3; }
inline int b_treatment(int K) { return K + 4; }
inline int b_cavitation(int K) { return K + 5; }

inline int d_size(int K) { return K + 9; }
inline int d_week(int /*K*/, int wk) { return wk - 1; }
inline int d_cur_culture_missing(int K) { return K + 0; }
inline int d_cur_culture_neg(int K) { return K + 1; }
inline int d_cur_culture_neg_cav(int K) { return K + 2; }
inline int d_lag_culture_missing(int K) { return K + 3; }
inline int d_lag_culture_neg(int K) { return K + 4; }
inline int d_lag_smear_missing(int K) { return K + 5; }
inline int d_lag_smear_neg(int K) { return K + 6; }
inline int d_treatment(int K) { return K + 7; }
inline int d_cavitation(int K) { return K + 8; }

// Smear-missingness law: no culture-value terms (current or lagged), only
// missingness indicators; under that restriction the law cancels out of the
// conversion-time probabilities.
inline int c_size(int K) { return K + 6; }
inline int c_week(int /*K*/, int wk) { return wk - 1; }
inline int c_cur_culture_missing(int K) { return K + 0; }
inline int c_lag_culture_missing(int K) { return K + 1; }
inline int c_lag_smear_missing(int K) { return K + 2; }
inline int c_lag_smear_neg(int K) { return K + 3; }
inline int c_treatment(int K) { return K + 4; }
inline int c_cavitation(int K) { return K + 5; }

}  // namespace layout

inline int n_coef(SubModel m, int K) {
  switch (m) {
    case SubModel::A: return layout::a_size(K);
    case SubModel::B: return layout::b_size(K);
    default: return layout::d_size(K);
  }
}

inline std::vector<std::string> coef_names(SubModel m, int K) {
  std::vector<std::string> names;
  for (int wk = 1; wk <= K; ++wk) names.push_back("wk" + std::to_string(wk));
  if (m == SubModel::A) {
    for (int wk = 1; wk <= K; ++wk)
      names.push_back("wk" + std::to_string(wk) + "_cav");
  }
  if (m == SubModel::D) {
    names.push_back("cur_culture_missing");
    names.push_back("cur_culture_neg");
    names.push_back("cur_culture_neg_cav");
  }
  names.push_back("lag_culture_missing");
  names.push_back("lag_culture_neg");
  names.push_back("lag_smear_missing");
  names.push_back("lag_smear_neg");
  names.push_back("treatment");
  if (m != SubModel::A) names.push_back("cavitation");
  return names;
}

// Fitted coefficients of the three analysis sub-models.
struct ModelParams {
  int K = 0;
  std::vector<double> a, b, d;

  bool sized() const {
    return static_cast<int>(a.size()) == layout::a_size(K) &&
           static_cast<int>(b.size()) == layout::b_size(K) &&
           static_cast<int>(d.size()) == layout::d_size(K);
  }
};

// Smear-missingness coefficients; simulator / oracle / injection-test only.
struct SmearMissParams {
  int K = 0;
  std::vector<double> c;
};

inline double linpred_a(const std::vector<double>& g, int K, int week,
                        const LagFeatures& lf, int cav, int arm) {
  namespace L = layout;
  double eta = g[L::a_week(K, week)];
  if (cav) eta += g[L::a_week_cav(K, week)];
  eta += lf.culture_missing * g[L::a_lag_culture_missing(K)];
  eta += lf.culture_obs_negative * g[L::a_lag_culture_neg(K)];
  eta += lf.smear_missing * g[L::a_lag_smear_missing(K)];
  eta += lf.smear_obs_negative * g[L::a_lag_smear_neg(K)];
  if (arm) eta += g[L::a_treatment(K)];
  return eta;
}

inline double linpred_b(const std::vector<double>& g, int K, int week,
                        const LagFeatures& lf, int cav, int arm) {
  namespace L = layout;
  double eta = g[L::b_week(K, week)];
  eta += lf.culture_missing * g[L::b_lag_culture_missing(K)];
  eta += lf.culture_obs_negative * g[L::b_lag_culture_neg(K)];
  eta += lf.smear_missing * g[L::b_lag_smear_missing(K)];
  eta += lf.smear_obs_negative * g[L::b_lag_smear_neg(K)];
  if (arm) eta += g[L::b_treatment(K)];
  if (cav) eta += g[L::b_cavitation(K)];
  return eta;
}

inline double linpred_d(const std::vector<double>& g, int K, int week,
                        double cur_culture_missing, double cur_culture_neg,
                        const LagFeatures& lf, int cav, int arm) {
  namespace L = layout;
  double eta = g[L::d_week(K, week)];
  eta += cur_culture_missing * g[L::d_cur_culture_missing(K)];
  eta += cur_culture_neg * g[L::d_cur_culture_neg(K)];
  eta += cur_culture_neg * (cav ? 1.0 : 0.0) * g[L::d_cur_culture_neg_cav(K)];
  eta += lf.culture_missing * g[L::d_lag_culture_missing(K)];
  eta += lf.culture_obs_negative * g[L::d_lag_culture_neg(K)];
  eta += lf.smear_missing * g[L::d_lag_smear_missing(K)];
  eta += lf.smear_obs_negative * g[L::d_lag_smear_neg(K)];
  if (arm) eta += g[L::d_treatment(K)];
  if (cav) eta += g[L::d_cavitation(K)];
  return eta;
}

inline double linpred_c(const std::vector<double>& g, int K, int week,
                        double cur_culture_missing, const LagFeatures& lf,
                        int cav, int arm) {
  namespace L = layout;
  double eta = g[L::c_week(K, week)];
  eta += cur_culture_missing * g[L::c_cur_culture_missing(K)];
  eta += lf.culture_missing * g[L::c_lag_culture_missing(K)];
  eta += lf.smear_missing * g[L::c_lag_smear_missing(K)];
  eta += lf.smear_obs_negative * g[L::c_lag_smear_neg(K)];
  if (arm) eta += g[L::c_treatment(K)];
  if (cav) eta += g[L::c_cavitation(K)];
  return eta;
}

}  // namespace coarseconv
