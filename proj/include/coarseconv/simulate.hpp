#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "coarseconv/data_model.hpp"
#include "coarseconv/enumeration.hpp"
#include "coarseconv/errors.hpp"
#include "coarseconv/models.hpp"
#include "coarseconv/rng.hpp"

namespace coarseconv {

// Synthetic-cohort configuration: the full observed-data law (including a
// smear-missingness component, so the cancellation property is exercised by
// a nontrivial law) plus cavitation prevalence per arm.
struct SimConfig {
  int K = 8;
  int n_per_arm = 100;
  double cav_prevalence[2] = {0.5, 0.5};
  JointLaw law;
  std::uint64_t seed = 1;
};

// Samples a cohort by running the sequential factorization forward: for each
// visit, culture missingness, then the culture value if observed, then smear
// missingness, then the smear value if observed. Each patient draws from its
// own substream, so the records do not depend on cohort size or on the order
// patients are generated in.
inline Cohort generate(const SimConfig& cfg) {
  if (cfg.K < 1 || cfg.n_per_arm < 1)
    throw ContractError("generate: K and n_per_arm must be >= 1");
  const int K = cfg.K;

  Cohort cohort;
  cohort.K = K;
  char idbuf[32];
  for (int arm = 0; arm <= 1; ++arm) {
    for (int i = 0; i < cfg.n_per_arm; ++i) {
      Rng rng(cfg.seed, {static_cast<std::uint64_t>(arm),
                         static_cast<std::uint64_t>(i)});
      PatientRecord p;
      std::snprintf(idbuf, sizeof(idbuf), "z%d_%06d", arm, i);
      p.id = idbuf;
      p.arm = arm;
      p.cavitation = rng.bernoulli(cfg.cav_prevalence[arm]) ? 1 : 0;
      p.visits.resize(K);
      for (int k = 1; k <= K; ++k) {
        const LagFeatures lf = lag_features(p, k);
        VisitRecord& v = p.visits[k - 1];
        v.week = k;

        const double pa =
            expit(linpred_a(cfg.law.abd.a, K, k, lf, p.cavitation, arm));
        const bool culture_missing = rng.bernoulli(pa);
        double cur_neg = 0.0;
        if (culture_missing) {
          v.culture = TestResult::Missing;
        } else {
          const double pb =
              expit(linpred_b(cfg.law.abd.b, K, k, lf, p.cavitation, arm));
          v.culture =
              rng.bernoulli(pb) ? TestResult::Negative : TestResult::Positive;
          cur_neg = v.culture == TestResult::Negative ? 1.0 : 0.0;
        }

        const double pc =
            expit(linpred_c(cfg.law.smear_missing.c, K, k,
                            culture_missing ? 1.0 : 0.0, lf, p.cavitation,
                            arm));
        if (rng.bernoulli(pc)) {
          v.smear = TestResult::Missing;
        } else {
          const double pd = expit(linpred_d(cfg.law.abd.d, K, k,
                                            culture_missing ? 1.0 : 0.0,
                                            cur_neg, lf, p.cavitation, arm));
          v.smear =
              rng.bernoulli(pd) ? TestResult::Negative : TestResult::Positive;
        }
      }
      cohort.patients.push_back(std::move(p));
    }
  }
  return cohort;
}

// Built-in data law with moderate missingness (~15% of cultures per visit),
// conversion probability rising over the study, a treatment effect on
// culture negativity, and imbalanced cavitation prevalence between arms.
inline SimConfig default_scenario(int K, int n_per_arm, std::uint64_t seed) {
  SimConfig cfg;
  cfg.K = K;
  cfg.n_per_arm = n_per_arm;
  cfg.seed = seed;
  cfg.cav_prevalence[0] = 0.45;
  cfg.cav_prevalence[1] = 0.55;

  namespace L = layout;
  ModelParams& mp = cfg.law.abd;
  mp.K = K;
  mp.a.assign(L::a_size(K), 0.0);
  mp.b.assign(L::b_size(K), 0.0);
  mp.d.assign(L::d_size(K), 0.0);
  cfg.law.smear_missing.K = K;
  cfg.law.smear_missing.c.assign(L::c_size(K), 0.0);

  for (int wk = 1; wk <= K; ++wk) {
    mp.a[L::a_week(K, wk)] = -1.9;
    mp.a[L::a_week_cav(K, wk)] = 0.2;
    mp.b[L::b_week(K, wk)] = -1.2 + 0.35 * (wk - 1);
    mp.d[L::d_week(K, wk)] = -0.8;
    cfg.law.smear_missing.c[L::c_week(K, wk)] = -2.2;
  }
  mp.a[L::a_lag_culture_missing(K)] = 0.8;
  mp.a[L::a_lag_culture_neg(K)] = -0.2;
  mp.a[L::a_lag_smear_missing(K)] = 0.6;
  mp.a[L::a_lag_smear_neg(K)] = 0.1;
  mp.a[L::a_treatment(K)] = 0.1;

  mp.b[L::b_lag_culture_missing(K)] = 0.5;
  mp.b[L::b_lag_culture_neg(K)] = 1.6;
  mp.b[L::b_lag_smear_missing(K)] = 0.4;
  mp.b[L::b_lag_smear_neg(K)] = 0.9;
  mp.b[L::b_treatment(K)] = 0.7;
  mp.b[L::b_cavitation(K)] = -0.5;

  mp.d[L::d_cur_culture_missing(K)] = 0.3;
  mp.d[L::d_cur_culture_neg(K)] = 1.8;
  mp.d[L::d_cur_culture_neg_cav(K)] = -0.4;
  mp.d[L::d_lag_culture_missing(K)] = 0.2;
  mp.d[L::d_lag_culture_neg(K)] = 0.3;
  mp.d[L::d_lag_smear_missing(K)] = 0.5;
  mp.d[L::d_lag_smear_neg(K)] = 1.2;
  mp.d[L::d_treatment(K)] = 0.2;
  mp.d[L::d_cavitation(K)] = -0.3;

  auto& c = cfg.law.smear_missing.c;
  c[L::c_cur_culture_missing(K)] = 1.5;
  c[L::c_lag_culture_missing(K)] = 0.5;
  c[L::c_lag_smear_missing(K)] = 0.8;
  c[L::c_lag_smear_neg(K)] = 0.0;
  c[L::c_treatment(K)] = 0.0;
  c[L::c_cavitation(K)] = 0.1;
  return cfg;
}

}  // namespace coarseconv
