#pragma once

#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "coarseconv/coarsening.hpp"
#include "coarseconv/data_model.hpp"
#include "coarseconv/errors.hpp"
#include "coarseconv/models.hpp"

namespace coarseconv {

// Treatment-specific sensitivity parameters; 0 is the benchmark assumption.
struct TiltParams {
  double alpha0 = 0.0;
  double alpha1 = 0.0;

  double for_arm(int arm) const { return arm ? alpha1 : alpha0; }
};

// Exponential tilt of a probability: multiplies its odds by e^alpha. Exact at
// alpha = 0; computed on the logit scale for large |alpha| so the bounds at
// alpha -> +/-inf are attained without overflow.
inline double tilt(double p0, double alpha) {
  if (alpha == 0.0) return p0;
  if (p0 <= 0.0) return 0.0;
  if (p0 >= 1.0) return 1.0;
  if (std::abs(alpha) > 30.0) return expit(logit(p0) + alpha);
  const double num = p0 * std::exp(alpha);
  return num / (num + (1.0 - p0));
}

// Counters reported alongside analysis output.
struct ImputationStats {
  long long clamp_events = 0;
};

namespace detail {

inline void check_factor_finite(double value, const char* factor, int week) {
  if (!std::isfinite(value))
    throw Error(std::string("non-finite ") + factor + " factor at week " +
                std::to_string(week));
}

}  // namespace detail

// Likelihood kernel for the hypothesis "the culture at target_week, had it
// been observed, equals y" (y = 1 negative, y = 0 positive), holding the rest
// of the patient's conditioning data fixed: the culture at the following
// visit is observed negative and the smear record is as recorded. Collects
// only the factors that depend on y:
//   - culture-missingness complement at the following visit,
//   - culture-value likelihood at the target and following visits,
//   - smear-value likelihood at the target and following visits, each only
//     when that smear is observed.
// Factors that would reference visits beyond K are treated as 1. The
// smear-missingness law cancels from the ratio and is omitted; `cmodel`
// multiplies its factors back in (used to verify the cancellation).
inline double g_factor(const PatientRecord& p, int target_week, int y,
                       const ModelParams& mp,
                       const SmearMissParams* cmodel = nullptr) {
  const int K = mp.K;
  const int w = target_week;
  const int arm = p.arm;
  const int cav = p.cavitation;

  const LagFeatures lf_actual = lag_features(p, w);
  // Lag context for visit w+1 under the hypothesis: culture at w observed
  // with value y, smear at w as recorded.
  LagFeatures lf_hyp;
  lf_hyp.culture_missing = 0.0;
  lf_hyp.culture_obs_negative = y ? 1.0 : 0.0;
  lf_hyp.smear_missing = is_missing(p.visit(w).smear) ? 1.0 : 0.0;
  lf_hyp.smear_obs_negative =
      (!is_missing(p.visit(w).smear) && negativity(p.visit(w).smear)) ? 1.0
                                                                      : 0.0;

  double g = 1.0;

  const double pb_w = expit(linpred_b(mp.b, K, w, lf_actual, cav, arm));
  g *= y ? pb_w : 1.0 - pb_w;
  detail::check_factor_finite(g, "culture-value", w);

  if (w + 1 <= K) {
    const double pa = expit(linpred_a(mp.a, K, w + 1, lf_hyp, cav, arm));
    g *= 1.0 - pa;
    detail::check_factor_finite(g, "culture-missingness", w + 1);

    const double pb_next = expit(linpred_b(mp.b, K, w + 1, lf_hyp, cav, arm));
    g *= pb_next;
    detail::check_factor_finite(g, "culture-value", w + 1);
  }

  if (!is_missing(p.visit(w).smear)) {
    const double pd =
        expit(linpred_d(mp.d, K, w, /*cur_culture_missing=*/0.0,
                        /*cur_culture_neg=*/y ? 1.0 : 0.0, lf_actual, cav,
                        arm));
    g *= negativity(p.visit(w).smear) ? pd : 1.0 - pd;
    detail::check_factor_finite(g, "smear-value", w);
  }
  if (w + 1 <= K && !is_missing(p.visit(w + 1).smear)) {
    const double pd = expit(linpred_d(mp.d, K, w + 1, 0.0, 1.0, lf_hyp, cav,
                                      arm));
    g *= negativity(p.visit(w + 1).smear) ? pd : 1.0 - pd;
    detail::check_factor_finite(g, "smear-value", w + 1);
  }

  if (cmodel) {
    const double pc_w =
        expit(linpred_c(cmodel->c, K, w, 0.0, lf_actual, cav, arm));
    g *= is_missing(p.visit(w).smear) ? pc_w : 1.0 - pc_w;
    detail::check_factor_finite(g, "smear-missingness", w);
    if (w + 1 <= K) {
      const double pc_next =
          expit(linpred_c(cmodel->c, K, w + 1, 0.0, lf_hyp, cav, arm));
      g *= is_missing(p.visit(w + 1).smear) ? pc_next : 1.0 - pc_next;
      detail::check_factor_finite(g, "smear-missingness", w + 1);
    }
  }

  return g;
}

// Model-based probability that the culture at visit k-1 is positive given the
// matched stratum in which that culture is observed and later cultures are
// observed negative; this is the benchmark value of P[T = k | T <= k, data].
// Requires a multi-element coarsening set with k in it and k > L.
inline double benchmark_prob(const PatientRecord& p, int k,
                             const ModelParams& mp,
                             const SmearMissParams* cmodel = nullptr) {
  const CoarseningSet cs = coarsening_set(p);
  if (cs.singleton())
    throw ContractError("benchmark_prob: conversion time is determined");
  if (!cs.contains(k))
    throw ContractError("benchmark_prob: k=" + std::to_string(k) +
                        " not in the coarsening set");
  if (k == cs.L)
    throw ContractError("benchmark_prob: k equals L; P[T=L|T<=L,data]=1");

  const double g0 = g_factor(p, k - 1, 0, mp, cmodel);
  const double g1 = g_factor(p, k - 1, 1, mp, cmodel);
  const double denom = g0 + g1;
  if (!(denom > 0.0) || !std::isfinite(denom))
    throw Error("benchmark_prob: degenerate likelihood kernel for patient '" +
                p.id + "' at k=" + std::to_string(k));
  return g0 / denom;
}

// Conditional distribution of the conversion time over a patient's
// coarsening set.
struct ConditionalDistribution {
  std::string patient_id;
  CoarseningSet support;
  std::vector<double> mass;  // aligned with support.times

  // Dense view over weeks 1..K+1 (index t-1); exactly zero off the support.
  std::vector<double> pmf_vector(int K) const {
    std::vector<double> pmf(K + 1, 0.0);
    for (size_t i = 0; i < support.times.size(); ++i)
      pmf[support.times[i] - 1] = mass[i];
    return pmf;
  }
};

// Everything about a patient that the sensitivity analysis reuses across
// alpha values: the coarsening set and the benchmark probabilities for each
// feasible time above L. Benchmark values are clamped away from {0,1} so the
// tilt's odds identity stays numerically stable; clamps are counted.
struct PatientImputation {
  std::string id;
  int arm = 0;
  int cavitation = 0;
  CoarseningSet cs;
  std::vector<double> benchmark;  // for cs.times[1..], size |times|-1
};

inline constexpr double kBenchmarkClamp = 1e-15;

inline PatientImputation precompute_imputation(const PatientRecord& p,
                                               const ModelParams& mp,
                                               ImputationStats* stats = nullptr) {
  PatientImputation pi;
  pi.id = p.id;
  pi.arm = p.arm;
  pi.cavitation = p.cavitation;
  pi.cs = coarsening_set(p);
  if (pi.cs.singleton()) return pi;
  pi.benchmark.reserve(pi.cs.times.size() - 1);
  for (size_t i = 1; i < pi.cs.times.size(); ++i) {
    double q = benchmark_prob(p, pi.cs.times[i], mp);
    if (q < kBenchmarkClamp || q > 1.0 - kBenchmarkClamp) {
      q = std::min(std::max(q, kBenchmarkClamp), 1.0 - kBenchmarkClamp);
      if (stats) ++stats->clamp_events;
    }
    pi.benchmark.push_back(q);
  }
  return pi;
}

// Reverse-time product over the coarsening set: with q_t the tilted
// probability of T = t given T <= t, the mass at the largest element is
// q_{R+1}, interior elements get (1-q_{R+1}) * prod of (1-q_s) above them
// times q_t, and L absorbs the rest (P[T=L | T<=L] = 1).
inline ConditionalDistribution apply_tilt(const PatientImputation& pi,
                                          double alpha) {
  ConditionalDistribution cd;
  cd.patient_id = pi.id;
  cd.support = pi.cs;
  const size_t m = pi.cs.times.size();
  cd.mass.assign(m, 0.0);
  if (m == 1) {
    cd.mass[0] = 1.0;
    return cd;
  }
  std::vector<double> q(m, 0.0);
  for (size_t i = 1; i < m; ++i) q[i] = tilt(pi.benchmark[i - 1], alpha);

  cd.mass[m - 1] = q[m - 1];
  double survivor = 1.0 - q[m - 1];  // P[T < current position | data]
  for (size_t i = m - 2; i >= 1; --i) {
    cd.mass[i] = survivor * q[i];
    survivor *= 1.0 - q[i];
  }
  cd.mass[0] = survivor;
  return cd;
}

inline ConditionalDistribution conditional_distribution(
    const PatientRecord& p, const ModelParams& mp, const TiltParams& tp,
    ImputationStats* stats = nullptr) {
  const PatientImputation pi = precompute_imputation(p, mp, stats);
  return apply_tilt(pi, tp.for_arm(p.arm));
}

}  // namespace coarseconv
