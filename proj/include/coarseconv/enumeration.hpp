#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "coarseconv/coarsening.hpp"
#include "coarseconv/data_model.hpp"
#include "coarseconv/errors.hpp"
#include "coarseconv/imputation.hpp"
#include "coarseconv/models.hpp"

namespace coarseconv {

// Complete observed-data law: the three analysis sub-models plus a
// smear-missingness law, so the probability of any full data configuration
// is defined. Used only by the brute-force oracles and the simulator.
struct JointLaw {
  ModelParams abd;
  SmearMissParams smear_missing;

  int K() const { return abd.K; }
};

// Conversion time of a fully observed culture sequence: one past the last
// positive visit (so K+1 when the week-K culture is positive, 1 when all are
// negative).
inline int conversion_time_complete(const std::vector<TestResult>& cultures) {
  int last_positive = 0;
  for (size_t j = 0; j < cultures.size(); ++j) {
    if (cultures[j] == TestResult::Positive)
      last_positive = static_cast<int>(j) + 1;
  }
  return last_positive + 1;
}

// All conversion times realizable by completing the missing cultures of a
// patient; the brute-force counterpart of coarsening_set.
inline std::vector<int> enumerate_T_distribution(const PatientRecord& p) {
  const int K = p.num_weeks();
  std::vector<int> missing_weeks;
  std::vector<TestResult> cultures(K);
  for (int k = 1; k <= K; ++k) {
    cultures[k - 1] = p.visit(k).culture;
    if (is_missing(cultures[k - 1])) missing_weeks.push_back(k);
  }
  std::set<int> times;
  const size_t m = missing_weeks.size();
  for (size_t mask = 0; mask < (size_t{1} << m); ++mask) {
    for (size_t j = 0; j < m; ++j)
      cultures[missing_weeks[j] - 1] = (mask >> j) & 1
                                           ? TestResult::Negative
                                           : TestResult::Positive;
    times.insert(conversion_time_complete(cultures));
  }
  return {times.begin(), times.end()};
}

namespace detail_enum {

// One visit's observed-data state, for configuration enumeration.
struct VisitState {
  TestResult culture = TestResult::Missing;
  TestResult smear = TestResult::Missing;
};

inline VisitState decode_state(int code) {
  static constexpr TestResult kMap[3] = {TestResult::Missing,
                                         TestResult::Negative,
                                         TestResult::Positive};
  return VisitState{kMap[code % 3], kMap[code / 3]};
}

// Forward product over visits of all four sub-model factors.
inline double config_probability(const JointLaw& law,
                                 const std::vector<VisitState>& states,
                                 int cav, int arm) {
  const int K = law.K();
  double prob = 1.0;
  for (int k = 1; k <= K; ++k) {
    const VisitState& s = states[k - 1];
    const LagFeatures lf =
        k == 1 ? LagFeatures{}
               : lag_features_from(states[k - 2].culture, states[k - 2].smear);

    const double pa = expit(linpred_a(law.abd.a, K, k, lf, cav, arm));
    prob *= is_missing(s.culture) ? pa : 1.0 - pa;

    const double cur_mc = is_missing(s.culture) ? 1.0 : 0.0;
    double cur_neg = 0.0;
    if (!is_missing(s.culture)) {
      const double pb = expit(linpred_b(law.abd.b, K, k, lf, cav, arm));
      prob *= negativity(s.culture) ? pb : 1.0 - pb;
      cur_neg = negativity(s.culture) ? 1.0 : 0.0;
    }

    const double pc =
        expit(linpred_c(law.smear_missing.c, K, k, cur_mc, lf, cav, arm));
    prob *= is_missing(s.smear) ? pc : 1.0 - pc;

    if (!is_missing(s.smear)) {
      const double pd =
          expit(linpred_d(law.abd.d, K, k, cur_mc, cur_neg, lf, cav, arm));
      prob *= negativity(s.smear) ? pd : 1.0 - pd;
    }
  }
  return prob;
}

// Iterates every configuration of K visits (9^K states) and calls fn.
template <typename Fn>
inline void for_each_config(int K, Fn&& fn) {
  std::vector<int> codes(K, 0);
  std::vector<VisitState> states(K);
  for (int k = 0; k < K; ++k) states[k] = decode_state(0);
  for (;;) {
    fn(const_cast<const std::vector<VisitState>&>(states));
    int pos = 0;
    while (pos < K) {
      if (++codes[pos] < 9) {
        states[pos] = decode_state(codes[pos]);
        break;
      }
      codes[pos] = 0;
      states[pos] = decode_state(0);
      ++pos;
    }
    if (pos == K) break;
  }
}

// Membership test for the matched stratum o^(k-1): cultures before k-1 and
// the full smear record match the pattern, the culture at k-1 is observed
// (either value), and cultures from k on are observed negative.
inline bool in_conditioning_event(const std::vector<VisitState>& states,
                                  const PatientRecord& pattern, int k) {
  const int K = pattern.num_weeks();
  for (int j = 1; j <= K; ++j) {
    const VisitState& s = states[j - 1];
    if (s.smear != pattern.visit(j).smear) return false;
    if (j <= k - 2) {
      if (s.culture != pattern.visit(j).culture) return false;
    } else if (j == k - 1) {
      if (is_missing(s.culture)) return false;
    } else {
      if (s.culture != TestResult::Negative) return false;
    }
  }
  return true;
}

inline void check_conditional_args(const PatientRecord& pattern, int k) {
  const CoarseningSet cs = coarsening_set(pattern);
  if (cs.singleton() || !cs.contains(k) || k == cs.L)
    throw ContractError(
        "enumerate_conditional: k must lie in a multi-element coarsening set "
        "above L");
}

}  // namespace detail_enum

// Sums joint-law probabilities over every configuration to check the law is
// proper. Exponential in K.
inline double total_probability(const JointLaw& law, int cav, int arm) {
  double total = 0.0;
  detail_enum::for_each_config(law.K(), [&](const auto& states) {
    total += detail_enum::config_probability(law, states, cav, arm);
  });
  return total;
}

// Ground-truth conditional P[culture at k-1 positive | matched stratum] by
// exhaustive enumeration of all data configurations, testing each for event
// membership. Exponential in K; capped at K <= 6.
inline double enumerate_conditional(const PatientRecord& pattern, int k,
                                    const JointLaw& law) {
  const int K = pattern.num_weeks();
  if (K > 6)
    throw ContractError("enumerate_conditional: exhaustive scan capped at K=6");
  if (K != law.K()) throw ContractError("enumerate_conditional: K mismatch");
  detail_enum::check_conditional_args(pattern, k);

  double p_event = 0.0, p_positive = 0.0;
  detail_enum::for_each_config(K, [&](const auto& states) {
    if (!detail_enum::in_conditioning_event(states, pattern, k)) return;
    const double prob = detail_enum::config_probability(
        law, states, pattern.cavitation, pattern.arm);
    p_event += prob;
    if (states[k - 2].culture == TestResult::Positive) p_positive += prob;
  });
  if (!(p_event > 0.0))
    throw Error("enumerate_conditional: conditioning event has zero "
                "probability under the law");
  return p_positive / p_event;
}

// Same conditional, summing only over the configurations inside the event
// (which pin every coordinate except the culture value at k-1). Identical
// value to enumerate_conditional; usable at any K.
inline double enumerate_conditional_event(const PatientRecord& pattern, int k,
                                          const JointLaw& law) {
  const int K = pattern.num_weeks();
  if (K != law.K()) throw ContractError("enumerate_conditional: K mismatch");
  detail_enum::check_conditional_args(pattern, k);

  std::vector<detail_enum::VisitState> states(K);
  for (int j = 1; j <= K; ++j) {
    states[j - 1].smear = pattern.visit(j).smear;
    if (j <= k - 2)
      states[j - 1].culture = pattern.visit(j).culture;
    else
      states[j - 1].culture = TestResult::Negative;
  }
  states[k - 2].culture = TestResult::Positive;
  const double p_positive = detail_enum::config_probability(
      law, states, pattern.cavitation, pattern.arm);
  states[k - 2].culture = TestResult::Negative;
  const double p_negative = detail_enum::config_probability(
      law, states, pattern.cavitation, pattern.arm);
  const double p_event = p_positive + p_negative;
  if (!(p_event > 0.0))
    throw Error("enumerate_conditional: conditioning event has zero "
                "probability under the law");
  return p_positive / p_event;
}

// Exact arm-specific marginal pmf of the conversion time implied by a data
// law: mixes the per-configuration conditional distributions (computed with
// `impute_with` at the given tilt) over the exact configuration
// probabilities, standardizing cavitation strata with `cav_weight`.
// This is the population quantity the sample estimator converges to.
inline std::vector<double> enumerate_marginal_pmf(const JointLaw& law, int arm,
                                                  const ModelParams& impute_with,
                                                  const TiltParams& tp,
                                                  double cav_weight) {
  const int K = law.K();
  std::vector<double> pmf(K + 1, 0.0);
  for (int cav = 0; cav <= 1; ++cav) {
    std::vector<double> stratum(K + 1, 0.0);
    double stratum_total = 0.0;
    detail_enum::for_each_config(K, [&](const auto& states) {
      const double prob =
          detail_enum::config_probability(law, states, cav, arm);
      if (prob <= 0.0) return;
      PatientRecord p;
      p.id = "enum";
      p.arm = arm;
      p.cavitation = cav;
      p.visits.resize(K);
      for (int j = 1; j <= K; ++j)
        p.visits[j - 1] = VisitRecord{j, states[j - 1].culture,
                                      states[j - 1].smear};
      const ConditionalDistribution cd =
          conditional_distribution(p, impute_with, tp);
      for (size_t i = 0; i < cd.support.times.size(); ++i)
        stratum[cd.support.times[i] - 1] += prob * cd.mass[i];
      stratum_total += prob;
    });
    const double w = cav ? cav_weight : 1.0 - cav_weight;
    for (int t = 0; t <= K; ++t) pmf[t] += w * stratum[t] / stratum_total;
  }
  return pmf;
}

}  // namespace coarseconv
