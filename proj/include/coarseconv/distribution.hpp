#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "coarseconv/data_model.hpp"
#include "coarseconv/errors.hpp"
#include "coarseconv/imputation.hpp"

namespace coarseconv {

// Arm-level distribution of the conversion time. The pmf lives on weeks
// 1..K+1 (K+1 = "not converted within the study"); the CDF and hazard are
// reported for weeks 1..K only since F(K+1) = 1 always. Hazard entries are
// NaN where the survivor mass is zero.
struct ConversionDistribution {
  int arm = 0;
  double alpha = 0.0;
  std::vector<double> pmf;     // size K+1
  std::vector<double> cdf;     // size K
  std::vector<double> hazard;  // size K; NaN when undefined

  int K() const { return static_cast<int>(cdf.size()); }
  bool hazard_defined(int k) const { return std::isfinite(hazard[k - 1]); }
};

inline ConversionDistribution distribution_from_pmf(int arm, double alpha,
                                                    std::vector<double> pmf) {
  ConversionDistribution d;
  d.arm = arm;
  d.alpha = alpha;
  const int K = static_cast<int>(pmf.size()) - 1;
  d.pmf = std::move(pmf);
  d.cdf.resize(K);
  d.hazard.resize(K);
  double cum = 0.0;
  for (int k = 1; k <= K; ++k) {
    cum += d.pmf[k - 1];
    d.cdf[k - 1] = cum;
  }
  // Survivor mass at k is sum_{t>=k} pmf(t), accumulated from the tail.
  double tail = d.pmf[K];  // mass at K+1
  for (int k = K; k >= 1; --k) {
    tail += d.pmf[k - 1];
    d.hazard[k - 1] = tail > 0.0
                          ? d.pmf[k - 1] / tail
                          : std::numeric_limits<double>::quiet_NaN();
  }
  return d;
}

// Discrete hazard P[T = k | T >= k]; defined only while survivor mass remains.
inline double hazard(const ConversionDistribution& d, int k) {
  if (k < 1 || k > d.K())
    throw ContractError("hazard: k outside 1..K");
  if (!d.hazard_defined(k))
    throw ContractError("hazard undefined at k=" + std::to_string(k) +
                        ": zero survivor mass");
  return d.hazard[k - 1];
}

inline std::vector<std::optional<double>> hazard_sequence(
    const ConversionDistribution& d) {
  std::vector<std::optional<double>> h(d.K());
  for (int k = 1; k <= d.K(); ++k)
    if (d.hazard_defined(k)) h[k - 1] = d.hazard[k - 1];
  return h;
}

// Per-patient conditional distributions for a whole cohort, plus the pooled
// cavitation proportion used as the standardization weight.
struct CohortImputations {
  int K = 0;
  std::vector<PatientImputation> patients;
  double pooled_cavitation_weight = 0.0;
};

inline CohortImputations precompute_cohort(const Cohort& cohort,
                                           const ModelParams& mp,
                                           ImputationStats* stats = nullptr) {
  CohortImputations ci;
  ci.K = cohort.K;
  ci.patients.reserve(cohort.patients.size());
  int n_cav = 0;
  for (const auto& p : cohort.patients) {
    ci.patients.push_back(precompute_imputation(p, mp, stats));
    n_cav += p.cavitation;
  }
  if (!cohort.patients.empty())
    ci.pooled_cavitation_weight =
        static_cast<double>(n_cav) / static_cast<double>(cohort.patients.size());
  return ci;
}

// Arm-specific marginal distribution of the conversion time at one alpha.
// Unstandardized: plain average of the arm members' conditional pmfs.
// Standardized: cavitation-stratum averages mixed with the pooled-cohort
// cavitation proportion, adjusting for baseline imbalance between arms.
inline ConversionDistribution marginal_distribution(const CohortImputations& ci,
                                                    int arm, double alpha,
                                                    bool standardize) {
  const int K = ci.K;
  std::vector<double> mean_cav(K + 1, 0.0), mean_nocav(K + 1, 0.0);
  int n_cav = 0, n_nocav = 0;
  for (const auto& pi : ci.patients) {
    if (pi.arm != arm) continue;
    const ConditionalDistribution cd = apply_tilt(pi, alpha);
    auto& acc = pi.cavitation ? mean_cav : mean_nocav;
    for (size_t i = 0; i < cd.support.times.size(); ++i)
      acc[cd.support.times[i] - 1] += cd.mass[i];
    (pi.cavitation ? n_cav : n_nocav) += 1;
  }
  const int n = n_cav + n_nocav;
  if (n == 0)
    throw ContractError("marginal_distribution: no patients in arm " +
                        std::to_string(arm));

  std::vector<double> pmf(K + 1, 0.0);
  if (!standardize) {
    for (int t = 0; t <= K; ++t)
      pmf[t] = (mean_cav[t] + mean_nocav[t]) / n;
  } else {
    if (n_cav == 0)
      throw ContractError("standardization: empty stratum (arm " +
                          std::to_string(arm) + ", cavitation 1)");
    if (n_nocav == 0)
      throw ContractError("standardization: empty stratum (arm " +
                          std::to_string(arm) + ", cavitation 0)");
    const double w = ci.pooled_cavitation_weight;
    for (int t = 0; t <= K; ++t)
      pmf[t] = w * mean_cav[t] / n_cav + (1.0 - w) * mean_nocav[t] / n_nocav;
  }
  return distribution_from_pmf(arm, alpha, std::move(pmf));
}

inline ConversionDistribution marginal_distribution(
    const Cohort& cohort, int arm, const ModelParams& mp, const TiltParams& tp,
    bool standardize, ImputationStats* stats = nullptr) {
  const CohortImputations ci = precompute_cohort(cohort, mp, stats);
  return marginal_distribution(ci, arm, tp.for_arm(arm), standardize);
}

struct KolmogorovResult {
  int k_star = 1;
  double distance = 0.0;  // F_alpha(k*) - F_benchmark(k*)
};

// Signed Kolmogorov diagnostic: evaluated over weeks 1..K, taking the
// smallest k on ties so output is deterministic.
inline KolmogorovResult signed_kolmogorov(const ConversionDistribution& d_alpha,
                                          const ConversionDistribution& d_bench) {
  if (d_alpha.K() != d_bench.K())
    throw ContractError("signed_kolmogorov: mismatched K");
  if (d_alpha.arm != d_bench.arm)
    throw ContractError("signed_kolmogorov: mismatched arm");
  KolmogorovResult r;
  double best = -1.0;
  for (int k = 1; k <= d_alpha.K(); ++k) {
    const double diff = d_alpha.cdf[k - 1] - d_bench.cdf[k - 1];
    if (std::abs(diff) > best) {
      best = std::abs(diff);
      r.k_star = k;
      r.distance = diff;
    }
  }
  return r;
}

}  // namespace coarseconv
