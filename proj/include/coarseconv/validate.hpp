#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "coarseconv/coarsening.hpp"
#include "coarseconv/enumeration.hpp"
#include "coarseconv/imputation.hpp"
#include "coarseconv/rng.hpp"
#include "coarseconv/simulate.hpp"

namespace coarseconv {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail_validate {

inline PatientRecord pattern_patient(const std::vector<TestResult>& cultures,
                                     const std::vector<TestResult>& smears,
                                     int arm = 0, int cav = 0) {
  PatientRecord p;
  p.id = "pattern";
  p.arm = arm;
  p.cavitation = cav;
  for (size_t k = 0; k < cultures.size(); ++k)
    p.visits.push_back(
        {static_cast<int>(k) + 1, cultures[k], smears[k]});
  return p;
}

inline std::vector<TestResult> decode_cultures(const std::string& s) {
  std::vector<TestResult> out;
  for (char c : s)
    out.push_back(c == '-'   ? TestResult::Negative
                  : c == '+' ? TestResult::Positive
                             : TestResult::Missing);
  return out;
}

inline TestResult random_result(Rng& rng) {
  switch (rng.uniform_int(3)) {
    case 0: return TestResult::Negative;
    case 1: return TestResult::Positive;
    default: return TestResult::Missing;
  }
}

inline PatientRecord random_pattern(Rng& rng, int K) {
  PatientRecord p;
  p.id = "rand";
  p.arm = rng.uniform_int(2);
  p.cavitation = rng.uniform_int(2);
  for (int k = 1; k <= K; ++k)
    p.visits.push_back({k, random_result(rng), random_result(rng)});
  return p;
}

inline JointLaw random_law(Rng& rng, int K, double scale = 1.5) {
  JointLaw law = default_scenario(K, 1, 0).law;
  for (auto* v : {&law.abd.a, &law.abd.b, &law.abd.d, &law.smear_missing.c})
    for (double& x : *v) x = rng.uniform(-scale, scale);
  return law;
}

template <typename Fn>
inline CheckResult timed_check(const std::string& name, Fn&& fn) {
  CheckResult r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.pass = fn(r.detail);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return r;
}

}  // namespace detail_validate

// Five canonical culture patterns with known conversion-status rows and
// coarsening sets.
inline CheckResult check_golden_patterns() {
  using namespace detail_validate;
  return timed_check("golden-patterns", [](std::string& detail) {
    struct Case {
      const char* cultures;
      const char* status;
      std::vector<int> set;
    };
    const std::vector<Case> cases = {
        {"m+m-m---", "NNUUUYYY", {3, 4, 6}},
        {"m+m-+---", "NNNNNYYY", {6}},
        {"m+m-----", "NNUYYYYY", {3, 4}},
        {"m++-----", "NNNYYYYY", {4}},
        {"m+------", "NNYYYYYY", {3}},
    };
    for (const auto& c : cases) {
      const auto cultures = decode_cultures(c.cultures);
      const auto p = pattern_patient(
          cultures, std::vector<TestResult>(8, TestResult::Missing));
      const std::string status = conversion_status(p).to_string();
      const CoarseningSet cs = coarsening_set(p);
      if (status != c.status || cs.times != c.set) {
        detail = std::string("pattern ") + c.cultures + ": got status " +
                 status;
        return false;
      }
    }
    detail = "5 patterns exact";
    return true;
  });
}

// coarsening_set against brute-force completion of missing cultures:
// exhaustively at K=5, on random patterns at K=8.
inline CheckResult check_coarsening_oracle(std::uint64_t seed,
                                           int random_cases = 10000) {
  using namespace detail_validate;
  return timed_check("coarsening-oracle", [=](std::string& detail) {
    int checked = 0;
    const std::vector<TestResult> kStates = {
        TestResult::Negative, TestResult::Positive, TestResult::Missing};
    const int K5 = 5;
    int n5 = 1;
    for (int i = 0; i < K5; ++i) n5 *= 3;
    for (int code = 0; code < n5; ++code) {
      std::vector<TestResult> cultures(K5);
      int c = code;
      for (int k = 0; k < K5; ++k) {
        cultures[k] = kStates[c % 3];
        c /= 3;
      }
      const auto p = pattern_patient(
          cultures, std::vector<TestResult>(K5, TestResult::Missing));
      if (coarsening_set(p).times != enumerate_T_distribution(p)) {
        detail = "mismatch at K=5 pattern code " + std::to_string(code);
        return false;
      }
      ++checked;
    }
    Rng rng(seed, {0x636f6172ull});
    for (int i = 0; i < random_cases; ++i) {
      const PatientRecord p = random_pattern(rng, 8);
      if (coarsening_set(p).times != enumerate_T_distribution(p)) {
        detail = "mismatch at K=8 random case " + std::to_string(i);
        return false;
      }
      ++checked;
    }
    detail = std::to_string(checked) + " patterns, zero mismatches";
    return true;
  });
}

// benchmark_prob against the exhaustive conditional-law oracle on random
// (law, pattern, k) triples at K=4.
inline CheckResult check_identification_oracle(std::uint64_t seed,
                                               int cases = 100,
                                               double tol = 1e-10) {
  using namespace detail_validate;
  return timed_check("identification-oracle", [=](std::string& detail) {
    Rng rng(seed, {0x6964656eull});
    int checked = 0;
    double worst = 0.0;
    while (checked < cases) {
      const JointLaw law = random_law(rng, 4);
      const PatientRecord p = random_pattern(rng, 4);
      const CoarseningSet cs = coarsening_set(p);
      if (cs.singleton()) continue;
      const int k =
          cs.times[1 + rng.uniform_int(static_cast<int>(cs.times.size()) - 1)];
      const double impl = benchmark_prob(p, k, law.abd);
      const double oracle = enumerate_conditional(p, k, law);
      worst = std::max(worst, std::abs(impl - oracle));
      if (std::abs(impl - oracle) > tol) {
        detail = "case " + std::to_string(checked) + ": |diff| = " +
                 std::to_string(std::abs(impl - oracle));
        return false;
      }
      ++checked;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d triples, worst |diff| = %.2e", cases,
                  worst);
    detail = buf;
    return true;
  });
}

// Odds identity of the exponential tilt, exactness at alpha = 0, and bound
// attainment at alpha = +/-50 on simulated multi-element patients.
inline CheckResult check_tilt_identities(std::uint64_t seed,
                                         int cases = 1000) {
  using namespace detail_validate;
  return timed_check("tilt-identities", [=](std::string& detail) {
    Rng rng(seed, {0x74696c74ull});
    for (int i = 0; i < cases; ++i) {
      const double p = rng.uniform(0.05, 0.95);
      const double alpha = rng.uniform(-4.0, 4.0);
      const double q = tilt(p, alpha);
      const double ratio = (q / (1.0 - q)) / (p / (1.0 - p));
      if (std::abs(ratio - std::exp(alpha)) > 1e-10) {
        detail = "odds identity violated at p=" + std::to_string(p) +
                 " alpha=" + std::to_string(alpha);
        return false;
      }
      if (tilt(p, 0.0) != p) {
        detail = "tilt at alpha=0 not exact";
        return false;
      }
    }

    const SimConfig cfg = default_scenario(8, 150, seed ^ 0x5eedull);
    const Cohort cohort = generate(cfg);
    int multi = 0;
    for (const auto& pat : cohort.patients) {
      const PatientImputation pi = precompute_imputation(pat, cfg.law.abd);
      if (pi.cs.singleton()) continue;
      ++multi;
      const ConditionalDistribution best = apply_tilt(pi, -50.0);
      const ConditionalDistribution worst = apply_tilt(pi, 50.0);
      if (best.mass.front() < 1.0 - 1e-10) {
        detail = "best-case bound not attained for " + pat.id;
        return false;
      }
      if (worst.mass.back() < 1.0 - 1e-10) {
        detail = "worst-case bound not attained for " + pat.id;
        return false;
      }
    }
    detail = std::to_string(cases) + " odds identities; bounds on " +
             std::to_string(multi) + " coarsened patients";
    return true;
  });
}

// Conditional mass functions are proper over the coarsening set and exactly
// zero off it, across a 3x3 sensitivity grid on a simulated cohort.
inline CheckResult check_mass_law(std::uint64_t seed, int n_per_arm = 500) {
  using namespace detail_validate;
  return timed_check("conditional-mass-law", [=](std::string& detail) {
    const SimConfig cfg = default_scenario(8, n_per_arm, seed ^ 0xabcdull);
    const Cohort cohort = generate(cfg);
    const std::vector<double> alphas = {-4.0, 0.0, 4.0};
    int evaluated = 0;
    for (double a0 : alphas) {
      for (double a1 : alphas) {
        const TiltParams tp{a0, a1};
        for (const auto& pat : cohort.patients) {
          const ConditionalDistribution cd =
              conditional_distribution(pat, cfg.law.abd, tp);
          double total = 0.0;
          for (double m : cd.mass) {
            if (m < 0.0) {
              detail = "negative mass for " + pat.id;
              return false;
            }
            total += m;
          }
          if (std::abs(total - 1.0) > 1e-12) {
            detail = "mass sum " + std::to_string(total) + " for " + pat.id;
            return false;
          }
          const auto pmf = cd.pmf_vector(cohort.K);
          for (int t = 1; t <= cohort.K + 1; ++t) {
            if (!cd.support.contains(t) && pmf[t - 1] != 0.0) {
              detail = "nonzero mass off the coarsening set for " + pat.id;
              return false;
            }
          }
          ++evaluated;
        }
      }
    }
    detail = std::to_string(evaluated) + " patient-grid evaluations";
    return true;
  });
}

// Injecting synthetic smear-missingness factors into the likelihood kernel
// must leave the benchmark probabilities unchanged.
inline CheckResult check_c_cancellation(std::uint64_t seed, int laws = 20,
                                        double tol = 1e-12) {
  using namespace detail_validate;
  return timed_check("smear-missingness-cancellation", [=](std::string& detail) {
    Rng rng(seed, {0x63616e63ull});
    int compared = 0;
    double worst = 0.0;
    for (int trial = 0; compared < laws * 5 && trial < laws * 50; ++trial) {
      const JointLaw law = random_law(rng, 6);
      const PatientRecord p = random_pattern(rng, 6);
      const CoarseningSet cs = coarsening_set(p);
      if (cs.singleton()) continue;
      const int k =
          cs.times[1 + rng.uniform_int(static_cast<int>(cs.times.size()) - 1)];
      const double base = benchmark_prob(p, k, law.abd);
      for (int c = 0; c < laws; ++c) {
        SmearMissParams cm;
        cm.K = 6;
        cm.c.assign(layout::c_size(6), 0.0);
        for (double& x : cm.c) x = rng.uniform(-2.0, 2.0);
        const double with_c = benchmark_prob(p, k, law.abd, &cm);
        worst = std::max(worst, std::abs(with_c - base));
        if (std::abs(with_c - base) > tol) {
          detail = "cancellation violated: |diff| = " +
                   std::to_string(std::abs(with_c - base));
          return false;
        }
      }
      ++compared;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "%d laws x %d patients, worst |diff| = %.2e", laws, compared,
                  worst);
    detail = buf;
    return true;
  });
}

inline std::vector<CheckResult> run_validation_battery(std::uint64_t seed) {
  return {
      check_golden_patterns(),
      check_coarsening_oracle(seed),
      check_identification_oracle(seed),
      check_tilt_identities(seed),
      check_mass_law(seed),
      check_c_cancellation(seed),
  };
}

}  // namespace coarseconv
