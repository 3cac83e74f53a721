#include <catch_amalgamated.hpp>

#include <cmath>

#include "coarseconv/enumeration.hpp"
#include "coarseconv/imputation.hpp"
#include "coarseconv/rng.hpp"
#include "coarseconv/simulate.hpp"
#include "helpers.hpp"

using namespace coarseconv;
using testutil::patient;

namespace {

ModelParams zero_params(int K) {
  ModelParams mp;
  mp.K = K;
  mp.a.assign(layout::a_size(K), 0.0);
  mp.b.assign(layout::b_size(K), 0.0);
  mp.d.assign(layout::d_size(K), 0.0);
  return mp;
}

JointLaw random_law(Rng& rng, int K) {
  JointLaw law = default_scenario(K, 1, 0).law;
  for (auto* v : {&law.abd.a, &law.abd.b, &law.abd.d, &law.smear_missing.c})
    for (double& x : *v) x = rng.uniform(-1.5, 1.5);
  return law;
}

}  // namespace

TEST_CASE("tilt basics", "[imputation]") {
  CHECK(tilt(0.37, 0.0) == 0.37);                // benchmark is exact
  CHECK_THAT(tilt(0.5, std::log(2.0)),
             Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_THAT(tilt(0.3, 50.0), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(tilt(0.3, -50.0), Catch::Matchers::WithinAbs(0.0, 1e-12));
  CHECK(tilt(0.0, 3.0) == 0.0);
  CHECK(tilt(1.0, -3.0) == 1.0);
}

TEST_CASE("tilt multiplies odds by e^alpha", "[imputation]") {
  Rng rng(41);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(0.05, 0.95);
    const double a = rng.uniform(-4.0, 4.0);
    const double q = tilt(p, a);
    const double ratio = (q / (1.0 - q)) / (p / (1.0 - p));
    REQUIRE_THAT(ratio, Catch::Matchers::WithinAbs(std::exp(a), 1e-10));
  }
}

TEST_CASE("zero coefficients render every benchmark probability 1/2",
          "[imputation]") {
  const ModelParams mp = zero_params(8);
  const auto p = patient("m+m-m---", "-+m--m-+");
  for (int k : {4, 6})
    CHECK_THAT(benchmark_prob(p, k, mp),
               Catch::Matchers::WithinAbs(0.5, 1e-14));
}

TEST_CASE("benchmark_prob contract violations", "[imputation]") {
  const ModelParams mp = zero_params(8);
  CHECK_THROWS_AS(benchmark_prob(patient("m+m-+---"), 6, mp), ContractError);
  const auto p = patient("m+m-m---");
  CHECK_THROWS_AS(benchmark_prob(p, 5, mp), ContractError);  // not in set
  CHECK_THROWS_AS(benchmark_prob(p, 3, mp), ContractError);  // k == L
}

TEST_CASE("y-independent factors cancel from the ratio", "[imputation]") {
  // multiplying both g(0) and g(1) by the same constant leaves the ratio
  // unchanged; realized here by injecting a smear-missingness law, whose
  // factors do not depend on the hypothesized culture value
  Rng rng(42);
  for (int i = 0; i < 50; ++i) {
    const JointLaw law = random_law(rng, 6);
    const PatientRecord p = testutil::random_patient(rng, 6);
    const CoarseningSet cs = coarsening_set(p);
    if (cs.singleton()) continue;
    const int k = cs.times.back();
    SmearMissParams cm;
    cm.K = 6;
    cm.c.assign(layout::c_size(6), 0.0);
    for (double& x : cm.c) x = rng.uniform(-2.0, 2.0);
    REQUIRE_THAT(benchmark_prob(p, k, law.abd, &cm),
                 Catch::Matchers::WithinAbs(benchmark_prob(p, k, law.abd),
                                            1e-12));
  }
}

TEST_CASE("benchmark_prob agrees with the enumeration oracle", "[imputation][oracle]") {
  Rng rng(43);
  int checked = 0;
  while (checked < 30) {
    const JointLaw law = random_law(rng, 4);
    const PatientRecord p = testutil::random_patient(rng, 4);
    const CoarseningSet cs = coarsening_set(p);
    if (cs.singleton()) continue;
    const int k =
        cs.times[1 + rng.uniform_int(static_cast<int>(cs.times.size()) - 1)];
    REQUIRE_THAT(benchmark_prob(p, k, law.abd),
                 Catch::Matchers::WithinAbs(enumerate_conditional(p, k, law),
                                            1e-10));
    ++checked;
  }
}

TEST_CASE("final-week missing culture reduces to the two-factor product",
          "[imputation][oracle]") {
  // culture missing at week K: only the week-K culture-value factor and the
  // week-K smear factor remain
  Rng rng(44);
  const JointLaw law = random_law(rng, 4);
  const PatientRecord p = patient("+++m", "-+-+", 1, 1);
  const CoarseningSet cs = coarsening_set(p);
  REQUIRE(cs.times == std::vector<int>{4, 5});

  const LagFeatures lf = lag_features(p, 4);
  const double pb = expit(linpred_b(law.abd.b, 4, 4, lf, 1, 1));
  const double d0 = expit(linpred_d(law.abd.d, 4, 4, 0.0, 0.0, lf, 1, 1));
  const double d1 = expit(linpred_d(law.abd.d, 4, 4, 0.0, 1.0, lf, 1, 1));
  // week-4 smear is positive, so the d-exponent selects (1 - expit)
  const double g0 = (1.0 - pb) * (1.0 - d0);
  const double g1 = pb * (1.0 - d1);
  const double manual = g0 / (g0 + g1);
  CHECK_THAT(benchmark_prob(p, 5, law.abd),
             Catch::Matchers::WithinAbs(manual, 1e-12));
  CHECK_THAT(enumerate_conditional(p, 5, law),
             Catch::Matchers::WithinAbs(manual, 1e-10));
}

TEST_CASE("Mary's pattern matches the event-restricted oracle at K=8",
          "[imputation][oracle]") {
  Rng rng(45);
  for (int i = 0; i < 10; ++i) {
    const JointLaw law = random_law(rng, 8);
    const PatientRecord p = patient("m+m-m---", "-+m--m-+", 1, 0);
    for (int k : {4, 6})
      REQUIRE_THAT(
          benchmark_prob(p, k, law.abd),
          Catch::Matchers::WithinAbs(enumerate_conditional_event(p, k, law),
                                     1e-10));
  }
}

TEST_CASE("full-scan and event-restricted oracles agree", "[imputation][oracle]") {
  Rng rng(46);
  int checked = 0;
  while (checked < 10) {
    const JointLaw law = random_law(rng, 4);
    const PatientRecord p = testutil::random_patient(rng, 4);
    const CoarseningSet cs = coarsening_set(p);
    if (cs.singleton()) continue;
    const int k = cs.times.back();
    REQUIRE_THAT(enumerate_conditional(p, k, law),
                 Catch::Matchers::WithinAbs(
                     enumerate_conditional_event(p, k, law), 1e-13));
    ++checked;
  }
}

TEST_CASE("conditional distribution product formula", "[imputation]") {
  // singleton support
  const ModelParams mp = zero_params(8);
  const ConditionalDistribution single =
      conditional_distribution(patient("m+m-+---"), mp, TiltParams{});
  REQUIRE(single.support.times == std::vector<int>{6});
  CHECK(single.mass == std::vector<double>{1.0});

  // hand-built benchmark probabilities: q4 = 0.5, q6 = 0.2
  PatientImputation pi;
  pi.id = "hand";
  pi.arm = 0;
  pi.cs.times = {3, 4, 6};
  pi.cs.L = 3;
  pi.cs.R_plus_1 = 6;
  pi.benchmark = {0.5, 0.2};
  const ConditionalDistribution cd = apply_tilt(pi, 0.0);
  CHECK_THAT(cd.mass[2], Catch::Matchers::WithinAbs(0.2, 1e-15));
  CHECK_THAT(cd.mass[1], Catch::Matchers::WithinAbs(0.4, 1e-15));
  CHECK_THAT(cd.mass[0], Catch::Matchers::WithinAbs(0.4, 1e-15));
}

TEST_CASE("extreme alpha drives mass to the set endpoints", "[imputation]") {
  const SimConfig cfg = default_scenario(8, 40, 9);
  const Cohort cohort = generate(cfg);
  for (const auto& p : cohort.patients) {
    const PatientImputation pi = precompute_imputation(p, cfg.law.abd);
    if (pi.cs.singleton()) continue;
    CHECK(apply_tilt(pi, 50.0).mass.back() >= 1.0 - 1e-10);
    CHECK(apply_tilt(pi, -50.0).mass.front() >= 1.0 - 1e-10);
  }
}

TEST_CASE("mass at the endpoints is monotone in alpha", "[imputation]") {
  const SimConfig cfg = default_scenario(8, 30, 10);
  const Cohort cohort = generate(cfg);
  for (const auto& p : cohort.patients) {
    const PatientImputation pi = precompute_imputation(p, cfg.law.abd);
    if (pi.cs.singleton()) continue;
    double prev_top = -1.0, prev_bottom = 2.0;
    for (double a = -6.0; a <= 6.0; a += 0.5) {
      const ConditionalDistribution cd = apply_tilt(pi, a);
      CHECK(cd.mass.back() >= prev_top - 1e-13);
      CHECK(cd.mass.front() <= prev_bottom + 1e-13);
      prev_top = cd.mass.back();
      prev_bottom = cd.mass.front();
    }
  }
}

TEST_CASE("conditional masses are proper and vanish off the support",
          "[imputation]") {
  const SimConfig cfg = default_scenario(8, 100, 12);
  const Cohort cohort = generate(cfg);
  for (double alpha : {-4.0, 0.0, 4.0}) {
    const TiltParams tp{alpha, alpha};
    for (const auto& p : cohort.patients) {
      const ConditionalDistribution cd =
          conditional_distribution(p, cfg.law.abd, tp);
      double total = 0.0;
      for (double m : cd.mass) total += m;
      REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
      const auto pmf = cd.pmf_vector(8);
      for (int t = 1; t <= 9; ++t)
        if (!cd.support.contains(t)) REQUIRE(pmf[t - 1] == 0.0);
    }
  }
}

TEST_CASE("conditional law at alpha=0 matches exhaustive conditioning on "
          "small K",
          "[imputation][oracle]") {
  // build the conditional law of T from the enumeration oracle alone, then
  // compare against the reverse-time product implementation
  Rng rng(47);
  int checked = 0;
  while (checked < 15) {
    const JointLaw law = random_law(rng, 4);
    const PatientRecord p = testutil::random_patient(rng, 4);
    const CoarseningSet cs = coarsening_set(p);
    if (cs.singleton()) continue;

    const size_t m = cs.times.size();
    std::vector<double> q(m, 0.0);
    for (size_t i = 1; i < m; ++i)
      q[i] = enumerate_conditional(p, cs.times[i], law);
    std::vector<double> expected(m, 0.0);
    expected[m - 1] = q[m - 1];
    double survivor = 1.0 - q[m - 1];
    for (size_t i = m - 2; i >= 1; --i) {
      expected[i] = survivor * q[i];
      survivor *= 1.0 - q[i];
    }
    expected[0] = survivor;

    const ConditionalDistribution cd =
        conditional_distribution(p, law.abd, TiltParams{});
    for (size_t i = 0; i < m; ++i)
      REQUIRE_THAT(cd.mass[i],
                   Catch::Matchers::WithinAbs(expected[i], 1e-9));
    ++checked;
  }
}

TEST_CASE("clamped benchmark probabilities are counted", "[imputation]") {
  ModelParams mp = zero_params(4);
  // saturate the culture-value model so expit(b) is numerically 1
  for (int wk = 1; wk <= 4; ++wk) mp.b[layout::b_week(4, wk)] = 60.0;
  ImputationStats stats;
  conditional_distribution(patient("m---"), mp, TiltParams{}, &stats);
  CHECK(stats.clamp_events > 0);
}
