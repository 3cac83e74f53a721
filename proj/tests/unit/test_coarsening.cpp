#include <catch_amalgamated.hpp>

#include <vector>

#include "coarseconv/coarsening.hpp"
#include "coarseconv/enumeration.hpp"
#include "coarseconv/rng.hpp"
#include "helpers.hpp"

using namespace coarseconv;
using testutil::patient;

TEST_CASE("conversion status of canonical patterns", "[coarsening]") {
  CHECK(conversion_status(patient("m+m-m---")).to_string() == "NNUUUYYY");
  CHECK(conversion_status(patient("m+m-+---")).to_string() == "NNNNNYYY");
  CHECK(conversion_status(patient("--------")).to_string() == "YYYYYYYY");
  CHECK(conversion_status(patient("m+m-----")).to_string() == "NNUYYYYY");
  CHECK(conversion_status(patient("m++-----")).to_string() == "NNNYYYYY");
  CHECK(conversion_status(patient("m+------")).to_string() == "NNYYYYYY");
}

TEST_CASE("coarsening sets of canonical patterns", "[coarsening]") {
  auto set_of = [](const std::string& cultures) {
    return coarsening_set(patient(cultures)).times;
  };
  CHECK(set_of("m+m-m---") == std::vector<int>{3, 4, 6});
  CHECK(set_of("m+m-+---") == std::vector<int>{6});
  CHECK(set_of("m+m-----") == std::vector<int>{3, 4});
  CHECK(set_of("m++-----") == std::vector<int>{4});
  CHECK(set_of("m+------") == std::vector<int>{3});

  const CoarseningSet mary = coarsening_set(patient("m+m-m---"));
  CHECK(mary.L == 3);
  CHECK(mary.R_plus_1 == 6);
}

TEST_CASE("positive culture at the final week forces T = K+1", "[coarsening]") {
  const CoarseningSet cs = coarsening_set(patient("-------+"));
  CHECK(cs.times == std::vector<int>{9});
  CHECK(cs.singleton());
}

TEST_CASE("all-missing cultures make every time feasible", "[coarsening]") {
  const auto p = patient("mmmmmmmm");
  const CoarseningSet cs = coarsening_set(p);
  CHECK(cs.times == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(cs.times == enumerate_T_distribution(p));
}

TEST_CASE("coarsening sets can be non-contiguous", "[coarsening]") {
  CHECK(coarsening_set(patient("-m--")).times == std::vector<int>{1, 3});
}

TEST_CASE("smears never affect the coarsening set", "[coarsening]") {
  const auto a = patient("m+m-m---", "--------");
  const auto b = patient("m+m-m---", "++mm++mm");
  CHECK(coarsening_set(a).times == coarsening_set(b).times);
}

TEST_CASE("coarsening set matches completion enumeration exhaustively at K=5",
          "[coarsening][oracle]") {
  const TestResult states[3] = {TestResult::Negative, TestResult::Positive,
                                TestResult::Missing};
  for (int code = 0; code < 243; ++code) {
    PatientRecord p;
    p.id = "x";
    int c = code;
    for (int k = 1; k <= 5; ++k) {
      p.visits.push_back({k, states[c % 3], TestResult::Missing});
      c /= 3;
    }
    INFO("pattern code " << code);
    REQUIRE(coarsening_set(p).times == enumerate_T_distribution(p));
  }
}

TEST_CASE("coarsening set matches completion enumeration on random K=8",
          "[coarsening][oracle]") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const PatientRecord p = testutil::random_patient(rng, 8);
    REQUIRE(coarsening_set(p).times == enumerate_T_distribution(p));
  }
}

TEST_CASE("structural invariants of the coarsening set", "[coarsening]") {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const PatientRecord p = testutil::random_patient(rng, 8);
    const ConversionStatus st = conversion_status(p);
    const CoarseningSet cs = coarsening_set(p);

    // singleton <=> no Unknown visit
    CHECK(cs.singleton() == !st.any_unknown());
    CHECK(cs.times.front() == cs.L);
    CHECK(cs.times.back() == cs.R_plus_1);

    // unknown visits form one contiguous block
    int first_u = 0, last_u = 0;
    for (int k = 1; k <= 8; ++k) {
      if (st.at(k) == Conversion::Unknown) {
        if (!first_u) first_u = k;
        last_u = k;
      }
    }
    for (int k = first_u; first_u && k <= last_u; ++k)
      CHECK(st.at(k) == Conversion::Unknown);

    if (!cs.singleton()) {
      // L is the earliest week with no later observed positive
      int expected_l = 0;
      for (int k = 8; k >= 1; --k) {
        const TestResult c = p.visit(k).culture;
        if (!is_missing(c) && c == TestResult::Positive) break;
        expected_l = k;
      }
      CHECK(cs.L == expected_l);
      // interior members sit above a missing culture
      for (int t : cs.times) {
        CHECK(t >= cs.L);
        CHECK(t <= cs.R_plus_1);
        if (t != cs.L && t != cs.R_plus_1)
          CHECK(is_missing(p.visit(t - 1).culture));
      }
    }
  }
}
