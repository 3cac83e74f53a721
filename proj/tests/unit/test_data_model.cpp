#include <catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include "coarseconv/data_model.hpp"
#include "coarseconv/rng.hpp"
#include "coarseconv/simulate.hpp"
#include "helpers.hpp"

using namespace coarseconv;

namespace {

std::string rows_to_csv(const std::vector<std::string>& rows) {
  std::string s = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) s += r + "\n";
  return s;
}

}  // namespace

TEST_CASE("row fields map directly onto VisitRecord", "[data_model]") {
  const std::vector<std::string> rows = {
      "p1,1,1,1,neg,neg", "p1,1,1,2,pos,pos", "p1,1,1,3,miss,neg",
      "p1,1,1,4,neg,miss"};
  const Cohort c = cohort_from_csv(rows_to_csv(rows), 4);
  REQUIRE(c.patients.size() == 1);
  const PatientRecord& p = c.patients[0];
  CHECK(p.id == "p1");
  CHECK(p.arm == 1);
  CHECK(p.cavitation == 1);
  CHECK(p.visit(2).week == 2);
  CHECK(p.visit(2).culture == TestResult::Positive);
  CHECK(p.visit(2).smear == TestResult::Positive);
  CHECK(p.visit(3).culture == TestResult::Missing);
  CHECK(p.visit(4).smear == TestResult::Missing);
}

TEST_CASE("rows may arrive in any order", "[data_model]") {
  const std::vector<std::string> rows = {
      "p2,0,1,2,neg,neg", "p1,1,0,1,pos,pos", "p2,0,1,1,miss,neg",
      "p1,1,0,2,neg,miss"};
  std::vector<std::string> shuffled = rows;
  std::reverse(shuffled.begin(), shuffled.end());
  const Cohort a = cohort_from_csv(rows_to_csv(rows), 2);
  const Cohort b = cohort_from_csv(rows_to_csv(shuffled), 2);
  CHECK(a == b);
  CHECK(a.patients[0].id == "p1");
  CHECK(a.patients[1].id == "p2");
}

TEST_CASE("parse errors carry row numbers", "[data_model]") {
  SECTION("missing week") {
    const auto csv = rows_to_csv({"p1,0,0,1,neg,neg", "p1,0,0,3,neg,neg",
                                  "p1,0,0,4,neg,neg"});
    try {
      cohort_from_csv(csv, 4);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("missing week 2") != std::string::npos);
    }
  }
  SECTION("duplicate (patient, week)") {
    const auto csv = rows_to_csv({"p1,0,0,1,neg,neg", "p1,0,0,1,pos,neg"});
    try {
      cohort_from_csv(csv, 1);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 3);
      CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
  }
  SECTION("value outside vocabulary") {
    const auto csv = rows_to_csv({"p1,0,0,1,negative,neg"});
    try {
      cohort_from_csv(csv, 1);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.row() == 2);
    }
  }
  SECTION("inconsistent arm within patient") {
    const auto csv = rows_to_csv({"p1,0,0,1,neg,neg", "p1,1,0,2,neg,neg"});
    CHECK_THROWS_AS(cohort_from_csv(csv, 2), ParseError);
  }
  SECTION("week outside 1..K") {
    const auto csv = rows_to_csv({"p1,0,0,9,neg,neg"});
    CHECK_THROWS_AS(cohort_from_csv(csv, 8), ParseError);
  }
  SECTION("bad header") {
    CHECK_THROWS_AS(cohort_from_csv("id,week\n", 8), ParseError);
  }
}

TEST_CASE("a visit row with both tests missing is valid data", "[data_model]") {
  const Cohort c = cohort_from_csv(rows_to_csv({"p1,0,0,1,miss,miss"}), 1);
  CHECK(c.patients[0].visit(1).culture == TestResult::Missing);
  CHECK(c.patients[0].visit(1).smear == TestResult::Missing);
}

TEST_CASE("serialize/parse round trip on random cohorts", "[data_model]") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 1 + rng.uniform_int(8);
    Cohort cohort;
    cohort.K = K;
    const int n = 1 + rng.uniform_int(30);
    for (int i = 0; i < n; ++i) {
      char id[16];
      std::snprintf(id, sizeof(id), "p%03d", i);
      cohort.patients.push_back(testutil::random_patient(rng, K, id));
    }
    const std::string csv = to_csv(cohort);
    const Cohort back = cohort_from_csv(csv, K);
    REQUIRE(back == cohort);
    CHECK(to_csv(back) == csv);  // serializer output is canonical
  }
}

TEST_CASE("simulated cohorts survive the round trip", "[data_model]") {
  const Cohort cohort = generate(default_scenario(8, 25, 7));
  CHECK(cohort_from_csv(to_csv(cohort), 8) == cohort);
}
