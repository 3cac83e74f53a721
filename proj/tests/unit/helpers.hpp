#pragma once

#include <string>
#include <vector>

#include "coarseconv/data_model.hpp"
#include "coarseconv/rng.hpp"

namespace testutil {

using coarseconv::PatientRecord;
using coarseconv::TestResult;
using coarseconv::VisitRecord;

inline TestResult decode(char c) {
  switch (c) {
    case '-': return TestResult::Negative;
    case '+': return TestResult::Positive;
    default: return TestResult::Missing;
  }
}

// Builds a patient from compact culture/smear strings, e.g. "m+m-m---".
inline PatientRecord patient(const std::string& cultures,
                             const std::string& smears, int arm = 0,
                             int cav = 0, const std::string& id = "t") {
  PatientRecord p;
  p.id = id;
  p.arm = arm;
  p.cavitation = cav;
  for (size_t k = 0; k < cultures.size(); ++k)
    p.visits.push_back(VisitRecord{static_cast<int>(k) + 1,
                                   decode(cultures[k]), decode(smears[k])});
  return p;
}

inline PatientRecord patient(const std::string& cultures, int arm = 0,
                             int cav = 0, const std::string& id = "t") {
  return patient(cultures, std::string(cultures.size(), 'm'), arm, cav, id);
}

inline TestResult random_result(coarseconv::Rng& rng) {
  switch (rng.uniform_int(3)) {
    case 0: return TestResult::Negative;
    case 1: return TestResult::Positive;
    default: return TestResult::Missing;
  }
}

inline PatientRecord random_patient(coarseconv::Rng& rng, int K,
                                    const std::string& id = "r") {
  PatientRecord p;
  p.id = id;
  p.arm = rng.uniform_int(2);
  p.cavitation = rng.uniform_int(2);
  for (int k = 1; k <= K; ++k)
    p.visits.push_back(VisitRecord{k, random_result(rng), random_result(rng)});
  return p;
}

}  // namespace testutil
