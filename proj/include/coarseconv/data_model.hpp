#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "coarseconv/errors.hpp"

namespace coarseconv {

// Outcome of one binary test. A negative result is "good" (the indicator used
// by the models is 1 for negative, 0 for positive).
enum class TestResult : unsigned char { Negative, Positive, Missing };

inline bool is_missing(TestResult r) { return r == TestResult::Missing; }

// 1 for negative, 0 for positive; caller must ensure the result is observed.
inline int negativity(TestResult r) {
  return r == TestResult::Negative ? 1 : 0;
}

// Data recorded at one scheduled visit: culture and smear, each possibly
// missing. A visit row exists even when both tests are missing; an absent
// row is an input error, which keeps "visit occurred but result missing"
// distinct from malformed data.
struct VisitRecord {
  int week = 0;  // 1..K
  TestResult culture = TestResult::Missing;
  TestResult smear = TestResult::Missing;

  bool operator==(const VisitRecord&) const = default;
};

struct PatientRecord {
  std::string id;
  int arm = 0;         // 0 = control, 1 = treated
  int cavitation = 0;  // baseline cavitation status
  std::vector<VisitRecord> visits;  // exactly K, ordered week 1..K

  const VisitRecord& visit(int week) const { return visits[week - 1]; }
  int num_weeks() const { return static_cast<int>(visits.size()); }

  bool operator==(const PatientRecord&) const = default;
};

struct Cohort {
  int K = 0;
  std::vector<PatientRecord> patients;

  bool operator==(const Cohort&) const = default;
};

namespace detail {

inline TestResult parse_test_result(const std::string& s, int row) {
  if (s == "neg") return TestResult::Negative;
  if (s == "pos") return TestResult::Positive;
  if (s == "miss") return TestResult::Missing;
  throw ParseError(row, "test result '" + s + "' not in {neg,pos,miss}");
}

inline const char* test_result_label(TestResult r) {
  switch (r) {
    case TestResult::Negative: return "neg";
    case TestResult::Positive: return "pos";
    default: return "miss";
  }
}

inline int parse_binary(const std::string& s, const char* field, int row) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ParseError(row, std::string(field) + " '" + s + "' not in {0,1}");
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "patient_id,arm,cavitation,week,culture,smear";

// Reads the visit-level CSV format (header `patient_id,arm,cavitation,week,
// culture,smear`) into a Cohort with K visits per patient. Patients are
// ordered by id and visits by week, so the result does not depend on row
// order in the input.
inline Cohort parse_cohort(std::istream& in, int K) {
  if (K < 1) throw ContractError("K must be >= 1");

  struct Accum {
    int arm = 0;
    int cavitation = 0;
    int first_row = 0;
    std::map<int, VisitRecord> visits;
  };
  std::map<std::string, Accum> patients;

  std::string line;
  int row = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kCsvHeader)
        throw ParseError(row, "expected header '" + std::string(kCsvHeader) +
                                  "', got '" + line + "'");
      saw_header = true;
      continue;
    }

    auto fields = detail::split_csv_row(line);
    if (fields.size() != 6)
      throw ParseError(row, "expected 6 fields, got " +
                                std::to_string(fields.size()));

    const std::string& id = fields[0];
    if (id.empty()) throw ParseError(row, "empty patient_id");
    int arm = detail::parse_binary(fields[1], "arm", row);
    int cav = detail::parse_binary(fields[2], "cavitation", row);

    int week = 0;
    try {
      size_t pos = 0;
      week = std::stoi(fields[3], &pos);
      if (pos != fields[3].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError(row, "week '" + fields[3] + "' is not an integer");
    }
    if (week < 1 || week > K)
      throw ParseError(row, "week " + std::to_string(week) +
                                " outside 1.." + std::to_string(K));

    VisitRecord v;
    v.week = week;
    v.culture = detail::parse_test_result(fields[4], row);
    v.smear = detail::parse_test_result(fields[5], row);

    auto [it, inserted] = patients.try_emplace(id);
    Accum& acc = it->second;
    if (inserted) {
      acc.arm = arm;
      acc.cavitation = cav;
      acc.first_row = row;
    } else {
      if (acc.arm != arm)
        throw ParseError(row, "inconsistent arm for patient '" + id + "'");
      if (acc.cavitation != cav)
        throw ParseError(row,
                         "inconsistent cavitation for patient '" + id + "'");
    }
    if (!acc.visits.emplace(week, v).second)
      throw ParseError(row, "duplicate week " + std::to_string(week) +
                                " for patient '" + id + "'");
  }
  if (!saw_header) throw ParseError(0, "empty input: missing header");

  Cohort cohort;
  cohort.K = K;
  for (auto& [id, acc] : patients) {
    PatientRecord p;
    p.id = id;
    p.arm = acc.arm;
    p.cavitation = acc.cavitation;
    p.visits.reserve(K);
    for (int week = 1; week <= K; ++week) {
      auto it = acc.visits.find(week);
      if (it == acc.visits.end())
        throw ParseError(acc.first_row, "patient '" + id + "' missing week " +
                                            std::to_string(week));
      p.visits.push_back(it->second);
    }
    cohort.patients.push_back(std::move(p));
  }
  return cohort;
}

// Canonical serializer: rows sorted by (patient_id, week).
inline void serialize_cohort(const Cohort& cohort, std::ostream& out) {
  out << kCsvHeader << '\n';
  std::vector<const PatientRecord*> order;
  order.reserve(cohort.patients.size());
  for (const auto& p : cohort.patients) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const PatientRecord* a, const PatientRecord* b) {
              return a->id < b->id;
            });
  for (const PatientRecord* p : order) {
    for (const VisitRecord& v : p->visits) {
      out << p->id << ',' << p->arm << ',' << p->cavitation << ',' << v.week
          << ',' << detail::test_result_label(v.culture) << ','
          << detail::test_result_label(v.smear) << '\n';
    }
  }
}

inline std::string to_csv(const Cohort& cohort) {
  std::ostringstream out;
  serialize_cohort(cohort, out);
  return out.str();
}

inline Cohort cohort_from_csv(const std::string& text, int K) {
  std::istringstream in(text);
  return parse_cohort(in, K);
}

inline int count_in_arm(const Cohort& cohort, int arm) {
  int n = 0;
  for (const auto& p : cohort.patients) n += (p.arm == arm);
  return n;
}

}  // namespace coarseconv
