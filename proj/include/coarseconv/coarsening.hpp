#pragma once

#include <string>
#include <vector>

#include "coarseconv/data_model.hpp"
#include "coarseconv/errors.hpp"

namespace coarseconv {

// Per-visit conversion status. A patient has converted at visit k when the
// cultures at k..K are all observed negative; the status is unknown when no
// positive culture is seen at or after k but some culture there is missing.
enum class Conversion : unsigned char { No, Yes, Unknown };

struct ConversionStatus {
  std::vector<Conversion> by_week;  // index 0 <-> week 1

  Conversion at(int week) const { return by_week[week - 1]; }
  bool any_unknown() const {
    for (Conversion c : by_week)
      if (c == Conversion::Unknown) return true;
    return false;
  }
  std::string to_string() const {
    std::string s;
    for (Conversion c : by_week)
      s.push_back(c == Conversion::Yes ? 'Y'
                  : c == Conversion::No ? 'N'
                                        : 'U');
    return s;
  }
};

// The set of conversion times compatible with a patient's observed cultures.
// Values live in {1..K+1}; K+1 encodes "did not convert within the study".
// Unlike classical interval censoring the set need not be contiguous.
struct CoarseningSet {
  std::vector<int> times;  // sorted ascending, nonempty
  int L = 0;               // smallest element
  int R_plus_1 = 0;        // largest element (== L for a singleton)

  bool singleton() const { return times.size() == 1; }
  bool contains(int t) const {
    for (int v : times)
      if (v == t) return true;
    return false;
  }
};

inline ConversionStatus conversion_status(const PatientRecord& p) {
  const int K = p.num_weeks();
  ConversionStatus st;
  st.by_week.assign(K, Conversion::No);
  bool positive_seen = false;  // observed positive culture at >= k
  bool missing_seen = false;   // missing culture at >= k
  for (int k = K; k >= 1; --k) {
    const TestResult c = p.visit(k).culture;
    if (is_missing(c)) {
      missing_seen = true;
    } else if (c == TestResult::Positive) {
      positive_seen = true;
    }
    if (positive_seen)
      st.by_week[k - 1] = Conversion::No;
    else if (!missing_seen)
      st.by_week[k - 1] = Conversion::Yes;
    else
      st.by_week[k - 1] = Conversion::Unknown;
  }
  return st;
}

// Computes the coarsening set from the culture sequence alone. When the
// conversion time is determined it is the singleton {T} with T = K+1 when no
// visit starts an all-negative observed tail. Otherwise the set is
// {L} + {k : L < k < R+1, culture at k-1 missing} + {R+1}, where L and R are
// the first and last visits with unknown conversion status.
inline CoarseningSet coarsening_set(const PatientRecord& p) {
  const int K = p.num_weeks();
  const ConversionStatus st = conversion_status(p);

  CoarseningSet cs;
  int first_unknown = 0, last_unknown = 0;
  for (int k = 1; k <= K; ++k) {
    if (st.at(k) == Conversion::Unknown) {
      if (first_unknown == 0) first_unknown = k;
      last_unknown = k;
    }
  }

  if (first_unknown == 0) {
    int T = K + 1;
    for (int k = 1; k <= K; ++k) {
      if (st.at(k) == Conversion::Yes) {
        T = k;
        break;
      }
    }
    cs.times = {T};
    cs.L = cs.R_plus_1 = T;
    return cs;
  }

  const int L = first_unknown;
  const int R = last_unknown;
  cs.L = L;
  cs.R_plus_1 = R + 1;
  cs.times.push_back(L);
  for (int k = L + 1; k < R + 1; ++k) {
    if (is_missing(p.visit(k - 1).culture)) cs.times.push_back(k);
  }
  cs.times.push_back(R + 1);
  return cs;
}

}  // namespace coarseconv
