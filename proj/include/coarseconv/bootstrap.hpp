#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "coarseconv/data_model.hpp"
#include "coarseconv/errors.hpp"
#include "coarseconv/parallel.hpp"
#include "coarseconv/rng.hpp"

namespace coarseconv {

struct BootstrapConfig {
  int replicates = 1000;
  std::uint64_t seed = 0;
  double level = 0.95;   // in (0,1)
  int threads = 0;       // 0 = hardware concurrency
  bool keep_replicates = false;
};

struct BootstrapOutcome {
  std::vector<std::string> names;
  std::vector<double> lower, upper;  // per estimand; NaN when no finite value
  std::vector<int> n_finite;         // finite replicate count per estimand
  std::vector<int> failed;           // replicate indices whose analysis threw
  int B = 0;
  // Kept only when keep_replicates: replicate-major values, NaN for failures.
  std::vector<std::vector<double>> replicate_values;
};

// Empirical quantile with type-7 (linear) interpolation.
inline double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

// Resamples patients with replacement independently within each arm,
// preserving the per-arm sample sizes.
inline Cohort resample_within_arms(const Cohort& cohort, Rng& rng) {
  Cohort out;
  out.K = cohort.K;
  out.patients.reserve(cohort.patients.size());
  for (int arm = 0; arm <= 1; ++arm) {
    std::vector<const PatientRecord*> members;
    for (const auto& p : cohort.patients)
      if (p.arm == arm) members.push_back(&p);
    for (size_t i = 0; i < members.size(); ++i)
      out.patients.push_back(
          *members[rng.uniform_int(static_cast<int>(members.size()))]);
  }
  return out;
}

// Nonparametric bootstrap over `analysis`, a closure mapping a cohort to a
// fixed-length estimand vector. Replicate b draws from substream
// (seed, "boot", b), so parallel and serial execution produce the same
// replicates. Replicates whose analysis throws are excluded and counted;
// more than 10% failures is an error.
inline BootstrapOutcome bootstrap_run(
    const Cohort& cohort,
    const std::function<std::vector<double>(const Cohort&)>& analysis,
    const BootstrapConfig& cfg, std::vector<std::string> names) {
  if (cfg.replicates < 1)
    throw ContractError("bootstrap: replicates must be >= 1");
  if (!(cfg.level > 0.0 && cfg.level < 1.0))
    throw ContractError("bootstrap: level must be in (0,1)");
  for (int arm = 0; arm <= 1; ++arm)
    if (count_in_arm(cohort, arm) == 0)
      throw ContractError("bootstrap: arm " + std::to_string(arm) +
                          " is empty");

  const int B = cfg.replicates;
  const size_t n_est = names.size();
  std::vector<std::vector<double>> values(
      B, std::vector<double>(n_est, std::numeric_limits<double>::quiet_NaN()));
  std::vector<char> ok(B, 0);

  parallel_for(B, cfg.threads, [&](int b) {
    Rng rng(cfg.seed, {0x626F6F74ull /* "boot" */,
                       static_cast<std::uint64_t>(b)});
    const Cohort replicate = resample_within_arms(cohort, rng);
    try {
      std::vector<double> est = analysis(replicate);
      if (est.size() != n_est)
        throw Error("bootstrap: analysis returned " +
                    std::to_string(est.size()) + " estimands, expected " +
                    std::to_string(n_est));
      values[b] = std::move(est);
      ok[b] = 1;
    } catch (const Error&) {
      ok[b] = 0;  // model fit failed on this replicate; recorded below
    }
  });

  BootstrapOutcome out;
  out.names = std::move(names);
  out.B = B;
  for (int b = 0; b < B; ++b)
    if (!ok[b]) out.failed.push_back(b);
  if (10 * static_cast<int>(out.failed.size()) > B)
    throw Error("bootstrap: " + std::to_string(out.failed.size()) + " of " +
                std::to_string(B) +
                " replicates failed (>10%); results unreliable");

  const double tail = (1.0 - cfg.level) / 2.0;
  out.lower.resize(n_est);
  out.upper.resize(n_est);
  out.n_finite.resize(n_est);
  std::vector<double> column;
  for (size_t j = 0; j < n_est; ++j) {
    column.clear();
    for (int b = 0; b < B; ++b)
      if (ok[b] && std::isfinite(values[b][j])) column.push_back(values[b][j]);
    out.n_finite[j] = static_cast<int>(column.size());
    out.lower[j] = quantile_type7(column, tail);
    out.upper[j] = quantile_type7(column, 1.0 - tail);
  }
  if (cfg.keep_replicates) out.replicate_values = std::move(values);
  return out;
}

}  // namespace coarseconv
