#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "coarseconv/errors.hpp"

namespace coarseconv {

// Discrete-time proportional-odds hazard fit: odds of converting at week k
// equal tau_k * exp(beta * arm). Fitted by equally weighted least squares on
// the odds-scale residuals of both arms.
struct EffectFit {
  double beta = 0.0;
  std::vector<double> tau;        // size K; 0 at excluded weeks
  double objective_value = 0.0;
  bool converged = false;
  std::vector<int> weeks_used;    // weeks with defined hazards in both arms

  double odds_ratio() const { return std::exp(beta); }
};

namespace detail_effect {

// Closed-form nonnegative minimizer of
// (o0 - tau)^2 + (o1 - tau e^beta)^2 over tau for one week.
inline double profile_tau_one(double o0, double o1, double ebeta) {
  const double t = (o0 + o1 * ebeta) / (1.0 + ebeta * ebeta);
  return t > 0.0 ? t : 0.0;
}

}  // namespace detail_effect

inline std::vector<double> profile_tau(const std::vector<double>& odds0,
                                       const std::vector<double>& odds1,
                                       double beta) {
  const double ebeta = std::exp(beta);
  std::vector<double> tau(odds0.size());
  for (size_t k = 0; k < odds0.size(); ++k)
    tau[k] = detail_effect::profile_tau_one(odds0[k], odds1[k], ebeta);
  return tau;
}

inline double effect_objective(const std::vector<double>& odds0,
                               const std::vector<double>& odds1,
                               const std::vector<double>& tau, double beta) {
  const double ebeta = std::exp(beta);
  double obj = 0.0;
  for (size_t k = 0; k < odds0.size(); ++k) {
    const double r0 = odds0[k] - tau[k];
    const double r1 = odds1[k] - tau[k] * ebeta;
    obj += r0 * r0 + r1 * r1;
  }
  return obj;
}

inline double profiled_objective(const std::vector<double>& odds0,
                                 const std::vector<double>& odds1,
                                 double beta) {
  return effect_objective(odds0, odds1, profile_tau(odds0, odds1, beta), beta);
}

inline constexpr double kBetaBox = 10.0;

// Minimizes the profiled objective over beta in [-kBetaBox, kBetaBox]:
// coarse scan to bracket the minimum, golden-section shrink, then successive
// parabolic steps until the step falls below 1e-10.
inline EffectFit fit_effect(const std::vector<std::optional<double>>& h0,
                            const std::vector<std::optional<double>>& h1) {
  if (h0.size() != h1.size())
    throw ContractError("fit_effect: hazard vectors differ in length");
  const int K = static_cast<int>(h0.size());

  EffectFit fit;
  fit.tau.assign(K, 0.0);
  std::vector<double> odds0, odds1;
  for (int k = 1; k <= K; ++k) {
    const auto& a = h0[k - 1];
    const auto& b = h1[k - 1];
    if (!a.has_value() || !b.has_value()) continue;  // dropped pairwise
    for (double h : {*a, *b}) {
      if (h == 1.0)
        throw ContractError("fit_effect: hazard 1 at week " +
                            std::to_string(k) + " gives infinite odds");
      if (!(h >= 0.0 && h < 1.0))
        throw ContractError("fit_effect: hazard outside [0,1) at week " +
                            std::to_string(k));
    }
    odds0.push_back(*a / (1.0 - *a));
    odds1.push_back(*b / (1.0 - *b));
    fit.weeks_used.push_back(k);
  }
  if (fit.weeks_used.empty())
    throw ContractError("fit_effect: no week has defined hazards in both arms");

  const auto f = [&](double beta) {
    return profiled_objective(odds0, odds1, beta);
  };

  // Coarse scan over the box.
  const int n_scan = 801;
  double best_beta = 0.0, best_val = f(0.0);
  for (int i = 0; i < n_scan; ++i) {
    const double beta = -kBetaBox + 2.0 * kBetaBox * i / (n_scan - 1);
    const double val = f(beta);
    if (val < best_val) {
      best_val = val;
      best_beta = beta;
    }
  }
  const double step = 2.0 * kBetaBox / (n_scan - 1);
  double lo = std::max(-kBetaBox, best_beta - step);
  double hi = std::min(kBetaBox, best_beta + step);

  // Golden-section shrink.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-11) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    }
  }
  double beta = 0.5 * (lo + hi);
  double fbeta = f(beta);

  // Local parabolic refinement.
  double h = 1e-7;
  for (int it = 0; it < 30; ++it) {
    const double fm = f(beta - h), fp = f(beta + h);
    const double denom = fp - 2.0 * fbeta + fm;
    if (!(denom > 0.0)) break;
    const double delta = -0.5 * h * (fp - fm) / denom;
    if (!std::isfinite(delta)) break;
    const double cand =
        std::clamp(beta + delta, -kBetaBox, kBetaBox);
    const double fcand = f(cand);
    if (fcand <= fbeta) {
      const bool done = std::abs(cand - beta) < 1e-10;
      beta = cand;
      fbeta = fcand;
      if (done) break;
    } else {
      h *= 0.5;
      if (h < 1e-12) break;
    }
  }

  // Polish by bisecting the profiled derivative (envelope form) so the
  // returned beta is a machine-precision stationary point; this is what
  // makes swapping the arms negate beta to full precision.
  const auto fprime = [&](double b) {
    const double ebeta = std::exp(b);
    const std::vector<double> tau = profile_tau(odds0, odds1, b);
    double g = 0.0;
    for (size_t k = 0; k < odds0.size(); ++k)
      g += tau[k] * (odds1[k] - tau[k] * ebeta);
    return -2.0 * ebeta * g;
  };
  {
    double radius = 1e-6;
    double blo = std::max(-kBetaBox, beta - radius);
    double bhi = std::min(kBetaBox, beta + radius);
    double glo = fprime(blo), ghi = fprime(bhi);
    while ((glo > 0.0) == (ghi > 0.0) && radius < 2.0 * kBetaBox) {
      radius *= 4.0;
      blo = std::max(-kBetaBox, beta - radius);
      bhi = std::min(kBetaBox, beta + radius);
      glo = fprime(blo);
      ghi = fprime(bhi);
    }
    if (glo <= 0.0 && ghi >= 0.0) {
      for (int it = 0; it < 200 && bhi - blo > 1e-15 * (1.0 + std::abs(beta));
           ++it) {
        const double mid = 0.5 * (blo + bhi);
        if (fprime(mid) <= 0.0)
          blo = mid;
        else
          bhi = mid;
      }
      const double cand = 0.5 * (blo + bhi);
      const double fcand = f(cand);
      if (fcand <= fbeta + 1e-12 * (1.0 + fbeta)) {
        beta = cand;
        fbeta = fcand;
      }
    }
  }

  fit.beta = beta;
  fit.converged = std::abs(std::abs(beta) - kBetaBox) > 1e-6;
  const std::vector<double> tau_used = profile_tau(odds0, odds1, beta);
  for (size_t i = 0; i < fit.weeks_used.size(); ++i)
    fit.tau[fit.weeks_used[i] - 1] = tau_used[i];
  fit.objective_value = effect_objective(odds0, odds1, tau_used, beta);
  return fit;
}

}  // namespace coarseconv
