#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "coarseconv/data_model.hpp"
#include "coarseconv/errors.hpp"
#include "coarseconv/models.hpp"

namespace coarseconv {

struct Design {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> names;
};

// Pooled visit-level design rows for one sub-model:
//   A: one row per (patient, week), response = culture missing;
//   B: rows with observed culture, response = culture negative;
//   D: rows with observed smear, response = smear negative.
// Lag features at week 1 are zero by the I(k>1) gates.
inline Design build_rows(const Cohort& cohort, SubModel which) {
  namespace L = layout;
  const int K = cohort.K;
  const int p = n_coef(which, K);

  std::vector<std::pair<const PatientRecord*, int>> keep;
  for (const auto& pat : cohort.patients) {
    for (int k = 1; k <= K; ++k) {
      const VisitRecord& v = pat.visit(k);
      if (which == SubModel::B && is_missing(v.culture)) continue;
      if (which == SubModel::D && is_missing(v.smear)) continue;
      keep.emplace_back(&pat, k);
    }
  }

  Design d;
  d.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(keep.size()), p);
  d.y.resize(static_cast<Eigen::Index>(keep.size()));
  d.names = coef_names(which, K);

  Eigen::Index r = 0;
  for (const auto& [pat, k] : keep) {
    const VisitRecord& v = pat->visit(k);
    const LagFeatures lf = lag_features(*pat, k);
    auto row = d.X.row(r);
    switch (which) {
      case SubModel::A:
        row[L::a_week(K, k)] = 1;
        if (pat->cavitation) row[L::a_week_cav(K, k)] = 1;
        row[L::a_lag_culture_missing(K)] = lf.culture_missing;
        row[L::a_lag_culture_neg(K)] = lf.culture_obs_negative;
        row[L::a_lag_smear_missing(K)] = lf.smear_missing;
        row[L::a_lag_smear_neg(K)] = lf.smear_obs_negative;
        row[L::a_treatment(K)] = pat->arm;
        d.y[r] = is_missing(v.culture) ? 1.0 : 0.0;
        break;
      case SubModel::B:
        row[L::b_week(K, k)] = 1;
        row[L::b_lag_culture_missing(K)] = lf.culture_missing;
        row[L::b_lag_culture_neg(K)] = lf.culture_obs_negative;
        row[L::b_lag_smear_missing(K)] = lf.smear_missing;
        row[L::b_lag_smear_neg(K)] = lf.smear_obs_negative;
        row[L::b_treatment(K)] = pat->arm;
        row[L::b_cavitation(K)] = pat->cavitation;
        d.y[r] = negativity(v.culture);
        break;
      case SubModel::D:
        row[L::d_week(K, k)] = 1;
        row[L::d_cur_culture_missing(K)] = is_missing(v.culture) ? 1.0 : 0.0;
        row[L::d_cur_culture_neg(K)] =
            (!is_missing(v.culture) && negativity(v.culture)) ? 1.0 : 0.0;
        row[L::d_cur_culture_neg_cav(K)] =
            row[L::d_cur_culture_neg(K)] * pat->cavitation;
        row[L::d_lag_culture_missing(K)] = lf.culture_missing;
        row[L::d_lag_culture_neg(K)] = lf.culture_obs_negative;
        row[L::d_lag_smear_missing(K)] = lf.smear_missing;
        row[L::d_lag_smear_neg(K)] = lf.smear_obs_negative;
        row[L::d_treatment(K)] = pat->arm;
        row[L::d_cavitation(K)] = pat->cavitation;
        d.y[r] = negativity(v.smear);
        break;
    }
    ++r;
  }
  return d;
}

struct FitOptions {
  double ridge = 0.0;        // penalty ridge * ||coef||^2
  int max_iterations = 100;
  double score_tol = 1e-8;
  double loglik_tol = 1e-10;
  double separation_bound = 15.0;
};

struct FitReport {
  std::vector<double> coef;   // full layout; dropped columns hold 0
  std::vector<int> dropped;   // indices of all-zero columns removed pre-fit
  bool converged = false;
  int iterations = 0;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  double max_score = std::numeric_limits<double>::quiet_NaN();
  bool ridged = false;

  bool is_dropped(int j) const {
    for (int k : dropped)
      if (k == j) return true;
    return false;
  }
};

class FitError : public Error {
 public:
  FitError(const std::string& what, FitReport report)
      : Error(what), report(std::move(report)) {}
  FitReport report;
};

// softplus(x) = log(1 + e^x), stable for large |x|.
inline double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double logistic_loglik(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta, double ridge = 0.0) {
  const Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    ll += y[i] * eta[i] - softplus(eta[i]);
  return ll - ridge * beta.squaredNorm();
}

inline Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& beta,
                                      double ridge = 0.0) {
  Eigen::VectorXd mu(X.rows());
  const Eigen::VectorXd eta = X * beta;
  for (Eigen::Index i = 0; i < eta.size(); ++i) mu[i] = expit(eta[i]);
  return X.transpose() * (y - mu) - 2.0 * ridge * beta;
}

// Maximum-likelihood logistic fit by iteratively reweighted least squares
// with step halving. All-zero columns are dropped up front and reported in
// FitReport::dropped; their coefficients come back as 0.
inline FitReport fit_logistic(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y,
                              const FitOptions& opt = {}) {
  if (X.rows() == 0) throw ContractError("fit_logistic: no rows");
  if (X.rows() != y.size())
    throw ContractError("fit_logistic: X/y size mismatch");

  const int p = static_cast<int>(X.cols());
  FitReport rep;
  rep.coef.assign(p, 0.0);
  rep.ridged = opt.ridge > 0.0;

  std::vector<int> active;
  for (int j = 0; j < p; ++j) {
    if (X.col(j).cwiseAbs().maxCoeff() > 0.0)
      active.push_back(j);
    else
      rep.dropped.push_back(j);
  }
  if (active.empty()) throw FitError("all columns are zero", rep);

  Eigen::MatrixXd Xa(X.rows(), static_cast<Eigen::Index>(active.size()));
  for (size_t j = 0; j < active.size(); ++j)
    Xa.col(static_cast<Eigen::Index>(j)) = X.col(active[j]);

  const auto pack = [&](const Eigen::VectorXd& beta, FitReport& out) {
    for (size_t j = 0; j < active.size(); ++j)
      out.coef[active[j]] = beta[static_cast<Eigen::Index>(j)];
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(Xa.cols());
  double ll = logistic_loglik(Xa, y, beta, opt.ridge);

  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    const Eigen::VectorXd eta = Xa * beta;
    Eigen::VectorXd mu(eta.size()), w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu[i] = expit(eta[i]);
      w[i] = mu[i] * (1.0 - mu[i]);
    }
    const Eigen::VectorXd score =
        Xa.transpose() * (y - mu) - 2.0 * opt.ridge * beta;
    const double max_score = score.cwiseAbs().maxCoeff();

    rep.iterations = iter - 1;
    rep.loglik = ll;
    rep.max_score = max_score;

    if (max_score < opt.score_tol) {
      rep.converged = true;
      pack(beta, rep);
      return rep;
    }
    if (beta.cwiseAbs().maxCoeff() > opt.separation_bound) {
      pack(beta, rep);
      throw FitError(
          "complete separation suspected (|coef| > " +
              std::to_string(opt.separation_bound) +
              " with non-vanishing score); consider a ridge penalty",
          rep);
    }

    Eigen::MatrixXd H = Xa.transpose() * w.asDiagonal() * Xa;
    if (opt.ridge > 0.0)
      H.diagonal().array() += 2.0 * opt.ridge;
    const Eigen::VectorXd step = H.ldlt().solve(score);
    if (!step.allFinite()) {
      pack(beta, rep);
      throw FitError("IRLS system is singular", rep);
    }

    // Step-halving keeps the log-likelihood non-decreasing, up to the
    // floating-point resolution of the log-likelihood itself (near the
    // optimum a productive Newton step moves it by less than one ulp).
    const double noise = 1e-12 * (std::abs(ll) + 1.0);
    double t = 1.0;
    Eigen::VectorXd cand = beta + step;
    double ll_new = logistic_loglik(Xa, y, cand, opt.ridge);
    int halvings = 0;
    while (!(ll_new >= ll - noise) && halvings < 40) {
      t *= 0.5;
      cand = beta + t * step;
      ll_new = logistic_loglik(Xa, y, cand, opt.ridge);
      ++halvings;
    }
    const double rel_change =
        std::abs(ll_new - ll) / (std::abs(ll) + 1.0);
    beta = cand;
    ll = ll_new;

    if (rel_change < opt.loglik_tol) {
      // Accept the stagnation exit only once the score is resolved too;
      // near the optimum the log-likelihood moves like the squared score,
      // so it flattens several Newton steps before the score does.
      const Eigen::VectorXd final_score =
          logistic_score(Xa, y, beta, opt.ridge);
      const double final_max = final_score.cwiseAbs().maxCoeff();
      if (final_max < opt.score_tol) {
        rep.converged = true;
        rep.iterations = iter;
        rep.loglik = ll;
        rep.max_score = final_max;
        pack(beta, rep);
        return rep;
      }
    }
  }

  rep.iterations = opt.max_iterations;
  pack(beta, rep);
  throw FitError("IRLS did not converge after " +
                     std::to_string(opt.max_iterations) + " iterations",
                 rep);
}

inline FitReport fit_submodel(const Cohort& cohort, SubModel which,
                              const FitOptions& opt = {}) {
  const Design d = build_rows(cohort, which);
  return fit_logistic(d.X, d.y, opt);
}

// Fits the three analysis sub-models; they are independent of each other.
inline ModelParams fit_all(const Cohort& cohort, const FitOptions& opt = {}) {
  ModelParams mp;
  mp.K = cohort.K;
  mp.a = fit_submodel(cohort, SubModel::A, opt).coef;
  mp.b = fit_submodel(cohort, SubModel::B, opt).coef;
  mp.d = fit_submodel(cohort, SubModel::D, opt).coef;
  return mp;
}

}  // namespace coarseconv
