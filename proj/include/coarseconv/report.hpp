#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coarseconv/analysis.hpp"
#include "coarseconv/data_model.hpp"
#include "coarseconv/errors.hpp"
#include "coarseconv/version.hpp"

namespace coarseconv {

// Fixed-format number rendering so repeated runs emit identical bytes.
inline std::string fmt_num(double x) {
  if (!std::isfinite(x)) return "";  // NaN/inf render as empty cells
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Tracks files written into an output directory so a failed run can remove
// its partial outputs.
class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream create(const std::string& name) {
    const auto path = dir_ / name;
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file " + path.string());
    written_.push_back(path);
    return out;
  }

  void discard_all() {
    for (const auto& p : written_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
    written_.clear();
  }

  const std::filesystem::path& path() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
};

namespace detail_report {

inline void write_model_table(std::ofstream out, const FitReport& rep,
                              const std::vector<std::string>& names,
                              const BootstrapOutcome* boot,
                              size_t boot_offset) {
  out << "term,estimate,odds_ratio,ci_low,ci_high,note\n";
  for (size_t j = 0; j < rep.coef.size(); ++j) {
    const bool dropped = rep.is_dropped(static_cast<int>(j));
    out << names[j] << ',';
    if (!dropped)
      out << fmt_num(rep.coef[j]) << ',' << fmt_num(std::exp(rep.coef[j]));
    else
      out << ',';
    out << ',';
    if (boot && !dropped)
      out << fmt_num(boot->lower[boot_offset + j]) << ','
          << fmt_num(boot->upper[boot_offset + j]);
    else
      out << ',';
    out << ',' << (dropped ? "dropped" : "") << '\n';
  }
}

}  // namespace detail_report

// Writes the full analyze report bundle. Returns the list of file names.
inline std::vector<std::string> write_analysis_outputs(
    OutputDir& dir, const AnalysisResult& result, const AnalysisConfig& cfg,
    const Cohort& cohort, const std::string& input_path) {
  std::vector<std::string> files;

  const size_t na = result.point.fit_a.coef.size();
  const size_t nb = result.point.fit_b.coef.size();
  const BootstrapOutcome* boot =
      result.boot.has_value() ? &*result.boot : nullptr;

  detail_report::write_model_table(dir.create("model_a_coefficients.csv"),
                                   result.point.fit_a,
                                   coef_names(SubModel::A, cfg.K), boot, 0);
  files.push_back("model_a_coefficients.csv");
  detail_report::write_model_table(dir.create("model_b_coefficients.csv"),
                                   result.point.fit_b,
                                   coef_names(SubModel::B, cfg.K), boot, na);
  files.push_back("model_b_coefficients.csv");
  detail_report::write_model_table(dir.create("model_d_coefficients.csv"),
                                   result.point.fit_d,
                                   coef_names(SubModel::D, cfg.K), boot,
                                   na + nb);
  files.push_back("model_d_coefficients.csv");

  {
    auto out = dir.create("distributions.csv");
    out << "arm,alpha,week,pmf,cdf,hazard\n";
    for (const auto& d : result.point.distributions) {
      for (int t = 1; t <= d.K() + 1; ++t) {
        out << d.arm << ',' << fmt_num(d.alpha) << ',' << t << ','
            << fmt_num(d.pmf[t - 1]) << ',';
        if (t <= d.K())
          out << fmt_num(d.cdf[t - 1]) << ',' << fmt_num(d.hazard[t - 1]);
        else
          out << ',';
        out << '\n';
      }
    }
    files.push_back("distributions.csv");
  }

  {
    auto out = dir.create("kolmogorov.csv");
    out << "arm,alpha,k_star,signed_distance\n";
    for (const auto& row : result.point.kolmogorov)
      out << row.arm << ',' << fmt_num(row.alpha) << ',' << row.k_star << ','
          << fmt_num(row.distance) << '\n';
    files.push_back("kolmogorov.csv");
  }

  {
    auto out = dir.create("contour.csv");
    out << "alpha0,alpha1,beta_hat,or_hat,ci_low,ci_high,reject_null,error\n";
    for (const auto& row : result.point.contour) {
      out << fmt_num(row.alpha0) << ',' << fmt_num(row.alpha1) << ','
          << fmt_num(row.beta) << ',' << fmt_num(row.odds_ratio) << ','
          << fmt_num(row.ci_low) << ',' << fmt_num(row.ci_high) << ','
          << (row.error.empty() ? (row.reject_null ? "1" : "0") : "") << ','
          << row.error << '\n';
    }
    files.push_back("contour.csv");
  }

  if (boot && cfg.keep_replicates) {
    auto out = dir.create("replicates.csv");
    out << "replicate,estimand,value\n";
    for (size_t b = 0; b < boot->replicate_values.size(); ++b)
      for (size_t j = 0; j < boot->names.size(); ++j)
        out << b << ',' << boot->names[j] << ','
            << fmt_num(boot->replicate_values[b][j]) << '\n';
    files.push_back("replicates.csv");
  }

  if (cfg.dump_imputations) {
    // per-patient view of the sensitivity machinery: feasible times,
    // benchmark probabilities, and the tilted q/mass curves over the
    // patient's own arm grid
    const CohortImputations ci = precompute_cohort(cohort, result.point.params);
    nlohmann::ordered_json patients = nlohmann::ordered_json::array();
    for (const auto& pi : ci.patients) {
      nlohmann::ordered_json entry;
      entry["id"] = pi.id;
      entry["arm"] = pi.arm;
      entry["cavitation"] = pi.cavitation;
      entry["times"] = pi.cs.times;
      entry["benchmark"] = pi.benchmark;
      nlohmann::ordered_json curves = nlohmann::ordered_json::array();
      for (double alpha : pi.arm ? cfg.grid.alpha1 : cfg.grid.alpha0) {
        nlohmann::ordered_json curve;
        curve["alpha"] = alpha;
        std::vector<double> q;
        for (double b : pi.benchmark) q.push_back(tilt(b, alpha));
        curve["q"] = q;
        curve["mass"] = apply_tilt(pi, alpha).mass;
        curves.push_back(std::move(curve));
      }
      entry["curves"] = std::move(curves);
      patients.push_back(std::move(entry));
    }
    auto out = dir.create("imputations.json");
    out << patients.dump(2) << '\n';
    files.push_back("imputations.json");
  }

  {
    nlohmann::ordered_json cfg_json;
    cfg_json["k"] = cfg.K;
    cfg_json["alpha0"] = cfg.grid.alpha0;
    cfg_json["alpha1"] = cfg.grid.alpha1;
    cfg_json["standardize"] = cfg.standardize;
    cfg_json["ridge"] = cfg.ridge;
    cfg_json["bootstrap"] = cfg.bootstrap_replicates;
    cfg_json["seed"] = cfg.seed;
    cfg_json["level"] = cfg.level;

    nlohmann::ordered_json m;
    m["tool"] = {{"name", "coarseconv"}, {"version", kVersion}};
    m["config"] = cfg_json;
    m["config_hash"] = fnv1a64(cfg_json.dump());
    m["input"] = {{"path", input_path},
                  {"patients", cohort.patients.size()},
                  {"arm0", count_in_arm(cohort, 0)},
                  {"arm1", count_in_arm(cohort, 1)}};
    m["pooled_cavitation_weight"] = result.point.pooled_cavitation_weight;
    m["clamp_events"] = result.point.stats.clamp_events;
    if (boot) {
      m["bootstrap"] = {{"replicates", boot->B},
                        {"level", cfg.level},
                        {"failed", boot->failed.size()},
                        {"failed_indices", boot->failed}};
    }
    m["warnings"] = result.point.warnings;

    auto out = dir.create("manifest.json");
    out << m.dump(2) << '\n';
    files.push_back("manifest.json");
  }

  return files;
}

}  // namespace coarseconv
