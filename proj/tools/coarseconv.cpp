// Command-line front end: cohort analysis with sensitivity grids and
// bootstrap intervals, synthetic-cohort generation, coarsening-set audit,
// and the built-in oracle test battery.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coarseconv/analysis.hpp"
#include "coarseconv/coarsening.hpp"
#include "coarseconv/data_model.hpp"
#include "coarseconv/report.hpp"
#include "coarseconv/simulate.hpp"
#include "coarseconv/validate.hpp"
#include "coarseconv/version.hpp"

namespace {

using namespace coarseconv;

[[noreturn]] void die_json(const std::string& type, const std::string& message,
                           int exit_code, int row = -1) {
  nlohmann::ordered_json err;
  err["error"] = type;
  err["message"] = message;
  if (row >= 0) err["row"] = row;
  std::cerr << err.dump() << '\n';
  std::exit(exit_code);
}

// Alpha grid spec: either a comma list ("-4,0,4") or "lo:hi:step".
std::vector<double> parse_alpha_spec(const std::string& spec) {
  auto parse_num = [&](const std::string& s) {
    size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw Error("bad number '" + s + "' in alpha spec '" + spec + "'");
    }
    if (pos != s.size())
      throw Error("bad number '" + s + "' in alpha spec '" + spec + "'");
    return v;
  };
  std::vector<std::string> parts;
  {
    std::string cur;
    const char sep = spec.find(':') != std::string::npos ? ':' : ',';
    for (char c : spec) {
      if (c == sep) {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    parts.push_back(cur);
    if (sep == ':') {
      if (parts.size() != 3)
        throw Error("range spec must be lo:hi:step, got '" + spec + "'");
      const double lo = parse_num(parts[0]);
      const double hi = parse_num(parts[1]);
      const double step = parse_num(parts[2]);
      if (step <= 0) throw Error("alpha step must be positive");
      if (hi < lo) throw Error("alpha range has hi < lo");
      std::vector<double> out;
      for (int i = 0;; ++i) {
        const double v = lo + i * step;
        if (v > hi + 1e-9) break;
        out.push_back(v);
      }
      return out;
    }
  }
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(parse_num(p));
  if (out.empty()) throw Error("alpha grid is empty");
  return out;
}

Cohort load_cohort(const std::string& path, int K) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open input file " + path);
  return parse_cohort(in, K);
}

SimConfig sim_config_from_json(const std::string& path, int K, int n,
                               std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open gamma file " + path);
  nlohmann::json j;
  in >> j;
  SimConfig cfg = default_scenario(K, n, seed);
  if (j.contains("k") && j["k"].get<int>() != K)
    throw Error("gamma file is for k=" + std::to_string(j["k"].get<int>()) +
                ", run requested k=" + std::to_string(K));
  if (j.contains("cav_prevalence")) {
    cfg.cav_prevalence[0] = j["cav_prevalence"][0].get<double>();
    cfg.cav_prevalence[1] = j["cav_prevalence"][1].get<double>();
  }
  auto load_vec = [&](const char* key, std::vector<double>& dst, int want) {
    if (!j.contains(key)) return;
    dst = j[key].get<std::vector<double>>();
    if (static_cast<int>(dst.size()) != want)
      throw Error(std::string(key) + " must have " + std::to_string(want) +
                  " entries for k=" + std::to_string(K));
  };
  load_vec("gamma_a", cfg.law.abd.a, layout::a_size(K));
  load_vec("gamma_b", cfg.law.abd.b, layout::b_size(K));
  load_vec("gamma_d", cfg.law.abd.d, layout::d_size(K));
  load_vec("gamma_c", cfg.law.smear_missing.c, layout::c_size(K));
  return cfg;
}

int cmd_analyze(const std::string& input, const std::string& outdir,
                AnalysisConfig cfg, const std::string& alpha0_spec,
                const std::string& alpha1_spec) {
  cfg.grid.alpha0 = parse_alpha_spec(alpha0_spec);
  cfg.grid.alpha1 = parse_alpha_spec(alpha1_spec);

  Cohort cohort;
  try {
    cohort = load_cohort(input, cfg.K);
  } catch (const ParseError& e) {
    die_json("parse", e.what(), 2, e.row());
  } catch (const Error& e) {
    die_json("io", e.what(), 1);
  }
  for (int arm = 0; arm <= 1; ++arm)
    if (count_in_arm(cohort, arm) == 0)
      die_json("data", "arm " + std::to_string(arm) + " has no patients", 1);

  OutputDir dir(outdir);
  try {
    const AnalysisResult result = run_analysis(cohort, cfg);
    write_analysis_outputs(dir, result, cfg, cohort, input);
    for (const auto& w : result.point.warnings)
      std::cerr << "warning: " << w << '\n';
    if (result.boot && !result.boot->failed.empty())
      std::cerr << "warning: " << result.boot->failed.size()
                << " bootstrap replicates failed and were excluded\n";
  } catch (const Error& e) {
    dir.discard_all();
    die_json("analysis", e.what(), 1);
  } catch (const std::exception& e) {
    dir.discard_all();
    die_json("internal", e.what(), 1);
  }
  return 0;
}

int cmd_simulate(int K, int n, std::uint64_t seed, const std::string& out_path,
                 const std::string& gamma_json) {
  SimConfig cfg = gamma_json.empty()
                      ? default_scenario(K, n, seed)
                      : sim_config_from_json(gamma_json, K, n, seed);
  const Cohort cohort = generate(cfg);
  if (out_path.empty() || out_path == "-") {
    serialize_cohort(cohort, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error("cannot open output file " + out_path);
    serialize_cohort(cohort, out);
  }
  return 0;
}

int cmd_coarsen(const std::string& input, int K, const std::string& out_path) {
  Cohort cohort;
  try {
    cohort = load_cohort(input, K);
  } catch (const ParseError& e) {
    die_json("parse", e.what(), 2, e.row());
  }
  std::ostringstream out;
  out << "patient_id,arm,cavitation,status,L,R_plus_1,times\n";
  for (const auto& p : cohort.patients) {
    const ConversionStatus st = conversion_status(p);
    const CoarseningSet cs = coarsening_set(p);
    out << p.id << ',' << p.arm << ',' << p.cavitation << ','
        << st.to_string() << ',' << cs.L << ',' << cs.R_plus_1 << ',';
    for (size_t i = 0; i < cs.times.size(); ++i)
      out << (i ? ";" : "") << cs.times[i];
    out << '\n';
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << out.str();
  } else {
    std::ofstream f(out_path);
    if (!f) throw Error("cannot open output file " + out_path);
    f << out.str();
  }
  return 0;
}

int cmd_validate(std::uint64_t seed) {
  const auto results = run_validation_battery(seed);
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("[%s] %s: %s (%.2f s)\n", r.pass ? "PASS" : "FAIL",
                r.name.c_str(), r.detail.c_str(), r.seconds);
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coarseconv: conversion-time estimation from longitudinal "
               "binary test data with intermittently missing results"};
  app.set_version_flag("--version", std::string("coarseconv ") + kVersion);
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "Fit models and emit sensitivity-analysis report tables");
  std::string input, outdir;
  std::string alpha0_spec = "-10:6:1", alpha1_spec = "-10:6:1";
  AnalysisConfig acfg;
  bool no_standardize = false, dump_replicates = false;
  analyze->add_option("--input", input, "cohort CSV file")
      ->required()
      ->envname("COARSECONV_INPUT");
  analyze->add_option("--out", outdir, "output directory")
      ->required()
      ->envname("COARSECONV_OUT");
  analyze->add_option("--k", acfg.K, "number of scheduled visits")
      ->envname("COARSECONV_K");
  analyze->add_option("--alpha0", alpha0_spec,
                      "control-arm alpha grid: list or lo:hi:step")
      ->envname("COARSECONV_ALPHA0");
  analyze->add_option("--alpha1", alpha1_spec,
                      "treated-arm alpha grid: list or lo:hi:step")
      ->envname("COARSECONV_ALPHA1");
  analyze->add_option("--bootstrap", acfg.bootstrap_replicates,
                      "bootstrap replicates (0 disables intervals)")
      ->envname("COARSECONV_BOOTSTRAP");
  analyze->add_option("--seed", acfg.seed, "bootstrap seed")
      ->envname("COARSECONV_SEED");
  analyze->add_option("--level", acfg.level, "confidence level")
      ->envname("COARSECONV_LEVEL");
  analyze->add_option("--ridge", acfg.ridge, "ridge penalty for the fits")
      ->envname("COARSECONV_RIDGE");
  analyze->add_option("--threads", acfg.threads, "worker threads (0 = auto)")
      ->envname("COARSECONV_THREADS");
  analyze->add_flag("--no-standardize", no_standardize,
                    "skip cavitation standardization");
  analyze->add_flag("--dump-replicates", dump_replicates,
                    "write per-replicate estimand values");
  bool dump_imputations = false;
  analyze->add_flag("--dump-imputations", dump_imputations,
                    "write per-patient feasible times, benchmark "
                    "probabilities, and tilted mass curves");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic cohort CSV from a known data law");
  int sim_k = 8, sim_n = 100;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "-", gamma_json;
  simulate->add_option("--k", sim_k, "number of scheduled visits");
  simulate->add_option("--n", sim_n, "patients per arm")->required();
  simulate->add_option("--seed", sim_seed, "generator seed")
      ->envname("COARSECONV_SEED");
  simulate->add_option("--out", sim_out, "output file ('-' = stdout)");
  simulate->add_option("--gamma-json", gamma_json,
                       "JSON file overriding the built-in data law");

  // coarsen
  auto* coarsen = app.add_subcommand(
      "coarsen", "Emit per-patient conversion statuses and coarsening sets");
  std::string co_input, co_out = "-";
  int co_k = 8;
  coarsen->add_option("--input", co_input, "cohort CSV file")
      ->required()
      ->envname("COARSECONV_INPUT");
  coarsen->add_option("--k", co_k, "number of scheduled visits")
      ->envname("COARSECONV_K");
  coarsen->add_option("--out", co_out, "output file ('-' = stdout)");

  // validate
  auto* validate =
      app.add_subcommand("validate", "Run the built-in oracle test battery");
  std::uint64_t val_seed = 20150707;
  validate->add_option("--seed", val_seed, "battery seed")
      ->envname("COARSECONV_SEED");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      acfg.standardize = !no_standardize;
      acfg.keep_replicates = dump_replicates;
      acfg.dump_imputations = dump_imputations;
      return cmd_analyze(input, outdir, acfg, alpha0_spec, alpha1_spec);
    }
    if (*simulate) return cmd_simulate(sim_k, sim_n, sim_seed, sim_out, gamma_json);
    if (*coarsen) return cmd_coarsen(co_input, co_k, co_out);
    if (*validate) return cmd_validate(val_seed);
  } catch (const ParseError& e) {
    die_json("parse", e.what(), 2, e.row());
  } catch (const Error& e) {
    die_json("error", e.what(), 1);
  } catch (const std::exception& e) {
    die_json("internal", e.what(), 1);
  }
  return 0;
}
