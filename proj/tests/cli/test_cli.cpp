#include <catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  const char* bin = std::getenv("COARSECONV_BIN");
  REQUIRE(bin != nullptr);
  const std::string cmd = std::string(bin) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buf;
  while (size_t n = fread(buf.data(), 1, buf.size(), pipe))
    r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("simulate emits a parseable cohort of the requested size", "[cli]") {
  TempDir tmp("coarseconv_cli_sim");
  const auto csv = tmp.path / "sim.csv";
  const RunResult r = run("simulate --k 4 --n 12 --seed 3 --out " +
                          csv.string());
  REQUIRE(r.exit_code == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("patient_id,arm,cavitation,week,culture,smear", 0) == 0);
  // 24 patients x 4 weeks + header
  int lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 24 * 4 + 1);
}

TEST_CASE("coarsen reports Table-style audit rows", "[cli]") {
  TempDir tmp("coarseconv_cli_coarsen");
  const auto csv = tmp.path / "two.csv";
  {
    std::ofstream out(csv);
    out << "patient_id,arm,cavitation,week,culture,smear\n";
    const char* cultures[8] = {"miss", "pos", "miss", "neg",
                               "miss", "neg", "neg", "neg"};
    for (int wk = 1; wk <= 8; ++wk)
      out << "p7,1,1," << wk << ',' << cultures[wk - 1] << ",miss\n";
  }
  const RunResult r = run("coarsen --k 8 --input " + csv.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("p7,1,1,NNUUUYYY,3,6,3;4;6") != std::string::npos);
}

TEST_CASE("analyze writes the full report bundle", "[cli]") {
  TempDir tmp("coarseconv_cli_analyze");
  const auto csv = tmp.path / "cohort.csv";
  REQUIRE(run("simulate --k 4 --n 60 --seed 11 --out " + csv.string())
              .exit_code == 0);

  const auto out = tmp.path / "report";
  const RunResult r =
      run("analyze --input " + csv.string() + " --k 4 --alpha0 0 --alpha1 0 "
          "--bootstrap 12 --seed 5 --threads 2 --dump-replicates "
          "--dump-imputations --out " + out.string());
  REQUIRE(r.exit_code == 0);
  for (const char* f :
       {"model_a_coefficients.csv", "model_b_coefficients.csv",
        "model_d_coefficients.csv", "distributions.csv", "kolmogorov.csv",
        "contour.csv", "manifest.json", "replicates.csv",
        "imputations.json"})
    CHECK(fs::exists(out / f));
  const std::string imput = slurp(out / "imputations.json");
  CHECK(imput.find("\"times\"") != std::string::npos);
  CHECK(imput.find("\"benchmark\"") != std::string::npos);
  CHECK(imput.find("\"mass\"") != std::string::npos);

  // single-point grid -> exactly one contour row after the header
  const std::string contour = slurp(out / "contour.csv");
  int lines = 0;
  for (char c : contour) lines += c == '\n';
  CHECK(lines == 2);
  CHECK(contour.find("alpha0,alpha1,beta_hat,or_hat") == 0);
}

TEST_CASE("analyze supports list and range alpha grids", "[cli]") {
  TempDir tmp("coarseconv_cli_grid");
  const auto csv = tmp.path / "cohort.csv";
  REQUIRE(run("simulate --k 4 --n 40 --seed 13 --out " + csv.string())
              .exit_code == 0);
  const auto out = tmp.path / "report";
  const RunResult r =
      run("analyze --input " + csv.string() +
          " --k 4 --alpha0 -4,0,4 --alpha1 -4:4:4 --bootstrap 0 --out " +
          out.string());
  REQUIRE(r.exit_code == 0);
  const std::string contour = slurp(out / "contour.csv");
  int lines = 0;
  for (char c : contour) lines += c == '\n';
  CHECK(lines == 10);  // header + 3x3 grid
}

TEST_CASE("malformed CSV exits with code 2 and a row-numbered report",
          "[cli]") {
  TempDir tmp("coarseconv_cli_bad");
  const auto csv = tmp.path / "bad.csv";
  {
    std::ofstream out(csv);
    out << "patient_id,arm,cavitation,week,culture,smear\n";
    out << "p1,0,0,1,neg,neg\n";
    out << "p1,0,0,2,banana,neg\n";
  }
  const auto out = tmp.path / "report";
  const RunResult r = run("analyze --input " + csv.string() +
                          " --k 2 --bootstrap 0 --out " + out.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("\"row\":3") != std::string::npos);
  CHECK(r.output.find("banana") != std::string::npos);
}

TEST_CASE("failed analyze leaves no partial outputs", "[cli]") {
  TempDir tmp("coarseconv_cli_partial");
  const auto csv = tmp.path / "cohort.csv";
  // all patients in one arm: analysis must fail after parsing
  {
    std::ofstream out(csv);
    out << "patient_id,arm,cavitation,week,culture,smear\n";
    for (int i = 0; i < 4; ++i)
      for (int wk = 1; wk <= 2; ++wk)
        out << 'p' << i << ",1,0," << wk << ",neg,neg\n";
  }
  const auto out = tmp.path / "report";
  const RunResult r = run("analyze --input " + csv.string() +
                          " --k 2 --bootstrap 0 --out " + out.string());
  CHECK(r.exit_code != 0);
  if (fs::exists(out)) {
    int files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(out)) ++files;
    CHECK(files == 0);
  }
}

TEST_CASE("repeated runs with one seed are byte-identical", "[cli]") {
  TempDir tmp("coarseconv_cli_determinism");
  const auto csv = tmp.path / "cohort.csv";
  REQUIRE(run("simulate --k 4 --n 50 --seed 17 --out " + csv.string())
              .exit_code == 0);
  const std::string common =
      "analyze --input " + csv.string() +
      " --k 4 --alpha0 -2,0 --alpha1 0,2 --bootstrap 16 --seed 21 "
      "--threads 2 --out ";
  const auto out1 = tmp.path / "r1";
  const auto out2 = tmp.path / "r2";
  REQUIRE(run(common + out1.string()).exit_code == 0);
  REQUIRE(run(common + out2.string()).exit_code == 0);
  for (const char* f :
       {"model_a_coefficients.csv", "model_b_coefficients.csv",
        "model_d_coefficients.csv", "distributions.csv", "kolmogorov.csv",
        "contour.csv"})
    CHECK(slurp(out1 / f) == slurp(out2 / f));
  // manifests differ only in the input path when paths differ; here they
  // share the input, so they match byte for byte too
  CHECK(slurp(out1 / "manifest.json") == slurp(out2 / "manifest.json"));
}

TEST_CASE("environment variables provide defaults", "[cli]") {
  TempDir tmp("coarseconv_cli_env");
  const auto csv = tmp.path / "cohort.csv";
  REQUIRE(run("simulate --k 3 --n 20 --seed 23 --out " + csv.string())
              .exit_code == 0);
  const char* bin = std::getenv("COARSECONV_BIN");
  REQUIRE(bin != nullptr);
  const auto out = tmp.path / "report";
  const std::string cmd = "COARSECONV_K=3 COARSECONV_INPUT=" + csv.string() +
                          " " + std::string(bin) +
                          " analyze --alpha0 0 --alpha1 0 --bootstrap 0 "
                          "--out " + out.string() + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 1024> buf;
  while (fread(buf.data(), 1, buf.size(), pipe) > 0) {
  }
  REQUIRE(WEXITSTATUS(pclose(pipe)) == 0);
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("validate battery passes", "[cli][slow]") {
  const RunResult r = run("validate --seed 20150707");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("[FAIL]") == std::string::npos);
  CHECK(r.output.find("golden-patterns") != std::string::npos);
}
