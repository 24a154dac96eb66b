#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "spreadfft/fft_pricer.hpp"
#include "spreadfft/io.hpp"
#include "spreadfft/oracles.hpp"

using namespace spreadfft;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const std::string err_path = "/tmp/spreadfft_cli_stderr.txt";
  const std::string cmd =
      std::string(SPREADFFT_CLI_PATH) + " " + args + " 2>" + err_path;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  CliResult r;
  char buf[4096];
  size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(err_path);
  r.err.assign(std::istreambuf_iterator<char>(f),
               std::istreambuf_iterator<char>());
  return r;
}

size_t col(const Table& t, const std::string& name) {
  for (size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return i;
  FAIL("missing column " << name);
  return 0;
}

std::string meta_value(const Table& t, const std::string& key) {
  for (const auto& [k, v] : t.meta)
    if (k == key) return v;
  FAIL("missing meta key " << key);
  return {};
}

json error_json(const CliResult& r) { return json::parse(r.err); }

}  // namespace

TEST_CASE("price emits a self-describing csv matching the quadrature oracle") {
  const CliResult r = run_cli("price --strikes 4.0 2.0");
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  CHECK(meta_value(t, "version") == kArtifactVersion);
  const json cfg = json::parse(meta_value(t, "cfg"));
  CHECK(cfg.at("N").get<int>() == 256);
  CHECK(cfg.at("command").get<std::string>() == "price");
  REQUIRE(t.rows.size() == 2);
  const size_t kk = col(t, "K"), pp = col(t, "price"), mm = col(t, "method");
  const GbmParams gbm;
  for (const auto& row : t.rows) {
    const double k = std::stod(row[kk]);
    const double want = gbm_benchmark(gbm, 100.0, 96.0, k);
    CHECK(std::abs(std::stod(row[pp]) - want) <= 5e-6);
    CHECK(row[mm] == "re-anchor");
  }
}

TEST_CASE("price methods: interpolated and fixed-panel reads stay close") {
  const GbmParams gbm;
  const double want = gbm_benchmark(gbm, 100.0, 96.0, 3.0);

  const CliResult ri = run_cli("price --strikes 2.0 3.0 --method interp");
  REQUIRE(ri.code == 0);
  const Table ti = parse_csv(ri.out);
  REQUIRE(ti.rows.size() == 2);
  CHECK(ti.rows[1][col(ti, "method")] == "interp");
  CHECK(std::abs(std::stod(ti.rows[1][col(ti, "price")]) - want) <= 1e-5);

  // The fixed-panel read is only accurate near the panel center, so probe it
  // at a small log-moneyness.
  const CliResult rb =
      run_cli("price --S10 1.2 --S20 0.9 --strikes 1.0 --method bicubic");
  REQUIRE(rb.code == 0);
  const Table tb = parse_csv(rb.out);
  REQUIRE(tb.rows.size() == 1);
  CHECK(tb.rows[0][col(tb, "method")] == "bicubic");
  const double want_b = gbm_benchmark(gbm, 1.2, 0.9, 1.0);
  CHECK(std::abs(std::stod(tb.rows[0][col(tb, "price")]) - want_b) <= 1e-4);
}

TEST_CASE("price rejects bad configuration with exit 2 and an error record") {
  SUBCASE("no strikes") {
    const CliResult r = run_cli("price");
    CHECK(r.code == 2);
    const json e = error_json(r);
    CHECK(e.at("error").get<std::string>() == "ConfigError");
    CHECK(e.at("message").get<std::string>().find("no strikes") !=
          std::string::npos);
  }
  SUBCASE("unknown model") {
    const CliResult r = run_cli("price --model heston --strikes 1.0");
    CHECK(r.code == 2);
    CHECK(error_json(r).at("message").get<std::string>().find(
              "unknown model") != std::string::npos);
  }
  SUBCASE("inadmissible contour") {
    const CliResult r =
        run_cli("price --strikes 1.0 --eps1 -1.0 --eps2 0.5");
    CHECK(r.code == 2);
    CHECK(error_json(r).at("message").get<std::string>().find(
              "inadmissible") != std::string::npos);
  }
  SUBCASE("lattice size not a power of two") {
    const CliResult r = run_cli("price --strikes 1.0 --N 100");
    CHECK(r.code == 2);
    CHECK(error_json(r).at("error").get<std::string>() == "ConfigError");
  }
  SUBCASE("unknown flag") {
    const CliResult r = run_cli("price --strikes 1.0 --frobnicate 3");
    CHECK(r.code == 2);
  }
}

TEST_CASE("greeks round-trips the library values digit for digit") {
  const CliResult r = run_cli("greeks --strike 4.0 --greeks delta1 vega1");
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.rows.size() == 2);
  const GbmParams p;
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  const EpsilonShift2 eps;
  const size_t gf = col(t, "fft"), gd = col(t, "fd");
  CHECK(std::stod(t.rows[0][gf]) ==
        greek_at(Model{p}, Greek::delta1, 100.0, 96.0, 4.0, lat, eps));
  CHECK(std::stod(t.rows[1][gf]) ==
        greek_at(Model{p}, Greek::vega1, 100.0, 96.0, 4.0, lat, eps));
  CHECK(std::stod(t.rows[0][gd]) ==
        greek_fd(Model{p}, Greek::delta1, 100.0, 96.0, 4.0, lat, eps));
}

TEST_CASE("greeks rejects unsupported requests with exit 2") {
  SUBCASE("zero finite-difference displacement") {
    const CliResult r = run_cli("greeks --displacement 0.0");
    CHECK(r.code == 2);
    CHECK(error_json(r).at("message").get<std::string>().find(
              "displacement") != std::string::npos);
  }
  SUBCASE("model without analytic multipliers") {
    const CliResult r = run_cli("greeks --model sv");
    CHECK(r.code == 2);
    CHECK(error_json(r).at("error").get<std::string>() == "UnsupportedGreek");
  }
  SUBCASE("unknown greek name") {
    const CliResult r = run_cli("greeks --greeks vomma");
    CHECK(r.code == 2);
    CHECK(error_json(r).at("error").get<std::string>() == "UnsupportedGreek");
  }
}

TEST_CASE("err-study sweeps cells and skips infeasible ones") {
  const CliResult r = run_cli("err-study --N-list 64 256 --ubar-list 80");
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.rows.size() == 2);
  const size_t st = col(t, "status"), ea = col(t, "err_abs");
  // At ubar = 80 the N = 64 trusted span cannot cover the study grid.
  CHECK(t.rows[0][st] == "skipped");
  CHECK(t.rows[0][ea].empty());
  CHECK(t.rows[1][st] == "ok");
  const double err_abs = std::stod(t.rows[1][ea]);
  CHECK(err_abs > 0.0);
  CHECK(err_abs < 1e-2);
}

TEST_CASE("err-study needs a simulated benchmark for non-lognormal models") {
  const CliResult r = run_cli("err-study --model vg --N-list 256 --ubar-list 40");
  CHECK(r.code == 2);
  CHECK(error_json(r).at("message").get<std::string>().find("mc-paths") !=
        std::string::npos);
}

TEST_CASE("bench reports one timing row per model") {
  const CliResult r = run_cli("bench --models gbm vg --N 64 --k 3");
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][col(t, "model")] == "gbm");
  CHECK(t.rows[1][col(t, "model")] == "vg");
  CHECK(t.rows[0][col(t, "reps")] == "3");
  CHECK(std::stod(t.rows[0][col(t, "median_seconds")]) > 0.0);
}

TEST_CASE("basket prices one leg against the bivariate pipeline") {
  const CliResult r = run_cli(
      "basket --s-tilde 100 --s0 96 --sigmas 0.2 0.1 --deltas 0.05 0.05 "
      "--strike 4.0 --N 256");
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  REQUIRE(t.rows.size() == 1);
  const GbmBasketParams p =
      GbmBasketParams::uniform(0.1, 1.0, {0.2, 0.1}, {0.05, 0.05}, 0.5);
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  const std::vector<double> s0 = {96.0};
  const double want =
      price_basket_at(p, 100.0, s0, 4.0, lat, EpsilonShiftM::defaults(1));
  CHECK(std::stod(t.rows[0][col(t, "price")]) == want);
  CHECK(std::abs(want - gbm_benchmark(GbmParams{}, 100.0, 96.0, 4.0)) <= 1e-5);
  CHECK(t.rows[0][col(t, "mc_price")].empty());
  // The derived short-leg displacement lands in the echoed config.
  const json cfg = json::parse(meta_value(t, "cfg"));
  CHECK(cfg.at("eps-tilde").get<double>() == -4.0);
}

TEST_CASE("basket validates leg counts") {
  const CliResult r = run_cli("basket --s0 96 96 --sigmas 0.2 0.1");
  CHECK(r.code == 2);
  CHECK(error_json(r).at("message").get<std::string>().find("sigmas") !=
        std::string::npos);
}

TEST_CASE("config file values apply and flags override them") {
  const std::string path = "/tmp/spreadfft_cli_cfg.json";
  {
    std::ofstream f(path);
    f << R"({"strikes": [2.0], "N": 128})";
  }
  const CliResult r = run_cli("price --config " + path + " --N 256");
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  const json cfg = json::parse(meta_value(t, "cfg"));
  CHECK(cfg.at("N").get<int>() == 256);
  REQUIRE(t.rows.size() == 1);
  CHECK(std::stod(t.rows[0][col(t, "K")]) == 2.0);
  const double want = gbm_benchmark(GbmParams{}, 100.0, 96.0, 2.0);
  CHECK(std::abs(std::stod(t.rows[0][col(t, "price")]) - want) <= 5e-6);
}

TEST_CASE("config files with unknown keys are rejected") {
  const std::string path = "/tmp/spreadfft_cli_bad.json";
  {
    std::ofstream f(path);
    f << R"({"ubarr": 80})";
  }
  const CliResult r = run_cli("price --config " + path + " --strikes 1.0");
  CHECK(r.code == 2);
  CHECK(error_json(r).at("message").get<std::string>().find("ubarr") !=
        std::string::npos);
}

TEST_CASE("json format carries the same numbers as csv") {
  const CliResult r = run_cli("price --strikes 4.0 --format json");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.at("version").get<std::string>() == kArtifactVersion);
  CHECK(doc.at("cfg").at("N").get<int>() == 256);
  REQUIRE(doc.at("rows").size() == 1);
  const double price = std::stod(doc.at("rows")[0][3].get<std::string>());
  const double want = gbm_benchmark(GbmParams{}, 100.0, 96.0, 4.0);
  CHECK(std::abs(price - want) <= 5e-6);
}

TEST_CASE("output lands in the requested file") {
  const std::string path = "/tmp/spreadfft_cli_out.csv";
  std::remove(path.c_str());
  const CliResult r = run_cli("price --strikes 4.0 --out " + path);
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  REQUIRE(f.good());
  const std::string text((std::istreambuf_iterator<char>(f)),
                         std::istreambuf_iterator<char>());
  const Table t = parse_csv(text);
  CHECK(t.rows.size() == 1);
}

TEST_CASE("help and version exit cleanly") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("price --help").code == 0);
  CHECK(run_cli("--version").code == 0);
  CHECK(run_cli("").code == 2);  // a subcommand is required
}

TEST_CASE("numerical failures inside a computation exit 3") {
  // A contour that passes admissibility but violates the variance-gamma
  // analyticity strip is only detected when the integrand is evaluated.
  const CliResult r =
      run_cli("price --model vg --strikes 1.0 --eps1 -22.0 --eps2 1.0");
  CHECK(r.code == 3);
  CHECK(error_json(r).at("error").get<std::string>() == "ContourError");
}
