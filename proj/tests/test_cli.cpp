#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "levymc/cli.hpp"

using namespace levymc;

namespace {

int run(std::vector<const char*> args) {
  args.insert(args.begin(), "levymc");
  return cli_main(static_cast<int>(args.size()), args.data());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("solve: header, shape, byte-identical reruns") {
  const char* out1 = "/tmp/levymc_solve_1.csv";
  const char* out2 = "/tmp/levymc_solve_2.csv";
  std::vector<const char*> args = {"solve",      "--problem", "linear-symbol",
                                   "--n",        "3",         "--samples",
                                   "200",        "--spacing", "0.2",
                                   "--seed",     "7",         "--output",
                                   out1};
  REQUIRE(run(args) == 0);
  args.back() = out2;
  REQUIRE(run(args) == 0);

  std::string a = slurp(out1);
  std::string b = slurp(out2);
  CHECK(a == b);
  CHECK(a.substr(0, 10) == "t,x,value\n");

  // (n + 1) layers x 33 nodes + header
  long lines = std::count(a.begin(), a.end(), '\n');
  CHECK(lines == 4 * 33 + 1);
}

TEST_CASE("rate: header and row count") {
  const char* out = "/tmp/levymc_rate.csv";
  REQUIRE(run({"rate", "--problem", "merton-linear", "--ladder", "0.25,0.125",
               "--samples-base", "200", "--seed", "3", "--output", out}) == 0);
  std::string text = slurp(out);
  CHECK(text.substr(0, 26) == "h,kappa,theta_kappa,error\n");
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("mcq: error table") {
  const char* out = "/tmp/levymc_mcq.csv";
  REQUIRE(run({"mcq", "--problem", "merton-linear", "--kappas", "0", "--hs",
               "0.01,0.04", "--samples", "20000", "--seed", "5", "--output", out}) == 0);
  std::string text = slurp(out);
  CHECK(text.substr(0, 56) ==
        "kappa,h,n_samples,mcq_value,std_error,quadrature_value,a");
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("validate-measure emits small quadrature gaps") {
  const char* out = "/tmp/levymc_validate.csv";
  REQUIRE(run({"validate-measure", "--problem", "linear-symbol", "--kappas",
               "0.1,0.5", "--output", out}) == 0);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "kappa,functional,closed_form,quadrature,abs_error");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    auto pos = line.rfind(',');
    double gap = std::stod(line.substr(pos + 1));
    CHECK(gap < 1e-8);
  }
  CHECK(rows == 6);
}

TEST_CASE("config file is honored") {
  const char* cfg = "/tmp/levymc_cfg.json";
  write_file(cfg, R"({
    "problem": {"key": "merton-linear"},
    "scheme": {"n": 2, "samples": 100, "spacing": 0.4, "seed": 9}
  })");
  const char* out = "/tmp/levymc_cfg_solve.csv";
  REQUIRE(run({"solve", "--config", cfg, "--output", out}) == 0);
  std::string text = slurp(out);
  // 3 layers x 18 nodes + header
  CHECK(std::count(text.begin(), text.end(), '\n') == 3 * 18 + 1);
}

TEST_CASE("exit codes") {
  SUBCASE("unknown problem is a config error") {
    CHECK(run({"solve", "--problem", "bogus", "--output", "/tmp/levymc_x.csv"}) == 2);
  }

  SUBCASE("malformed JSON is a config error") {
    const char* cfg = "/tmp/levymc_bad.json";
    write_file(cfg, "{ not json ");
    CHECK(run({"solve", "--config", cfg, "--output", "/tmp/levymc_x.csv"}) == 2);
  }

  SUBCASE("unknown config section is a config error") {
    const char* cfg = "/tmp/levymc_bad2.json";
    write_file(cfg, R"({"mystery": {}})");
    CHECK(run({"solve", "--config", cfg, "--output", "/tmp/levymc_x.csv"}) == 2);
  }

  SUBCASE("missing required flag is a config error") {
    CHECK(run({"solve", "--problem", "linear-symbol"}) == 2);
  }

  SUBCASE("infeasible rate rule is a numerical abort") {
    const char* cfg = "/tmp/levymc_rate_infeasible.json";
    write_file(cfg, R"({
      "problem": {"key": "linear-symbol"},
      "measure": {"kind": "power_tail", "amplitude": 1.0, "alpha": 1.0},
      "scheme": {"n": 100, "samples": 10},
      "kappa_rule": {"rule": "rate"}
    })");
    CHECK(run({"solve", "--config", cfg, "--output", "/tmp/levymc_x.csv"}) == 3);
  }
}
