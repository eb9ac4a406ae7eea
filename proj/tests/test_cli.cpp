#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nmzkit/cli.hpp"
#include "nmzkit/errors.hpp"

using namespace nmzkit;
using namespace nmzkit::cli;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / "nmzkit_cli_tests";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int invoke(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "nmzkit");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream o, e;
  const int rc = main_entry(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return rc;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream f(p);
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

double parse(const std::string& s) {
  double v = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto kv = parse_config_text("# comment\nversion = 1\n\nsu2.lambda = 2.5   # trailing\nrun.demo=su2-state\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("su2.lambda") == "2.5");
  CHECK(kv.at("run.demo") == "su2-state");
  CHECK_THROWS_AS(parse_config_text("a.b = 1\na.b = 2\n"), ConfigParse);
  CHECK_THROWS_AS(parse_config_text("no equals sign\n"), ConfigParse);
  CHECK_THROWS_AS(parse_config_text("nodots = 1\n"), ConfigParse);
  CHECK_THROWS_AS(parse_config_text("a.b =\n"), ConfigParse);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(build_config({}, true), ConfigParse);
  CHECK_NOTHROW(build_config({{"version", "1"}}, true));
  CHECK_THROWS_AS(build_config({{"version", "2"}}, true), ConfigParse);
  CHECK_THROWS_AS(build_config({{"bogus.key", "1"}}, false), ConfigParse);
  CHECK_THROWS_AS(build_config({{"grid.dt", "nan"}}, false), ConfigParse);
  CHECK_THROWS_AS(build_config({{"grid.dt", "2"}, {"grid.tmax", "1"}}, false), ConfigParse);
  CHECK_THROWS_AS(build_config({{"grid.dt", "0.3"}, {"grid.tmax", "1"}}, false), ConfigParse);
  CHECK_THROWS_AS(build_config({{"run.demo", "nope"}}, false), ConfigParse);
  CHECK_THROWS_AS(build_config({{"output.format", "xml"}}, false), ConfigParse);
  const auto c = build_config({{"su2.lambda", "2"}, {"run.mode", "verify"}}, false);
  CHECK(c.mode == Mode::Verify);
  CHECK(c.params.lambda == 2.0);
  CHECK(c.params.seed == 42);
  CHECK(c.mc_samples == 100000);
  CHECK_FALSE(c.params.dt.has_value());
  for (const auto& k : config_keys()) CHECK_FALSE(k.description.empty());
}

TEST_CASE("matrix literals") {
  const MatrixC m = parse_matrix("0.6, 0.2-0.1i; 0.2+0.1i, 0.4");
  CHECK(m.rows() == 2);
  CHECK(m(0, 1) == cplx(0.2, -0.1));
  CHECK(m(1, 0) == cplx(0.2, 0.1));
  CHECK(parse_matrix("i -2i 1e-3-4e-2i")(0, 1) == cplx(0, -2));
  CHECK(parse_matrix("i -2i 1e-3-4e-2i")(0, 2) == cplx(1e-3, -4e-2));
  CHECK_THROWS_AS(parse_matrix("1 2; 3"), ConfigParse);
  CHECK_THROWS_AS(parse_matrix("1 x"), ConfigParse);
}

TEST_CASE("CSV emission round-trips exactly") {
  demos::Table t;
  t.header = {"t", "a"};
  t.rows = {{0.0, 0.1}, {1.0 / 3.0, -2.0e-300}, {std::numbers::pi, 6.02214076e23}};
  const fs::path p = temp_dir() / "roundtrip.csv";
  emit_csv(t, p.string());
  const auto rows = read_csv(p);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"t", "a"});
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(parse(rows[i + 1][j]) == t.rows[i][j]);
  CHECK(slurp(p).find('\r') == std::string::npos);
  CHECK_THROWS_AS(emit_csv(t, (temp_dir() / "missing_dir" / "x.csv").string()), IoFailure);
}

TEST_CASE("three-step SU(2) solution emits four lines") {
  const auto m = demos::su2_model(1.0);
  const auto s = nmz::solve_observable_nmz(m.L, m.P, VectorC::Unit(2, 0), nmz::TimeGrid{0.0, 1e-3, 2});
  const fs::path p = temp_dir() / "three.csv";
  emit_csv(s, p.string());
  const auto rows = read_csv(p);
  CHECK(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"t", "g", "Lg"});
}

TEST_CASE("su2-observable demo writes an error column within tolerance") {
  const fs::path p = temp_dir() / "su2.csv";
  std::string out;
  CHECK(invoke({"--demo", "su2-observable", "--out", p.string()}, &out) == 0);
  const auto rows = read_csv(p);
  REQUIRE(rows.size() == 10002);
  std::vector<std::size_t> errCols;
  for (std::size_t j = 0; j < rows[0].size(); ++j)
    if (rows[0][j].rfind("abs_err_", 0) == 0) errCols.push_back(j);
  REQUIRE(errCols.size() == 2);
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    for (auto j : errCols) worst = std::max(worst, parse(rows[i][j]));
  CHECK(worst <= 1e-6);
  const auto j = nlohmann::json::parse(out);
  CHECK(j["passed"] == true);
  CHECK(j["references"].size() >= 1);
}

TEST_CASE("torus demo reports qNorm in JSON") {
  const fs::path p = temp_dir() / "torus.json";
  std::string out;
  CHECK(invoke({"demo", "torus-qnorm", "--set", "torus.n=100", "--format", "json", "--out", p.string()}, &out) == 0);
  const auto j = nlohmann::json::parse(slurp(p));
  CHECK(j["metrics"]["qNorm"].get<double>() >= 1.9);
  CHECK(j["table"]["header"].size() == 4);
}

TEST_CASE("exit codes") {
  const fs::path empty = temp_dir() / "empty.cfg";
  std::ofstream(empty).close();
  std::string err;
  CHECK(invoke({"--config", empty.string()}, nullptr, &err) == 2);
  CHECK(err.find("version") != std::string::npos);
  CHECK(invoke({"--config", (temp_dir() / "absent.cfg").string()}) == 2);
  CHECK(invoke({"--set", "su2.lambda=abc"}) == 2);
  CHECK(invoke({"--demo", "su2-observable", "--set", "tolerance.error=1e-9"}) == 1);
  CHECK(invoke({"--demo", "su2-observable", "--out", (temp_dir() / "nodir" / "x.csv").string()}) == 2);
  CHECK(invoke({"--format", "yaml"}) == 2);

  const fs::path cfg = temp_dir() / "ok.cfg";
  std::ofstream(cfg) << "version = 1\nrun.mode = demo\nrun.demo = so3-observable\ngrid.tmax = 2\n";
  std::string out;
  CHECK(invoke({"--config", cfg.string()}, &out) == 0);
  CHECK(nlohmann::json::parse(out)["parameters"]["tMax"].get<double>() == doctest::Approx(2.0));
}

TEST_CASE("reduce mode uses the configured system") {
  std::string out;
  CHECK(invoke({"reduce", "--set", "grid.tmax=1", "--set", "system.sigma0=0.5 0; 0 0.5"}, &out) == 0);
  CHECK(nlohmann::json::parse(out)["checks"][0]["passed"] == true);
  CHECK(invoke({"reduce", "--set", "system.dA=3"}) == 2);
  CHECK(invoke({"reduce", "--set", "system.rhoB=1 0; 0 1"}) == 2);
}

TEST_CASE("identical inputs give byte-identical outputs") {
  const fs::path a = temp_dir() / "det_a.csv", b = temp_dir() / "det_b.csv";
  std::string oa, ob;
  CHECK(invoke({"--demo", "quantum-bipartite", "--seed", "7", "--out", a.string()}, &oa) == 0);
  CHECK(invoke({"--demo", "quantum-bipartite", "--seed", "7", "--out", b.string()}, &ob) == 0);
  CHECK(oa == ob);
  CHECK(slurp(a) == slurp(b));
  CHECK(!slurp(a).empty());
}
