#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;
using toepspec::cli::ExperimentConfig;
using toepspec::cli::run;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "toepspec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("toepspec_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config round-trips through JSON") {
  ExperimentConfig c;
  c.subcommand = "case";
  c.case_id = 1;
  c.r = 4.8;
  c.window = "from_zero";
  c.f_expr = "2 + 2*cos(x)";
  c.params = {{"a", 0.5}};
  c.n = "5,5;10,10";
  c.tol = 1e-8;
  c.seed = 123456789012345ULL;
  c.prec = "both";
  c.true_residual = true;
  c.rect = "-1,1,-2,2";
  c.out = "t1/";
  c.threads = 3;
  const auto j = toepspec::cli::to_json(c);
  CHECK(toepspec::cli::to_json(toepspec::cli::config_from_json(j)) == j);
  CHECK(j.at("seed").get<std::uint64_t>() == c.seed);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  const auto m = (dir / "m.json").string();
  CHECK(invoke({"--version"}).code == 0);
  CHECK(invoke({"eig", "--id", "1", "--r", "2", "--n", "8", "--out", (dir / "e.csv").string()}).code == 0);

  auto bad = invoke({"eig", "--bogus", "--manifest", m});
  CHECK(bad.code == 2);
  CHECK_FALSE(bad.err.empty());
  CHECK(invoke({"eig", "--id", "9", "--n", "8", "--manifest", m}).code == 2);
  CHECK(invoke({"eig", "--id", "1", "--f-expr", "1", "--n", "8", "--manifest", m}).code == 2);
  CHECK(invoke({"parse-check", "--expr", "cos(", "--manifest", m}).code == 2);
  CHECK(invoke({"solve", "--id", "5", "--n", "8", "--manifest", m}).code == 2);  // k mismatch

  // Order 20000 exceeds the dense cap: a numeric failure, manifest still written.
  const auto fail = dir / "fail.json";
  CHECK(invoke({"eig", "--id", "5", "--n", "100,100", "--manifest", fail.string()}).code == 3);
  REQUIRE(fs::exists(fail));
  const auto j = nlohmann::json::parse(slurp(fail));
  CHECK(j.at("status") == "numeric_failure");
  CHECK(j.at("exit_code") == 3);
  CHECK(j.at("error").is_string());
  CHECK(j.at("config").at("case") == 5);
}

TEST_CASE("eig writes one row per eigenvalue") {
  const auto dir = scratch("eig");
  const auto csv = dir / "eig5.csv";
  REQUIRE(invoke({"eig", "--id", "5", "--n", "6,6", "--out", csv.string()}).code == 0);
  const auto text = slurp(csv);
  CHECK(text.rfind("re,im\n", 0) == 0);
  CHECK(lines(text) == 1 + 2 * 36);
  const auto man = nlohmann::json::parse(slurp(dir / "eig5.csv.manifest.json"));
  CHECK(man.at("status") == "ok");
  CHECK(man.at("seed") == 42);
  CHECK(man.at("version").is_string());
}

TEST_CASE("outliers reproduces the Case 5 row at n = (5,5)") {
  const auto dir = scratch("outliers");
  auto r = invoke({"outliers", "--id", "5", "--n", "5,5", "--eps", "0.1", "--manifest", (dir / "m.json").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("32") != std::string::npos);
  CHECK(r.out.find("6.40") != std::string::npos);
}

TEST_CASE("case writes an iteration table and per-run files") {
  const auto dir = scratch("case");
  const auto out = (dir / "t1").string() + "/";
  REQUIRE(invoke({"case", "--id", "1", "--r", "4.8", "--n", "50,100", "--prec", "both", "--out", out}).code == 0);
  const auto table = slurp(fs::path(out) / "table.csv");
  CHECK(table.rfind("n,unprec_iters,prec_iters\n", 0) == 0);
  CHECK(lines(table) == 3);
  CHECK(fs::exists(fs::path(out) / "manifest.json"));
  std::size_t runs = 0;
  for (const auto& e : fs::directory_iterator(out)) runs += e.path().filename().string().rfind("run_", 0) == 0;
  CHECK(runs == 8);  // 2 sizes x 2 modes x (json, csv)
}

TEST_CASE("repeated runs are bit-identical") {
  const auto dir = scratch("determinism");
  for (const char* sub : {"solve", "eig"}) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      const auto o = dir / (std::string(sub) + std::to_string(rep));
      const bool is_dir = std::string(sub) == "solve";
      const auto target = is_dir ? o.string() + "/" : o.string() + ".csv";
      REQUIRE(invoke({sub, "--id", "4", "--n", "60", "--seed", "9", "--out", target}).code == 0);
      const auto text = slurp(is_dir ? o / "solve.csv" : fs::path(target));
      CHECK_FALSE(text.empty());
      if (rep == 0) first = text;
      else CHECK(text == first);
    }
  }
}

TEST_CASE("parse-check prints the canonical form") {
  const auto dir = scratch("parse");
  auto r = invoke({"parse-check", "--expr", "2 + 2*cos(x)", "--manifest", (dir / "m.json").string()});
  CHECK(r.code == 0);
  CHECK_FALSE(r.out.empty());
}
