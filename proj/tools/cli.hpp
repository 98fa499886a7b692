#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace toepspec::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_numeric = 3;

/// Everything a run needs; serialized verbatim into the manifest.
struct ExperimentConfig {
  std::string subcommand;

  // symbols: a catalog case, symbol files, or DSL expressions
  std::optional<int> case_id;
  std::optional<double> r;
  std::string window = "symmetric";
  std::string f_path, g_path;
  std::string f_expr, g_expr;
  int k = 1;
  int s = 1;
  std::map<std::string, double> params;

  std::string n;  // "50,100" (k = 1 sweep), "5,5" or "5,5;10,10" (k = 2)
  double tol = 1e-6;
  std::uint64_t seed = 42;
  std::string prec = "off";  // off | on | both
  bool true_residual = false;

  int coef_grid = 0;   // 0: library default
  int range_grid = 0;  // 0: library default
  int angles = 720;
  int resolution = 128;
  double eps = 0.1;
  int max_moment = 4;
  std::string rect;    // "re_min,re_max,im_min,im_max"; empty: automatic
  std::string target = "auto";  // sector: f | g | auto
  std::string format = "auto";  // build: csv | bin | auto (by extension)
  std::string out;
  std::string manifest;
  unsigned threads = 0;  // 0: hardware concurrency
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Full command-line entry point. Writes a manifest on every run except --help.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace toepspec::cli
