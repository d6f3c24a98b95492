#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sphtap::cli {

inline const std::vector<std::string> kCommands = {"gse",    "tap-solve",    "fk",   "mc-volume",
                                                   "mc-fe",  "ground-state", "scan", "selftest"};

/// Everything a run needs. Unset optionals fall back to per-command defaults.
struct RunConfig {
  std::string command;
  std::string level = "quick";  // selftest only

  // [model]
  std::optional<Eigen::MatrixXd> q;
  std::optional<Eigen::MatrixXd> qt;
  std::optional<Eigen::VectorXd> beta;
  std::optional<Eigen::VectorXd> h;

  // [numeric]
  int bins = 256;
  double eps = 0.05;
  int size = 0;  // N
  long long samples = 100000;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::optional<int> restarts;
  int iters = 3000;
  std::string method = "tilted";        // mc-volume: direct | tilted
  std::string source = "deterministic";  // deterministic | goe
  double tilt = 0.0;
  std::vector<double> betas;  // fk / scan grid
  unsigned threads = 1;

  // [output]
  std::string out;  // empty: stdout
  std::string format = "csv";
};

/// Reads an INI-style file: [model], [numeric] and [output] sections with
/// `key = value` lines, values in JSON syntax (`Q = [[1, 0.3], [0.3, 1]]`);
/// bare words are taken as strings. '#' and ';' start comments. Values are
/// merged into `cfg`. InputError naming the offending field on bad input.
void parse_config(std::istream& in, RunConfig& cfg);
void load_config_file(const std::string& path, RunConfig& cfg);

/// Executes the command, writing the result table to `out` (the --out file
/// is handled by the caller). Returns 0 on success, 1 for invalid input and
/// 2 for numerical failure; messages go to `err`.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// run() plus --out handling.
int run_to_destination(const RunConfig& cfg, std::ostream& stdout_stream, std::ostream& err);

}  // namespace sphtap::cli
