#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "sphtap/cli.hpp"
#include "sphtap/errors.hpp"

int main(int argc, char** argv) {
  using sphtap::cli::RunConfig;

  CLI::App app{"Finite-N and limiting computations for the constrained spherical SK model"};
  std::string command;
  std::string level;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long long> samples;
  std::optional<double> eps;
  std::optional<int> bins;
  std::optional<double> tol;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<unsigned> threads;

  app.add_option("command", command, "gse | tap-solve | fk | mc-volume | mc-fe | ground-state | scan | selftest")
      ->required();
  app.add_option("level", level, "selftest scale: quick (default) or full");
  app.add_option("--config", config_path, "INI file with [model], [numeric] and [output] sections");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--samples", samples, "Monte Carlo sample count");
  app.add_option("--eps", eps, "overlap window half-width");
  app.add_option("--bins", bins, "K, number of spectrum bins");
  app.add_option("--tol", tol, "optimizer tolerance");
  app.add_option("--out", out, "output path (default stdout)");
  app.add_option("--format", format, "csv or json");
  app.add_option("--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) sphtap::cli::load_config_file(config_path, cfg);
  } catch (const sphtap::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  cfg.command = command;
  if (!level.empty()) cfg.level = level;
  if (seed) cfg.seed = *seed;
  if (samples) cfg.samples = *samples;
  if (eps) cfg.eps = *eps;
  if (bins) cfg.bins = *bins;
  if (tol) cfg.tol = *tol;
  if (out) cfg.out = *out;
  if (format) cfg.format = *format;
  if (threads) cfg.threads = *threads;
  return sphtap::cli::run_to_destination(cfg, std::cout, std::cerr);
}
