#pragma once

#include "wanco/config.hpp"
#include "wanco/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wanco {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNonFinite = 2 };

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

/// Trains `run` and writes history.csv, params.bin (+ params.bin.json) and summary.txt into `dir`.
TrainResult run_and_write(const RunConfig& run, const std::filesystem::path& dir, bool quiet);

int cmd_train(const TrainOptions& options);

struct GridOptions {
  std::filesystem::path params;
  std::vector<int> grid;  // nodes per axis; a single entry applies to every axis
  std::filesystem::path out;
};

/// Node coordinates of a uniform tensor grid over `box` (endpoints included),
/// first axis slowest.
Matrix grid_points(const Box& box, const std::vector<int>& nodes);
/// "1000x1000" or "1000".
std::vector<int> parse_grid(const std::string& text);
/// x, y (d <= 2) or x1..xd.
std::vector<std::string> coordinate_names(int d);

int cmd_eval_grid(const GridOptions& options);

/// Config: {"base": <run config>, "variants": [{"name": ..., "overrides": {...}}, ...],
/// "output_dir": ...}. Writes <out>/<variant>/... and <out>/compare.csv.
int cmd_compare(const TrainOptions& options);

struct OracleOptions {
  std::string kind;  // psor | radius | quadrature
  std::string obstacle = "psi1";
  int n = 1001;
  double V = -0.5;
  std::string integrand = "sin";
  int nodes = 101;
  std::optional<std::filesystem::path> out;
};

int cmd_oracle(const OracleOptions& options);

}  // namespace wanco
