#pragma once

#include "wanco/config.hpp"
#include "wanco/diffcore.hpp"
#include "wanco/trainer.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace wanco {

/// First line of every CSV file written by this library.
inline constexpr const char* kCsvSchema = "# wanco-csv v1";

/// Shortest round-trip decimal form ("%.17g"), independent of locale.
std::string format_double(double v);

/// Columns: iteration, loss, objective, then per constraint <c>_achieved,
/// <c>_residual and <c>_rel_error (<c>_abs_error when the target is 0),
/// then one column per multiplier, beta_<channel>, lr_primal, lr_adversarial.
void write_history_csv(std::ostream& out, const RunHistory& history);
void write_history_csv(const std::filesystem::path& path, const RunHistory& history);

/// Little-endian f64 dump plus a JSON manifest (segments and the expanded
/// run configuration) next to it at <bin>.json.
void write_params(const std::filesystem::path& bin, const ParamStore& params, const Json& config);

struct StoredParams {
  std::vector<double> values;
  Json manifest;
};

/// Reads <bin> and <bin>.json; throws ConfigError on a malformed or
/// inconsistent pair.
StoredParams read_params(const std::filesystem::path& bin);

/// Copies stored values into a store with the problem's layout; throws
/// ConfigError if segment names, offsets or lengths differ.
ParamStore bind_params(const Problem& problem, const StoredParams& stored);

/// Header of coordinate names then value names; one row per point.
void write_grid_csv(std::ostream& out, const std::vector<std::string>& coords, const Matrix& x,
                    const std::vector<std::string>& names, const Matrix& values);

/// Final residuals and multipliers, one "key: value" line each.
void write_summary(const std::filesystem::path& path, const Problem& problem, const TrainResult& result);

}  // namespace wanco
