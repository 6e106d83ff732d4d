#pragma once

#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace slspec::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kValidation = 2, kNumerical = 3 };

/// Either explicit points or lo, hi, count with linear or geometric spacing.
struct GridSpec {
  std::vector<double> points;
  double lo = 0;
  double hi = 0;
  int count = 1;
  std::string spacing = "linear";

  /// Set once any grid field was given.
  bool specified = false;

  std::vector<double> values() const;
};

struct PolicyConfig {
  double tol = 1e-10;
  /// Truncation limit on an infinite interval.
  double xmax = 131072;
  double delta = 1e-3;
  double delta_sub = 1e-3;
  double m_rel_tol = 1e-3;
  /// Right end of the growth window for c3 and boundedness.
  double growth_x = 64;
  /// Imaginary part of z for mfun.
  double im = 1e-2;
  /// Boundary angle for mfun.
  double alpha = 0;
  /// Fixed truncation for mfun; adaptive when absent.
  std::optional<double> X;
  int lmax = 5;
  int kmax = 10;
  /// Radial potential on a tree, as an expression in x.
  std::string potential;
};

struct RunConfig {
  std::string command;
  /// Inline CoefficientSet JSON, or null when operator_path is used.
  nlohmann::json operator_json;
  std::string operator_path;
  nlohmann::json tree_json;
  std::string tree_path;
  std::optional<long long> b;
  std::optional<double> c;
  GridSpec grid;
  PolicyConfig policy;
  std::string output;
  std::string format = "csv";
  /// 0 means one per hardware thread.
  int threads = 0;
};

struct Diagnostic {
  /// JSON-pointer path of the offending field.
  std::string path;
  std::string message;
};

/// Parses the JSON config file layout:
///   {"command", "operator" (object or path), "tree" (object or path),
///    "b", "c", "grid": {lo, hi, count, spacing} or {"points": [...]},
///    "policy": {...}, "output": {"path", "format"}, "threads"}
RunConfig config_from_json(const nlohmann::json& j);

std::vector<Diagnostic> validate(const RunConfig& config);

/// Executes a validated config. Reports go to config.output, or to `out`
/// when no path is set; diagnostics go to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace slspec::cli
