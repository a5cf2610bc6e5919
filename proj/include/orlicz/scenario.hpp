#pragma once

#include "orlicz/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace orlicz {

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  std::string id;
  std::string task;
  double wall_seconds = 0.0;
  std::vector<Assertion> assertions;
  std::vector<std::string> artifacts;  ///< paths relative to the output directory
  std::string error;                   ///< set when the pipeline threw

  bool passed() const;
};

/// "%.17g", "inf", "-inf", "nan".
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);

/// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Runs one scenario and writes its CSVs under out_dir/<id>/. Pipeline errors
/// are caught and reported as a failed "completed" assertion.
RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Runs every scenario, at most `threads` at a time; reports keep config order.
std::vector<RunReport> run_config(const Config& config, const std::filesystem::path& out_dir, int threads = 1);

/// summary.txt with wall times and one verdict line per assertion.
void write_summary(const std::vector<RunReport>& reports, const std::filesystem::path& out_dir, const std::string& source);

}  // namespace orlicz
