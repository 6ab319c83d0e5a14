#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "elfuse/simulation.hpp"

namespace elfuse {

/// Malformed input files or values; the CLI maps this to a usage error.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a finite double with the C locale's decimal point.
double parse_double(std::string_view text);

/// One numeric column, optional single header line (first token not a
/// number). Blank lines are skipped; a trailing comma-separated field is an
/// error.
std::vector<double> parse_column_csv(std::string_view content);
std::vector<double> read_column_csv(const std::filesystem::path& path);

/// Formats a double with 17 significant digits; non-finite values become null.
std::string json_number(double v);

/// Serializes with fields in insertion order and every floating-point value
/// at 17 significant digits.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

/// Key-value scenario file:
///
///   # comment
///   family = t
///   scale_param = 3
///   n2 = 20
///   equation = smoothed
///   h_exponent = -0.5
///
/// Keys: family, location, scale_param, n1, n2, replications, equation,
/// h_exponent, metric (mse_ratio | coverage), bootstrap_replicates, levels
/// (comma separated), seed. Unknown keys are an error.
ScenarioSpec parse_scenario_config(std::string_view content);
ScenarioSpec read_scenario_config(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace elfuse
