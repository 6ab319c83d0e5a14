#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "elfuse/bootstrap.hpp"
#include "elfuse/distributions.hpp"
#include "elfuse/estimating_equations.hpp"

namespace elfuse {

enum class Metric { MseRatio, Coverage };

/// Equation as written in scenario files: the bandwidth is resolved from n2.
struct EquationDescription {
  EquationVariant variant = EquationVariant::MedianIndicator;
  std::optional<double> h_exponent;

  EquationSpec resolve(std::size_t n2) const;
};

/// One simulation cell. The primary sample is always N(0, 1) and theta0 = 0.
struct ScenarioSpec {
  DistributionSpec dist2;
  std::size_t n1 = 10;
  std::size_t n2 = 10;
  std::size_t replications = 1000;
  EquationDescription equation;
  Metric metric = Metric::MseRatio;
  std::optional<BootstrapConfig> bootstrap;
  /// Coverage scenarios: false skips the RSPELE bootstrap (MLE-only tables).
  bool include_rspele = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LevelMetrics {
  double level = 0.0;
  double coverage = 0.0;
  double avg_length = 0.0;
  double coverage_stderr = 0.0;
  double length_stderr = 0.0;
};

struct ScenarioResult {
  // MseRatio
  double mse_rspele = 0.0;
  double mse_mle = 0.0;
  double ratio = 0.0;
  // Coverage, one entry per bootstrap level
  std::vector<LevelMetrics> rspele_levels;
  std::vector<LevelMetrics> mle_levels;

  /// Delta-method standard error of the ratio (MseRatio); for Coverage the
  /// largest coverage standard error across levels and estimators.
  double mc_stderr = 0.0;
  std::size_t replications_used = 0;
  std::size_t degenerate_count = 0;
  std::size_t bootstrap_redraws = 0;
};

struct RunOptions {
  /// 0 = resolve from $ELFUSE_THREADS or the hardware.
  unsigned threads = 0;
};

/// Per-replication streams: x and y draws and the bootstrap seed are derived
/// from (seed, replication, stream tag). The x stream ignores dist2 and n2.
RngState replication_stream(std::uint64_t seed, std::size_t replication, StreamTag tag);

ScenarioResult run_scenario(const ScenarioSpec& spec, const RunOptions& options = {});

enum class TableId { T1, T2, T3, T4, T5, T6 };

TableId parse_table_id(std::string_view name);
std::string table_name(TableId id);

/// How the second argument of "N(0, p)" column labels is read.
enum class NormalReading { StandardDeviation, Variance };

struct TableOptions {
  std::uint64_t seed = 42;
  std::optional<std::size_t> replication_override;
  std::size_t bootstrap_replicates = 200;
  NormalReading normal_reading = NormalReading::StandardDeviation;
  RunOptions run;
};

/// One cell of a reproduced table.
struct TableCell {
  std::string column;        // distribution label as printed in the table
  DistributionSpec dist2;
  std::size_t n2 = 0;
  std::optional<double> h_exponent;
  ScenarioResult result;
};

struct TableArtifact {
  TableId id = TableId::T1;
  std::vector<TableCell> cells;
  std::string csv;
  std::string markdown;
  std::string stderr_csv;
};

/// Column layout of a table: labelled distributions, grouped into the
/// printed blocks for the coverage tables.
struct TableColumn {
  std::string label;
  double label_param = 0.0;
  Family family = Family::Normal;
};

std::vector<TableColumn> table_columns(TableId id);
std::vector<double> table_h_exponents(TableId id);
DistributionSpec column_distribution(const TableColumn& column, NormalReading reading);

TableArtifact reproduce_table(TableId id, const TableOptions& options);

/// Writes tables/T<k>.csv, tables/T<k>.md and tables/T<k>_stderr.csv under out_dir.
void write_table(const TableArtifact& table, const std::filesystem::path& out_dir);

}  // namespace elfuse
