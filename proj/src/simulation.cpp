#include "elfuse/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "elfuse/fusion.hpp"
#include "elfuse/parallel.hpp"

namespace elfuse {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ELFUSE_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EquationSpec EquationDescription::resolve(std::size_t n2) const {
  if (variant == EquationVariant::MedianIndicator) return EquationSpec::median_indicator();
  if (!h_exponent) throw std::invalid_argument("smoothed equation needs an h exponent");
  return EquationSpec::smoothed(bandwidth(n2, *h_exponent));
}

void ScenarioSpec::validate() const {
  dist2.validate();
  if (n1 < 2) throw std::domain_error("scenario needs n1 >= 2");
  if (n2 < 1) throw std::domain_error("scenario needs n2 >= 1");
  if (replications < 1) throw std::domain_error("scenario needs at least one replication");
  if (equation.variant == EquationVariant::SmoothedMedian && !equation.h_exponent) {
    throw std::invalid_argument("smoothed scenarios need an h exponent");
  }
  if (metric == Metric::Coverage) {
    if (!bootstrap) throw std::invalid_argument("coverage scenarios need a bootstrap config");
    bootstrap->validate();
  }
}

RngState replication_stream(std::uint64_t seed, std::size_t replication, StreamTag tag) {
  return RngState::derive(seed, {static_cast<std::uint64_t>(tag), replication});
}

namespace {

constexpr double kTheta0 = 0.0;

struct ReplicationOutcome {
  double sq_err_rspele = 0.0;
  double sq_err_mle = 0.0;
  std::vector<Interval> rspele;
  std::vector<Interval> mle;
  bool degenerate = false;
  std::size_t redraws = 0;
  std::size_t bootstrap_degenerate = 0;
};

ReplicationOutcome run_replication(const ScenarioSpec& spec, const EquationSpec& equation,
                                   std::size_t r) {
  RngState x_rng = replication_stream(spec.seed, r, StreamTag::PrimarySample);
  RngState y_rng = replication_stream(spec.seed, r, StreamTag::SecondarySample);
  Sample x = sample(DistributionSpec::normal(0.0, 1.0), spec.n1, x_rng, Provenance::Primary);
  Sample y = sample(spec.dist2, spec.n2, y_rng, Provenance::Secondary);
  const FusionProblem problem(std::move(x), std::move(y), equation);

  ReplicationOutcome out;
  if (spec.metric == Metric::MseRatio) {
    const FusionEstimate est = estimate(problem);
    out.sq_err_rspele = (est.theta_hat - kTheta0) * (est.theta_hat - kTheta0);
    out.sq_err_mle = (est.mle - kTheta0) * (est.mle - kTheta0);
    out.degenerate = est.diagnostics.degenerate;
    return out;
  }

  BootstrapConfig config = *spec.bootstrap;
  config.seed = replication_stream(spec.seed, r, StreamTag::Bootstrap).next_u64();
  const BootstrapDraws draws = bootstrap_estimates(problem, config, spec.include_rspele);
  out.mle = percentile_intervals(draws.mle, config.levels).intervals;
  if (spec.include_rspele) {
    out.rspele = percentile_intervals(draws.rspele, config.levels).intervals;
  }
  out.redraws = draws.redraws;
  out.bootstrap_degenerate = draws.degenerate;
  return out;
}

std::vector<LevelMetrics> aggregate_levels(const std::vector<ReplicationOutcome>& outcomes,
                                           const std::vector<double>& levels, bool rspele) {
  const auto reps = static_cast<double>(outcomes.size());
  std::vector<LevelMetrics> metrics;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    double covered = 0.0;
    double len_sum = 0.0;
    double len_sq = 0.0;
    for (const auto& o : outcomes) {
      const Interval& iv = rspele ? o.rspele[j] : o.mle[j];
      covered += (iv.lower <= kTheta0 && kTheta0 <= iv.upper) ? 1.0 : 0.0;
      len_sum += iv.length;
      len_sq += iv.length * iv.length;
    }
    LevelMetrics m;
    m.level = levels[j];
    m.coverage = covered / reps;
    m.avg_length = len_sum / reps;
    m.coverage_stderr = std::sqrt(m.coverage * (1.0 - m.coverage) / reps);
    const double var = reps > 1 ? std::max(0.0, (len_sq - reps * m.avg_length * m.avg_length) / (reps - 1)) : 0.0;
    m.length_stderr = std::sqrt(var / reps);
    metrics.push_back(m);
  }
  return metrics;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioSpec& spec, const RunOptions& options) {
  spec.validate();
  const EquationSpec equation = spec.equation.resolve(spec.n2);
  std::vector<ReplicationOutcome> outcomes(spec.replications);

  std::size_t failed = 0;
  try {
    parallel_for(
        spec.replications, resolve_threads(options.threads),
        [&](std::size_t r) { outcomes[r] = run_replication(spec, equation, r); }, &failed);
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "replication " << failed << " failed: " << e.what();
    throw EstimationError(msg.str());
  }

  ScenarioResult result;
  result.replications_used = outcomes.size();
  for (const auto& o : outcomes) {
    result.degenerate_count += (o.degenerate ? 1 : 0) + o.bootstrap_degenerate;
    result.bootstrap_redraws += o.redraws;
  }

  if (spec.metric == Metric::MseRatio) {
    const auto reps = static_cast<double>(outcomes.size());
    double a = 0.0;
    double b = 0.0;
    for (const auto& o : outcomes) {
      a += o.sq_err_rspele;
      b += o.sq_err_mle;
    }
    a /= reps;
    b /= reps;
    double vaa = 0.0;
    double vbb = 0.0;
    double vab = 0.0;
    for (const auto& o : outcomes) {
      vaa += (o.sq_err_rspele - a) * (o.sq_err_rspele - a);
      vbb += (o.sq_err_mle - b) * (o.sq_err_mle - b);
      vab += (o.sq_err_rspele - a) * (o.sq_err_mle - b);
    }
    const double denom = reps > 1 ? reps - 1 : 1;
    vaa /= denom;
    vbb /= denom;
    vab /= denom;
    result.mse_rspele = a;
    result.mse_mle = b;
    result.ratio = a / b;
    // Delta method for a / b.
    const double var_ratio =
        (vaa / (b * b) - 2.0 * a * vab / (b * b * b) + a * a * vbb / (b * b * b * b)) / reps;
    result.mc_stderr = std::sqrt(std::max(0.0, var_ratio));
    return result;
  }

  const auto& levels = spec.bootstrap->levels;
  result.mle_levels = aggregate_levels(outcomes, levels, false);
  if (spec.include_rspele) result.rspele_levels = aggregate_levels(outcomes, levels, true);
  for (const auto* set : {&result.mle_levels, &result.rspele_levels}) {
    for (const auto& m : *set) result.mc_stderr = std::max(result.mc_stderr, m.coverage_stderr);
  }
  return result;
}

TableId parse_table_id(std::string_view name) {
  if (name == "T1") return TableId::T1;
  if (name == "T2") return TableId::T2;
  if (name == "T3") return TableId::T3;
  if (name == "T4") return TableId::T4;
  if (name == "T5") return TableId::T5;
  if (name == "T6") return TableId::T6;
  throw std::invalid_argument("unknown table id: " + std::string(name));
}

std::string table_name(TableId id) {
  return "T" + std::to_string(static_cast<int>(id) + 1);
}

std::vector<TableColumn> table_columns(TableId id) {
  using F = Family;
  switch (id) {
    case TableId::T1:
    case TableId::T2:
      return {{"N(0,1)", 1.0, F::Normal},          {"N(0,1.25)", 1.25, F::Normal},
              {"N(0,1.5)", 1.5, F::Normal},        {"N(0,2)", 2.0, F::Normal},
              {"N(0,3)", 3.0, F::Normal},          {"t3", 3.0, F::StudentT},
              {"t5", 5.0, F::StudentT},            {"DE(0,0.5)", 0.5, F::DoubleExponential},
              {"DE(0,1)", 1.0, F::DoubleExponential}, {"DE(0,1.5)", 1.5, F::DoubleExponential}};
    case TableId::T3:
      return {{"Normal", 1.0, F::Normal},
              {"t3", 3.0, F::StudentT},
              {"t5", 5.0, F::StudentT},
              {"Double Exponential", 1.0, F::DoubleExponential}};
    case TableId::T4:
    case TableId::T5:
    case TableId::T6:
      // Printed as three blocks of three columns.
      return {{"N(0,1)", 1.0, F::Normal},    {"N(0,3)", 3.0, F::Normal},
              {"DE(0,0.5)", 0.5, F::DoubleExponential},
              {"N(0,1.5)", 1.5, F::Normal},  {"t3", 3.0, F::StudentT},
              {"DE(0,1)", 1.0, F::DoubleExponential},
              {"N(0,2)", 2.0, F::Normal},    {"t5", 5.0, F::StudentT},
              {"DE(0,2)", 2.0, F::DoubleExponential}};
  }
  return {};
}

std::vector<double> table_h_exponents(TableId id) {
  switch (id) {
    case TableId::T2: return {-1.0, -0.75, -0.5, -0.25};
    case TableId::T5: return {-1.0};
    case TableId::T6: return {-0.5};
    default: return {};
  }
}

DistributionSpec column_distribution(const TableColumn& column, NormalReading reading) {
  switch (column.family) {
    case Family::Normal:
      return reading == NormalReading::Variance
                 ? DistributionSpec::normal_from_variance(0.0, column.label_param)
                 : DistributionSpec::normal(0.0, column.label_param);
    case Family::StudentT:
      return DistributionSpec::student_t(column.label_param);
    case Family::DoubleExponential:
      return DistributionSpec::double_exponential(0.0, column.label_param);
  }
  return {};
}

namespace {

constexpr std::size_t kTableN1 = 10;
constexpr std::size_t kTableN2[] = {10, 20, 30};

std::string fmt(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string exponent_label(double e) {
  if (e == -1.0) return "-1";
  if (e == -0.75) return "-3/4";
  if (e == -0.5) return "-1/2";
  if (e == -0.25) return "-1/4";
  return fmt(e, 4);
}

bool is_coverage_table(TableId id) {
  return id == TableId::T3 || id == TableId::T4 || id == TableId::T5 || id == TableId::T6;
}

std::size_t block_width(TableId id) { return id == TableId::T3 ? 2 : 3; }

const TableCell& find_cell(const std::vector<TableCell>& cells, const std::string& column,
                           std::size_t n2, std::optional<double> h) {
  for (const auto& c : cells) {
    if (c.column == column && c.n2 == n2 && c.h_exponent == h) return c;
  }
  throw std::logic_error("missing table cell " + column);
}

void render_ratio_table(TableArtifact& t, const std::vector<TableColumn>& columns,
                        const std::vector<std::optional<double>>& blocks) {
  std::ostringstream csv;
  std::ostringstream se;
  std::ostringstream md;
  const bool smoothed = blocks.front().has_value();
  csv << (smoothed ? "h_exponent,n2" : "n2");
  se << (smoothed ? "h_exponent,n2" : "n2");
  for (const auto& c : columns) {
    csv << ',' << c.label;
    se << ',' << c.label;
  }
  csv << '\n';
  se << '\n';

  md << "| n2 |";
  for (const auto& c : columns) md << ' ' << c.label << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) md << "---:|";
  md << '\n';

  for (const auto& h : blocks) {
    if (h) {
      md << "| *h = n2^" << exponent_label(*h) << "* |";
      for (std::size_t i = 0; i < columns.size(); ++i) md << " |";
      md << '\n';
    }
    for (std::size_t n2 : kTableN2) {
      if (h) {
        csv << fmt(*h, 4) << ',';
        se << fmt(*h, 4) << ',';
      }
      csv << n2;
      se << n2;
      md << "| " << n2 << " |";
      for (const auto& c : columns) {
        const auto& cell = find_cell(t.cells, c.label, n2, h);
        csv << ',' << fmt(cell.result.ratio, 6);
        se << ',' << fmt(cell.result.mc_stderr, 6);
        md << ' ' << fmt(cell.result.ratio) << " |";
      }
      csv << '\n';
      se << '\n';
      md << '\n';
    }
  }
  t.csv = csv.str();
  t.stderr_csv = se.str();
  t.markdown = md.str();
}

void render_coverage_table(TableArtifact& t, const std::vector<TableColumn>& columns,
                           std::optional<double> h, const std::vector<double>& levels) {
  const bool mle = t.id == TableId::T3;
  std::ostringstream csv;
  std::ostringstream se;
  std::ostringstream md;
  csv << "distribution,n2";
  se << "distribution,n2";
  for (double a : levels) {
    csv << ",coverage_" << fmt(a);
    se << ",coverage_" << fmt(a);
  }
  for (double a : levels) {
    csv << ",avg_length_" << fmt(a);
    se << ",avg_length_" << fmt(a);
  }
  csv << '\n';
  se << '\n';

  for (const auto& c : columns) {
    for (std::size_t n2 : kTableN2) {
      const auto& cell = find_cell(t.cells, c.label, n2, h);
      const auto& lv = mle ? cell.result.mle_levels : cell.result.rspele_levels;
      csv << '"' << c.label << "\"," << n2;
      se << '"' << c.label << "\"," << n2;
      for (const auto& m : lv) {
        csv << ',' << fmt(m.coverage, 6);
        se << ',' << fmt(m.coverage_stderr, 6);
      }
      for (const auto& m : lv) {
        csv << ',' << fmt(m.avg_length, 6);
        se << ',' << fmt(m.length_stderr, 6);
      }
      csv << '\n';
      se << '\n';
    }
  }

  const std::size_t width = block_width(t.id);
  for (std::size_t start = 0; start < columns.size(); start += width) {
    const std::size_t stop = std::min(columns.size(), start + width);
    md << "| alpha |";
    for (std::size_t i = start; i < stop; ++i) {
      for (double a : levels) md << ' ' << fmt(a) << " |";
    }
    md << "\n|---|";
    for (std::size_t i = start; i < stop; ++i) {
      for (std::size_t j = 0; j < levels.size(); ++j) md << "---:|";
    }
    md << "\n| n2 |";
    for (std::size_t i = start; i < stop; ++i) {
      md << " **" << columns[i].label << "** |";
      for (std::size_t j = 1; j < levels.size(); ++j) md << " |";
    }
    md << '\n';
    for (std::size_t n2 : kTableN2) {
      std::ostringstream cov_row;
      std::ostringstream len_row;
      cov_row << "| " << n2 << " |";
      len_row << "| |";
      for (std::size_t i = start; i < stop; ++i) {
        const auto& cell = find_cell(t.cells, columns[i].label, n2, h);
        const auto& lv = mle ? cell.result.mle_levels : cell.result.rspele_levels;
        for (const auto& m : lv) {
          cov_row << ' ' << fmt(m.coverage) << " |";
          len_row << " (" << fmt(m.avg_length) << ") |";
        }
      }
      md << cov_row.str() << '\n' << len_row.str() << '\n';
    }
    md << '\n';
  }
  t.csv = csv.str();
  t.stderr_csv = se.str();
  t.markdown = md.str();
}

}  // namespace

TableArtifact reproduce_table(TableId id, const TableOptions& options) {
  TableArtifact table;
  table.id = id;
  const auto columns = table_columns(id);
  const std::size_t reps = options.replication_override.value_or(1000);

  std::vector<std::optional<double>> blocks;
  if (id == TableId::T1 || id == TableId::T3 || id == TableId::T4) {
    blocks.push_back(std::nullopt);
  } else {
    for (double e : table_h_exponents(id)) blocks.push_back(e);
  }

  BootstrapConfig boot;
  boot.replicates = options.bootstrap_replicates;

  for (const auto& h : blocks) {
    for (const auto& column : columns) {
      for (std::size_t n2 : kTableN2) {
        ScenarioSpec spec;
        spec.dist2 = column_distribution(column, options.normal_reading);
        spec.n1 = kTableN1;
        spec.n2 = n2;
        spec.replications = reps;
        spec.seed = options.seed;
        if (h) {
          spec.equation = {EquationVariant::SmoothedMedian, *h};
        } else {
          spec.equation = {EquationVariant::MedianIndicator, std::nullopt};
        }
        if (is_coverage_table(id)) {
          spec.metric = Metric::Coverage;
          spec.bootstrap = boot;
          spec.include_rspele = id != TableId::T3;
        }
        TableCell cell;
        cell.column = column.label;
        cell.dist2 = spec.dist2;
        cell.n2 = n2;
        cell.h_exponent = h;
        cell.result = run_scenario(spec, options.run);
        table.cells.push_back(std::move(cell));
      }
    }
  }

  if (is_coverage_table(id)) {
    render_coverage_table(table, columns, blocks.front(), boot.levels);
  } else {
    render_ratio_table(table, columns, blocks);
  }
  return table;
}

void write_table(const TableArtifact& table, const std::filesystem::path& out_dir) {
  const auto dir = out_dir / "tables";
  std::filesystem::create_directories(dir);
  const std::string stem = table_name(table.id);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << content;
  };
  write(stem + ".csv", table.csv);
  write(stem + ".md", table.markdown);
  write(stem + "_stderr.csv", table.stderr_csv);
}

}  // namespace elfuse
