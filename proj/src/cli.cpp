#include "elfuse/cli.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "elfuse/asymptotics.hpp"
#include "elfuse/bootstrap.hpp"
#include "elfuse/fusion.hpp"
#include "elfuse/io.hpp"
#include "elfuse/parallel.hpp"
#include "elfuse/simulation.hpp"

namespace elfuse {

namespace {

using ojson = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SampleArgs {
  std::string x_path;
  std::string y_path;
  std::string equation = "median";
  std::optional<double> h_exponent;
};

struct Args {
  SampleArgs samples;
  std::string out_dir = "out";
  unsigned threads = 0;
  std::uint64_t seed = 42;
  std::size_t replicates = 200;
  std::vector<double> levels{0.80, 0.90, 0.95, 0.99};
  double theta0 = 0.0;
  std::size_t draws = 100000;
  std::string table;
  std::string config;
  std::optional<std::size_t> reps;
  std::string normal_param = "sd";
};

void add_sample_options(CLI::App* cmd, SampleArgs& a) {
  cmd->add_option("--x", a.x_path, "CSV with the primary (Gaussian) sample")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--y", a.y_path, "CSV with the second sample")->required()->check(CLI::ExistingFile);
  cmd->add_option("--equation", a.equation, "Estimating equation")
      ->check(CLI::IsMember({"median", "smoothed"}));
  cmd->add_option("--h-exponent", a.h_exponent, "Bandwidth exponent e, h = n2^e (smoothed only)");
}

FusionProblem load_problem(const SampleArgs& a) {
  if (a.equation == "smoothed" && !a.h_exponent) {
    throw UsageError("--equation smoothed requires --h-exponent");
  }
  if (a.equation == "median" && a.h_exponent) {
    throw UsageError("--h-exponent only applies to --equation smoothed");
  }
  std::vector<double> x = read_column_csv(a.x_path);
  std::vector<double> y = read_column_csv(a.y_path);
  if (x.size() < 2) throw InputError(a.x_path + ": need at least 2 values");
  const std::size_t n2 = y.size();
  EquationSpec eq = EquationSpec::median_indicator();
  if (a.h_exponent) {
    if (!std::isfinite(*a.h_exponent)) throw UsageError("--h-exponent must be finite");
    eq = EquationSpec::smoothed(bandwidth(n2, *a.h_exponent));
  }
  return FusionProblem(Sample{std::move(x), Provenance::Primary},
                       Sample{std::move(y), Provenance::Secondary}, eq);
}

void emit(const ojson& record, const std::filesystem::path& file, std::ostream& out) {
  const std::string text = dump_json(record) + "\n";
  write_text_file(file, text);
  out << text;
}

ojson interval_array(const IntervalSet& set) {
  ojson arr = ojson::array();
  for (const auto& iv : set.intervals) {
    ojson o;
    o["level"] = iv.level;
    o["lower"] = iv.lower;
    o["upper"] = iv.upper;
    o["length"] = iv.length;
    arr.push_back(o);
  }
  return arr;
}

int run_estimate(const Args& a, std::ostream& out) {
  const FusionProblem problem = load_problem(a.samples);
  const FusionEstimate est = estimate(problem);
  ojson r;
  r["theta_hat"] = est.theta_hat;
  r["lambda_hat"] = est.lambda_hat;
  r["objective"] = est.objective;
  r["mle"] = est.mle;
  r["method"] = std::string(method_name(est.method));
  emit(r, std::filesystem::path(a.out_dir) / "estimate.json", out);
  return kExitOk;
}

int run_bootstrap(const Args& a, std::ostream& out) {
  const FusionProblem problem = load_problem(a.samples);
  BootstrapConfig config;
  config.replicates = a.replicates;
  config.levels = a.levels;
  config.seed = a.seed;
  try {
    config.validate();
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  const PairedIntervals p = bootstrap_ci_paired(problem, config);
  ojson r;
  r["replicates"] = config.replicates;
  r["seed"] = config.seed;
  r["redraws"] = p.redraws;
  r["rspele"] = interval_array(p.rspele);
  r["mle"] = interval_array(p.mle);
  emit(r, std::filesystem::path(a.out_dir) / "bootstrap_ci.json", out);
  return kExitOk;
}

int run_lr_test(const Args& a, std::ostream& out) {
  const FusionProblem problem = load_problem(a.samples);
  if (!std::isfinite(a.theta0)) throw UsageError("--theta0 must be finite");
  if (a.draws == 0) throw UsageError("--draws must be positive");
  const double stat = lr_statistic(problem, a.theta0);
  const AsymptoticInputs inputs = empirical_inputs(problem, a.theta0);
  RngState rng = RngState::derive(a.seed, {static_cast<std::uint64_t>(StreamTag::NullDistribution)});
  const std::vector<double> null_draws = lr_null_sample(inputs, a.draws, rng);
  ojson r;
  r["statistic"] = stat;
  r["p_value"] = monte_carlo_p_value(stat, null_draws);
  r["draws"] = a.draws;
  emit(r, std::filesystem::path(a.out_dir) / "lr_test.json", out);
  return kExitOk;
}

ojson scenario_json(const ScenarioSpec& spec, const ScenarioResult& res) {
  ojson r;
  r["dist2"] = spec.dist2.label();
  r["n1"] = spec.n1;
  r["n2"] = spec.n2;
  r["replications_used"] = res.replications_used;
  r["degenerate_count"] = res.degenerate_count;
  if (spec.metric == Metric::MseRatio) {
    r["mse_rspele"] = res.mse_rspele;
    r["mse_mle"] = res.mse_mle;
    r["ratio"] = res.ratio;
  } else {
    auto levels = [](const std::vector<LevelMetrics>& lv) {
      ojson arr = ojson::array();
      for (const auto& m : lv) {
        ojson o;
        o["level"] = m.level;
        o["coverage"] = m.coverage;
        o["avg_length"] = m.avg_length;
        arr.push_back(o);
      }
      return arr;
    };
    if (spec.include_rspele) r["rspele"] = levels(res.rspele_levels);
    r["mle"] = levels(res.mle_levels);
    r["bootstrap_redraws"] = res.bootstrap_redraws;
  }
  r["mc_stderr"] = res.mc_stderr;
  return r;
}

int run_simulate(const Args& a, std::ostream& out) {
  if (a.table.empty() == a.config.empty()) throw UsageError("simulate needs exactly one of --table or --config");
  if (a.reps && *a.reps == 0) throw UsageError("--reps must be positive");
  const std::filesystem::path out_dir(a.out_dir);
  RunOptions run;
  run.threads = resolve_threads(a.threads);

  if (!a.config.empty()) {
    ScenarioSpec spec = read_scenario_config(a.config);
    if (a.reps) spec.replications = *a.reps;
    const ScenarioResult res = run_scenario(spec, run);
    emit(scenario_json(spec, res), out_dir / "scenario.json", out);
    return kExitOk;
  }

  TableId id;
  try {
    id = parse_table_id(a.table);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  TableOptions opts;
  opts.seed = a.seed;
  opts.replication_override = a.reps;
  opts.bootstrap_replicates = a.replicates;
  opts.normal_reading = a.normal_param == "variance" ? NormalReading::Variance : NormalReading::StandardDeviation;
  opts.run = run;
  const auto t0 = std::chrono::steady_clock::now();
  const TableArtifact table = reproduce_table(id, opts);
  write_table(table, out_dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ojson r;
  r["table"] = table_name(id);
  r["seed"] = a.seed;
  r["replications"] = a.reps.value_or(1000);
  r["threads"] = run.threads;
  r["cells"] = table.cells.size();
  r["csv"] = (out_dir / "tables" / (table_name(id) + ".csv")).string();
  r["seconds"] = secs;
  out << dump_json(r) << "\n";
  return kExitOk;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fused Gaussian / empirical likelihood location estimation"};
  app.name("elfuse");
  app.require_subcommand(1);

  Args a;
  unsigned threads_flag = 0;
  app.add_option("--threads", threads_flag, "Worker threads (default: $ELFUSE_THREADS or hardware)")
      ->check(CLI::PositiveNumber);

  auto* est = app.add_subcommand("estimate", "Fused estimate from two samples");
  add_sample_options(est, a.samples);
  est->add_option("--out", a.out_dir, "Output directory")->capture_default_str();

  auto* boot = app.add_subcommand("bootstrap-ci", "Percentile bootstrap intervals for RSPELE and MLE");
  add_sample_options(boot, a.samples);
  boot->add_option("--seed", a.seed)->capture_default_str();
  boot->add_option("--replicates", a.replicates, "Bootstrap resamples")->capture_default_str();
  boot->add_option("--levels", a.levels, "Confidence levels")->delimiter(',');
  boot->add_option("--out", a.out_dir, "Output directory")->capture_default_str();

  auto* lr = app.add_subcommand("lr-test", "Likelihood-ratio test of theta = theta0");
  add_sample_options(lr, a.samples);
  lr->add_option("--theta0", a.theta0)->capture_default_str();
  lr->add_option("--draws", a.draws, "Monte Carlo null draws")->capture_default_str();
  lr->add_option("--seed", a.seed)->capture_default_str();
  lr->add_option("--out", a.out_dir, "Output directory")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo tables or a single scenario");
  sim->add_option("--table", a.table, "T1..T6");
  sim->add_option("--config", a.config, "Key-value scenario file")->check(CLI::ExistingFile);
  sim->add_option("--seed", a.seed)->capture_default_str();
  sim->add_option("--reps", a.reps, "Outer replications (default 1000)");
  sim->add_option("--boot-reps", a.replicates, "Bootstrap resamples for coverage tables")
      ->capture_default_str();
  sim->add_option("--normal-param", a.normal_param, "Reading of the N(0,p) column labels")
      ->check(CLI::IsMember({"sd", "variance"}))
      ->capture_default_str();
  sim->add_option("--out", a.out_dir, "Output directory")->capture_default_str();
  sim->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "elfuse: " << e.what() << "\n";
    if (!app.get_subcommands().empty()) {
      err << app.get_subcommands().front()->help();
    } else {
      err << app.help();
    }
    return kExitUsage;
  }
  if (a.threads == 0) a.threads = threads_flag;

  try {
    if (est->parsed()) return run_estimate(a, out);
    if (boot->parsed()) return run_bootstrap(a, out);
    if (lr->parsed()) return run_lr_test(a, out);
    return run_simulate(a, out);
  } catch (const UsageError& e) {
    err << "elfuse: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "elfuse: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    ojson r;
    r["error"] = "computational_failure";
    r["message"] = e.what();
    out << dump_json(r) << "\n";
    return kExitFailure;
  }
}

}  // namespace elfuse
