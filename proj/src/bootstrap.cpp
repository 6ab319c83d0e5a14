#include "elfuse/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "elfuse/rng.hpp"

namespace elfuse {

void BootstrapConfig::validate() const {
  if (replicates < 2) throw std::domain_error("bootstrap needs at least 2 replicates");
  if (levels.empty()) throw std::domain_error("bootstrap needs at least one level");
  for (double level : levels) {
    if (!(level > 0.0 && level < 1.0)) throw std::domain_error("bootstrap levels must lie in (0, 1)");
  }
}

const Interval& IntervalSet::at_level(double level) const {
  for (const auto& iv : intervals) {
    if (std::abs(iv.level - level) < 1e-12) return iv;
  }
  throw std::out_of_range("no interval at the requested level");
}

namespace {

void resample(std::span<const double> from, RngState& rng, std::vector<double>& into) {
  into.resize(from.size());
  for (auto& v : into) v = from[rng.uniform_index(from.size())];
}

// 1-based nearest order statistic with index ceil(q B), clamped to [1, B].
double order_statistic(std::span<const double> sorted, double q) {
  const auto b = static_cast<double>(sorted.size());
  auto idx = static_cast<long>(std::ceil(q * b - 1e-9));
  idx = std::clamp(idx, 1L, static_cast<long>(sorted.size()));
  return sorted[static_cast<std::size_t>(idx - 1)];
}

}  // namespace

BootstrapDraws bootstrap_estimates(const FusionProblem& problem, const BootstrapConfig& config,
                                   bool with_rspele) {
  config.validate();
  const std::size_t b_total = config.replicates;
  const std::size_t max_attempts = 10 * b_total;

  BootstrapDraws out;
  out.mle.reserve(b_total);
  if (with_rspele) out.rspele.reserve(b_total);

  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t attempts = 0;
  for (std::size_t b = 0; b < b_total; ++b) {
    RngState x_rng = RngState::derive(
        config.seed, {static_cast<std::uint64_t>(StreamTag::BootstrapPrimary), b});
    resample(problem.x().values, x_rng, xs);
    const double mle = mle_baseline(xs);
    out.mle.push_back(mle);
    if (!with_rspele) continue;

    for (std::uint64_t attempt = 0;; ++attempt) {
      if (++attempts > max_attempts) {
        std::ostringstream msg;
        msg << "bootstrap gave up after " << attempts - 1 << " attempts for " << b_total
            << " replicates (" << out.redraws << " failed resamples)";
        throw EstimationError(msg.str());
      }
      RngState y_rng = RngState::derive(
          config.seed, {static_cast<std::uint64_t>(StreamTag::BootstrapSecondary), b, attempt});
      resample(problem.y().values, y_rng, ys);
      try {
        FusionProblem star(Sample{xs, Provenance::Primary}, Sample{ys, Provenance::Secondary},
                           problem.equation());
        const FusionEstimate est = estimate(star);
        if (est.diagnostics.degenerate) ++out.degenerate;
        out.rspele.push_back(est.theta_hat);
        break;
      } catch (const EstimationError&) {
        ++out.redraws;
      }
    }
  }
  return out;
}

IntervalSet percentile_intervals(std::span<const double> estimates, std::span<const double> levels) {
  if (estimates.size() < 2) throw std::domain_error("percentile intervals need at least 2 estimates");
  std::vector<double> sorted(estimates.begin(), estimates.end());
  std::sort(sorted.begin(), sorted.end());
  IntervalSet set;
  set.intervals.reserve(levels.size());
  for (double level : levels) {
    Interval iv;
    iv.level = level;
    iv.lower = order_statistic(sorted, (1.0 - level) / 2.0);
    iv.upper = order_statistic(sorted, (1.0 + level) / 2.0);
    iv.length = iv.upper - iv.lower;
    set.intervals.push_back(iv);
  }
  return set;
}

IntervalSet bootstrap_ci(const FusionProblem& problem, BootstrapEstimator estimator,
                         const BootstrapConfig& config) {
  const bool rspele = estimator == BootstrapEstimator::Rspele;
  const BootstrapDraws draws = bootstrap_estimates(problem, config, rspele);
  return percentile_intervals(rspele ? draws.rspele : draws.mle, config.levels);
}

PairedIntervals bootstrap_ci_paired(const FusionProblem& problem, const BootstrapConfig& config) {
  const BootstrapDraws draws = bootstrap_estimates(problem, config, true);
  PairedIntervals out;
  out.rspele = percentile_intervals(draws.rspele, config.levels);
  out.mle = percentile_intervals(draws.mle, config.levels);
  out.redraws = draws.redraws;
  out.degenerate = draws.degenerate;
  return out;
}

}  // namespace elfuse
