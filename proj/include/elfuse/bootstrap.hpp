#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "elfuse/fusion.hpp"

namespace elfuse {

struct BootstrapConfig {
  std::size_t replicates = 200;
  std::vector<double> levels{0.80, 0.90, 0.95, 0.99};
  std::uint64_t seed = 0;

  void validate() const;
};

struct Interval {
  double level = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double length = 0.0;
};

/// Intervals in the order of BootstrapConfig::levels.
struct IntervalSet {
  std::vector<Interval> intervals;

  const Interval& at_level(double level) const;
};

enum class BootstrapEstimator { Rspele, Mle };

/// Resampled estimates for both estimators from the same resamples.
struct BootstrapDraws {
  std::vector<double> rspele;
  std::vector<double> mle;
  std::size_t redraws = 0;
  std::size_t degenerate = 0;
};

/// Draws config.replicates resamples (x and y resampled independently with
/// replacement at their original sizes). Resample b takes its x indices from
/// a stream derived from (seed, b) and its y indices from (seed, b, attempt),
/// so MLE draws depend on x alone. A resample whose RSPELE fails is redrawn
/// on the y side; more than 10 B attempts raises EstimationError.
BootstrapDraws bootstrap_estimates(const FusionProblem& problem, const BootstrapConfig& config,
                                   bool with_rspele = true);

/// Percentile intervals: [v_(ceil(q_lo B)), v_(ceil(q_hi B))] with
/// q = (1 -+ level) / 2 on the sorted estimates (1-based order statistics).
IntervalSet percentile_intervals(std::span<const double> estimates, std::span<const double> levels);

IntervalSet bootstrap_ci(const FusionProblem& problem, BootstrapEstimator estimator,
                         const BootstrapConfig& config);

struct PairedIntervals {
  IntervalSet rspele;
  IntervalSet mle;
  std::size_t redraws = 0;
  std::size_t degenerate = 0;
};

PairedIntervals bootstrap_ci_paired(const FusionProblem& problem, const BootstrapConfig& config);

}  // namespace elfuse
