#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "elfuse/distributions.hpp"
#include "elfuse/estimating_equations.hpp"

namespace elfuse {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A primary Gaussian sample x fused with a secondary sample y through the
/// median estimating equation. The plug-in variance s1_sq = mean((x - xbar)^2)
/// is computed once from x and held fixed while theta is optimized.
class FusionProblem {
 public:
  /// Throws std::domain_error unless n1 >= 2 and n2 >= 1 with finite values.
  /// A zero plug-in variance (all x equal) is accepted; the estimators then
  /// return xbar and flag the estimate as degenerate.
  FusionProblem(Sample x, Sample y, EquationSpec equation);

  const Sample& x() const { return x_; }
  const Sample& y() const { return y_; }
  const EquationSpec& equation() const { return equation_; }
  double s1_sq() const { return s1_sq_; }
  double xbar() const { return xbar_; }
  std::size_t n1() const { return x_.size(); }
  std::size_t n2() const { return y_.size(); }
  const std::vector<double>& sorted_y() const { return sorted_y_; }

  /// Search region for the smoothed optimizer:
  /// [min(x u y) - 3 sqrt(s1_sq), max(x u y) + 3 sqrt(s1_sq)].
  double search_lower() const;
  double search_upper() const;

  /// Gaussian log-likelihood of x at (theta, s1_sq).
  double gaussian_loglik(double theta) const;

 private:
  Sample x_;
  Sample y_;
  EquationSpec equation_;
  std::vector<double> sorted_y_;
  double xbar_ = 0.0;
  double s1_sq_ = 0.0;
  double data_min_ = 0.0;
  double data_max_ = 0.0;
};

enum class EstimationMethod { PiecewiseExact, SmoothedSearch, MleFallback };

std::string_view method_name(EstimationMethod m);

struct FusionDiagnostics {
  /// Indicator path: number of y values <= theta_hat on the winning interval.
  long interval_index = -1;
  /// Smoothed path.
  long grid_best_index = -1;
  long grid_feasible_points = 0;
  long refine_iterations = 0;
  long objective_evaluations = 0;
  bool degenerate = false;
};

struct FusionEstimate {
  double theta_hat = 0.0;
  double lambda_hat = 0.0;
  double objective = 0.0;
  double mle = 0.0;
  EstimationMethod method = EstimationMethod::PiecewiseExact;
  FusionDiagnostics diagnostics;
};

/// Fused log-likelihood at theta: gaussian_loglik(theta) minus the EL penalty
/// of the g-values at theta. -infinity when the inner problem is infeasible.
double objective(const FusionProblem& problem, double theta);

/// Global maximizer for the indicator equation. On each interval between
/// consecutive order statistics of y the EL penalty is constant, so the
/// objective is a concave quadratic maximized at xbar clamped to the interval.
FusionEstimate estimate_indicator(const FusionProblem& problem);

inline constexpr std::size_t kSmoothedGridPoints = 512;
inline constexpr double kGoldenTolerance = 1e-10;

/// Grid search followed by golden-section refinement for the smoothed equation.
FusionEstimate estimate_smoothed(const FusionProblem& problem);

/// Dispatches on problem.equation().variant.
FusionEstimate estimate(const FusionProblem& problem);

double mle_baseline(std::span<const double> x);

}  // namespace elfuse
