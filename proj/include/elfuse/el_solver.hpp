#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace elfuse {

/// Solution of the inner empirical-likelihood problem at a fixed theta.
///
/// When feasible, the weights are p_i = 1 / (n2 (1 + lambda g_i)) and
/// penalty = sum_i log(1 + lambda g_i) = -sum_i log(n2 p_i) >= 0.
/// When zero lies outside the convex hull of the g-values the problem is
/// infeasible: weights is empty and penalty is +infinity.
struct ELSolution {
  double lambda = 0.0;
  std::vector<double> weights;
  double penalty = 0.0;
  bool feasible = false;
  int iterations = 0;
};

struct SolveOptions {
  int max_newton_iterations = 100;
  /// Interval width at which the bisection fallback stops.
  double bracket_tolerance = 1e-14;
  /// Starting point for the Newton iteration (clamped into the bracket).
  double lambda_start = 0.0;
  bool compute_weights = true;
};

/// Solves sum_i g_i / (1 + lambda g_i) = 0 for lambda by safeguarded Newton
/// with a bisection fallback. Throws std::domain_error on empty input.
ELSolution solve_lambda(std::span<const double> gvals, const SolveOptions& options = {});

/// Exact solution when every g-value is +1/2 (k of them) or -1/2 (n2 - k).
ELSolution indicator_closed_form(std::size_t n2, std::size_t k);

/// Penalty-only shortcut of indicator_closed_form; +infinity when infeasible.
double indicator_penalty(std::size_t n2, std::size_t k);

}  // namespace elfuse
