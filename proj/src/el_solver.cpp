#include "elfuse/el_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace elfuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ELSolution infeasible(int iterations = 0) {
  ELSolution s;
  s.feasible = false;
  s.penalty = kInf;
  s.iterations = iterations;
  return s;
}

struct Residual {
  double value = 0.0;       // sum g / (1 + lambda g)
  double derivative = 0.0;  // -sum g^2 / (1 + lambda g)^2
};

Residual residual(std::span<const double> g, double lambda) {
  Residual r;
  for (double gi : g) {
    const double q = gi / (1.0 + lambda * gi);
    r.value += q;
    r.derivative -= q * q;
  }
  return r;
}

}  // namespace

ELSolution solve_lambda(std::span<const double> gvals, const SolveOptions& options) {
  if (gvals.empty()) throw std::domain_error("solve_lambda needs at least one g-value");
  const auto n = static_cast<double>(gvals.size());

  double gmin = kInf;
  double gmax = -kInf;
  for (double g : gvals) {
    if (!std::isfinite(g)) throw std::domain_error("solve_lambda needs finite g-values");
    gmin = std::min(gmin, g);
    gmax = std::max(gmax, g);
  }

  ELSolution sol;
  if (gmin == 0.0 && gmax == 0.0) {
    sol.feasible = true;
    if (options.compute_weights) sol.weights.assign(gvals.size(), 1.0 / n);
    return sol;
  }
  if (!(gmin < 0.0 && gmax > 0.0)) return infeasible();

  // Every weight is at most 1, so the root satisfies 1 + lambda g_i >= 1/n.
  double lo = (1.0 / n - 1.0) / gmax;
  double hi = (1.0 / n - 1.0) / gmin;
  const double tol = 1e-12 * n;

  double lambda = std::clamp(options.lambda_start, lo, hi);
  if (lambda == lo || lambda == hi) lambda = 0.5 * (lo + hi);

  int it = 0;
  bool converged = false;
  const int max_total = options.max_newton_iterations + 200;
  while (it < max_total) {
    ++it;
    const Residual r = residual(gvals, lambda);
    if (r.value > 0.0) {
      lo = lambda;
    } else {
      hi = lambda;
    }
    if (std::abs(r.value) < tol) {
      // One polishing step: quadratic convergence leaves the residual at
      // rounding level, which keeps the weight sum within 1e-12 of one.
      const double polished = lambda - r.value / r.derivative;
      if (polished > lo && polished < hi) lambda = polished;
      converged = true;
      break;
    }
    if (hi - lo < options.bracket_tolerance) {
      converged = true;
      break;
    }
    double next = 0.5 * (lo + hi);
    if (it <= options.max_newton_iterations && r.derivative < 0.0) {
      const double step = lambda - r.value / r.derivative;
      if (step > lo && step < hi) next = step;
    }
    lambda = next;
  }
  if (!converged) return infeasible(it);

  sol.lambda = lambda;
  sol.iterations = it;
  double penalty = 0.0;
  for (double g : gvals) {
    const double t = 1.0 + lambda * g;
    if (!(t > 0.0)) return infeasible(it);
    penalty += std::log1p(lambda * g);
  }
  sol.penalty = penalty;
  sol.feasible = true;
  if (options.compute_weights) {
    sol.weights.resize(gvals.size());
    for (std::size_t i = 0; i < gvals.size(); ++i) {
      sol.weights[i] = 1.0 / (n * (1.0 + lambda * gvals[i]));
    }
  }
  return sol;
}

double indicator_penalty(std::size_t n2, std::size_t k) {
  if (k > n2) throw std::domain_error("indicator count k exceeds n2");
  if (k == 0 || k == n2) return kInf;
  const auto n = static_cast<double>(n2);
  const auto below = static_cast<double>(k);
  const auto above = n - below;
  return below * std::log(2.0 * below / n) + above * std::log(2.0 * above / n);
}

ELSolution indicator_closed_form(std::size_t n2, std::size_t k) {
  if (k > n2) throw std::domain_error("indicator count k exceeds n2");
  if (n2 == 0) throw std::domain_error("indicator_closed_form needs n2 >= 1");
  if (k == 0 || k == n2) return infeasible();
  const auto n = static_cast<double>(n2);
  const auto below = static_cast<double>(k);
  ELSolution sol;
  sol.feasible = true;
  sol.lambda = 2.0 * (2.0 * below - n) / n;
  sol.penalty = indicator_penalty(n2, k);
  sol.weights.resize(n2);
  // Ordering convention: the k points with g = +1/2 come first.
  std::fill_n(sol.weights.begin(), k, 1.0 / (2.0 * below));
  std::fill(sol.weights.begin() + static_cast<std::ptrdiff_t>(k), sol.weights.end(),
            1.0 / (2.0 * (n - below)));
  return sol;
}

}  // namespace elfuse
