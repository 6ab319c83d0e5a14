#include "elfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "elfuse/el_solver.hpp"

namespace elfuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOpenEndOffset = 1e-12;

void require_finite(const Sample& s, const char* what) {
  for (double v : s.values) {
    if (!std::isfinite(v)) throw std::domain_error(std::string(what) + " contains non-finite values");
  }
}

// Degenerate inputs: n2 < 2, all y tied, or all x equal (s1_sq = 0).
FusionEstimate mle_fallback(const FusionProblem& problem) {
  FusionEstimate est;
  est.theta_hat = problem.xbar();
  est.mle = problem.xbar();
  est.lambda_hat = 0.0;
  est.method = EstimationMethod::MleFallback;
  est.diagnostics.degenerate = true;
  est.objective = problem.s1_sq() > 0.0 ? objective(problem, est.theta_hat) : kInf;
  return est;
}

bool y_all_tied(const FusionProblem& problem) {
  const auto& ys = problem.sorted_y();
  return ys.front() == ys.back();
}

}  // namespace

FusionProblem::FusionProblem(Sample x, Sample y, EquationSpec equation)
    : x_(std::move(x)), y_(std::move(y)), equation_(equation) {
  if (x_.size() < 2) throw std::domain_error("fusion problem needs n1 >= 2");
  if (y_.empty()) throw std::domain_error("fusion problem needs n2 >= 1");
  require_finite(x_, "primary sample");
  require_finite(y_, "secondary sample");
  equation_.validate();
  x_.provenance = Provenance::Primary;
  y_.provenance = Provenance::Secondary;

  const auto n1 = static_cast<double>(x_.size());
  xbar_ = std::accumulate(x_.values.begin(), x_.values.end(), 0.0) / n1;
  double ss = 0.0;
  for (double v : x_.values) ss += (v - xbar_) * (v - xbar_);
  s1_sq_ = ss / n1;

  sorted_y_ = y_.values;
  std::sort(sorted_y_.begin(), sorted_y_.end());
  const auto [xmin, xmax] = std::minmax_element(x_.values.begin(), x_.values.end());
  data_min_ = std::min(*xmin, sorted_y_.front());
  data_max_ = std::max(*xmax, sorted_y_.back());
}

double FusionProblem::search_lower() const { return data_min_ - 3.0 * std::sqrt(s1_sq_); }
double FusionProblem::search_upper() const { return data_max_ + 3.0 * std::sqrt(s1_sq_); }

double FusionProblem::gaussian_loglik(double theta) const {
  if (!(s1_sq_ > 0.0)) throw std::domain_error("gaussian log-likelihood needs a positive plug-in variance");
  const auto n1 = static_cast<double>(x_.size());
  // sum (x_i - theta)^2 = n1 s1_sq + n1 (xbar - theta)^2
  const double d = xbar_ - theta;
  return -0.5 * n1 * std::log(2.0 * std::numbers::pi * s1_sq_) - 0.5 * n1 -
         0.5 * n1 * d * d / s1_sq_;
}

std::string_view method_name(EstimationMethod m) {
  switch (m) {
    case EstimationMethod::PiecewiseExact: return "piecewise_exact";
    case EstimationMethod::SmoothedSearch: return "smoothed_search";
    case EstimationMethod::MleFallback: return "mle_fallback";
  }
  return "?";
}

double objective(const FusionProblem& problem, double theta) {
  if (!std::isfinite(theta)) throw std::domain_error("objective needs a finite theta");
  std::vector<double> g;
  g_eval_all(problem.equation(), problem.y().values, theta, g);
  SolveOptions opts;
  opts.compute_weights = false;
  const ELSolution sol = solve_lambda(g, opts);
  if (!sol.feasible) return -kInf;
  return problem.gaussian_loglik(theta) - sol.penalty;
}

FusionEstimate estimate_indicator(const FusionProblem& problem) {
  if (problem.equation().variant != EquationVariant::MedianIndicator) {
    throw std::invalid_argument("estimate_indicator needs the median indicator equation");
  }
  if (problem.n2() < 2 || y_all_tied(problem) || !(problem.s1_sq() > 0.0)) {
    return mle_fallback(problem);
  }

  const auto& ys = problem.sorted_y();
  const std::size_t n2 = ys.size();
  const double xbar = problem.xbar();

  FusionEstimate best;
  best.objective = -kInf;
  best.mle = xbar;
  best.method = EstimationMethod::PiecewiseExact;
  std::size_t best_k = 0;

  // k = #{y_i <= theta} is constant on [y_(k), y_(k+1)); k = 0 and k = n2
  // (the unbounded tails) are infeasible.
  for (std::size_t k = 1; k < n2; ++k) {
    const double lo = ys[k - 1];
    const double hi = ys[k];
    if (!(lo < hi)) continue;
    double theta = xbar;
    if (theta < lo) {
      theta = lo;
    } else if (theta >= hi) {
      theta = hi - kOpenEndOffset;
      if (!(theta >= lo && theta < hi)) theta = std::nextafter(hi, -kInf);
    }
    const double value = problem.gaussian_loglik(theta) - indicator_penalty(n2, k);
    ++best.diagnostics.objective_evaluations;
    if (value > best.objective) {
      best.objective = value;
      best.theta_hat = theta;
      best_k = k;
    }
  }
  if (best_k == 0) throw EstimationError("no feasible interval for the indicator equation");

  best.lambda_hat = indicator_closed_form(n2, best_k).lambda;
  best.diagnostics.interval_index = static_cast<long>(best_k);
  return best;
}

namespace {

/// Objective evaluator reusing scratch space and warm-starting lambda.
class SmoothedEvaluator {
 public:
  explicit SmoothedEvaluator(const FusionProblem& problem) : problem_(problem) {
    opts_.compute_weights = false;
  }

  double operator()(double theta) {
    ++evaluations_;
    const auto& ys = problem_.sorted_y();
    const double m = problem_.equation().median_map(theta);
    // g_i > 0 iff y_i < m(theta), so feasibility needs y_min < m < y_max.
    if (!(ys.front() < m && m < ys.back())) return -kInf;
    g_eval_all(problem_.equation(), ys, theta, g_);
    opts_.lambda_start = last_lambda_;
    const ELSolution sol = solve_lambda(g_, opts_);
    if (!sol.feasible) return -kInf;
    last_lambda_ = sol.lambda;
    return problem_.gaussian_loglik(theta) - sol.penalty;
  }

  long evaluations() const { return evaluations_; }

 private:
  const FusionProblem& problem_;
  SolveOptions opts_;
  std::vector<double> g_;
  double last_lambda_ = 0.0;
  long evaluations_ = 0;
};

}  // namespace

FusionEstimate estimate_smoothed(const FusionProblem& problem) {
  if (problem.equation().variant != EquationVariant::SmoothedMedian) {
    throw std::invalid_argument("estimate_smoothed needs the smoothed median equation");
  }
  if (problem.n2() < 2 || y_all_tied(problem) || !(problem.s1_sq() > 0.0)) {
    return mle_fallback(problem);
  }

  SmoothedEvaluator eval(problem);
  const double lower = problem.search_lower();
  const double upper = problem.search_upper();
  const std::size_t last = kSmoothedGridPoints - 1;
  auto grid_point = [&](std::size_t j) {
    return j == last ? upper : lower + (upper - lower) * static_cast<double>(j) / static_cast<double>(last);
  };

  FusionEstimate best;
  best.objective = -kInf;
  best.mle = problem.xbar();
  best.method = EstimationMethod::SmoothedSearch;
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < kSmoothedGridPoints; ++j) {
    const double theta = grid_point(j);
    const double value = eval(theta);
    if (value > -kInf) ++best.diagnostics.grid_feasible_points;
    if (value > best.objective) {
      best.objective = value;
      best.theta_hat = theta;
      best_j = j;
    }
  }
  if (best.diagnostics.grid_feasible_points == 0) {
    throw EstimationError("smoothed objective is infeasible on the whole search grid");
  }
  best.diagnostics.grid_best_index = static_cast<long>(best_j);

  // Golden-section maximization on the two cells around the best grid point.
  double a = grid_point(best_j == 0 ? 0 : best_j - 1);
  double b = grid_point(std::min(best_j + 1, last));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  auto consider = [&](double theta, double value) {
    if (value > best.objective) {
      best.objective = value;
      best.theta_hat = theta;
    }
  };
  consider(c, fc);
  consider(d, fd);
  long iterations = 0;
  while (b - a > kGoldenTolerance && iterations < 200) {
    ++iterations;
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
      consider(d, fd);
    }
  }
  best.diagnostics.refine_iterations = iterations;
  best.diagnostics.objective_evaluations = eval.evaluations();

  std::vector<double> g;
  g_eval_all(problem.equation(), problem.y().values, best.theta_hat, g);
  best.lambda_hat = solve_lambda(g).lambda;
  return best;
}

FusionEstimate estimate(const FusionProblem& problem) {
  return problem.equation().variant == EquationVariant::MedianIndicator
             ? estimate_indicator(problem)
             : estimate_smoothed(problem);
}

double mle_baseline(std::span<const double> x) {
  if (x.empty()) throw std::domain_error("mle_baseline needs a non-empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace elfuse
