#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "elfuse/distributions.hpp"
#include "elfuse/estimating_equations.hpp"
#include "elfuse/fusion.hpp"
#include "elfuse/rng.hpp"

namespace elfuse {

/// Scalar ingredients of the limiting covariances.
///   b      - limit of n1 / n, in (0, 1)
///   fisher - Fisher information of the primary family (1 / sigma^2)
///   dg     - E[d g / d theta] at theta0
///   phi    - E[g^2] at theta0
struct AsymptoticInputs {
  double b = 0.5;
  double fisher = 1.0;
  double dg = 0.0;
  double phi = 0.25;

  void validate() const;
};

struct AsymptoticCovariances {
  double s0 = 0.0;
  /// Variance of sqrt(n) (theta_hat - theta0), evaluated from the full display.
  double s1 = 0.0;
  /// Variance of sqrt(n) lambda_hat.
  double s2 = 0.0;
  /// The closed form 1 / s0 that s1 collapses to at scalar dimension.
  double s1_simplified = 0.0;
};

AsymptoticCovariances covariances(const AsymptoticInputs& inputs);

/// Builds the inputs for a known second-population law. dg and phi for the
/// smoothed equation come from adaptive Gauss-Kronrod quadrature.
AsymptoticInputs asymptotic_inputs(const DistributionSpec& dist2, const EquationSpec& equation,
                                   double b, double primary_variance, double theta0 = 0.0);

/// Plug-in inputs from data: b = n1 / n, fisher = 1 / s1^2, phi = mean g^2 at
/// theta0. dg is the sample mean of kappa_h(m0 - y) for the smoothed equation;
/// for the indicator it is a kernel density estimate of f_Y(m0) with a
/// normal-reference bandwidth.
AsymptoticInputs empirical_inputs(const FusionProblem& problem, double theta0);

/// Blocks of V^{-1} and of the middle matrix of the limiting quadratic form,
/// scalar case:
///   V      = [[b I, (1-b) dg], [(1-b) dg, -(1-b) Phi]]
///   middle = [[S0, (1-b) dg], [(1-b) dg, 0]]
struct NullQuadraticForm {
  double vinv11 = 0.0;
  double vinv12 = 0.0;
  double vinv22 = 0.0;
  double middle11 = 0.0;
  double middle12 = 0.0;
  double determinant = 0.0;
  double sd_u1 = 0.0;
  double sd_u2 = 0.0;

  double evaluate(double u1, double u2) const;
};

/// Throws std::domain_error (quoting det V) when V is singular.
NullQuadraticForm null_quadratic_form(const AsymptoticInputs& inputs);

/// 2 [l(theta_hat, lambda_hat) - l(theta0, lambda0)]. Throws EstimationError
/// when the inner problem at theta0 is infeasible.
double lr_statistic(const FusionProblem& problem, double theta0);

/// Draws of (U1, U2)' V^{-1} M V^{-1} (U1, U2) with U1 ~ N(0, b I) and
/// U2 ~ N(0, (1 - b) Phi) independent.
std::vector<double> lr_null_sample(const AsymptoticInputs& inputs, std::size_t draws,
                                   RngState& rng);

/// Fraction of null draws at least as large as the statistic.
double monte_carlo_p_value(double statistic, std::span<const double> null_draws);

}  // namespace elfuse
