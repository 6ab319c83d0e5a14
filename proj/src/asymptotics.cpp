#include "elfuse/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace elfuse {

void AsymptoticInputs::validate() const {
  if (!(b > 0.0 && b < 1.0)) throw std::domain_error("b must lie in (0, 1)");
  if (!(fisher > 0.0) || !std::isfinite(fisher)) throw std::domain_error("Fisher information must be positive");
  if (!(phi > 0.0) || !std::isfinite(phi)) throw std::domain_error("Phi = E[g^2] must be positive");
  if (!std::isfinite(dg)) throw std::domain_error("E[dg/dtheta] must be finite");
}

AsymptoticCovariances covariances(const AsymptoticInputs& in) {
  in.validate();
  const double b = in.b;
  const double info = in.fisher;
  const double dg = in.dg;
  const double phi_inv = 1.0 / in.phi;

  AsymptoticCovariances out;
  out.s0 = b * info + (1.0 - b) * dg * phi_inv * dg;
  const double s0_inv = 1.0 / out.s0;

  out.s1 = b * s0_inv * info * s0_inv + (1.0 - b) * s0_inv * dg * phi_inv * dg * s0_inv;

  const double first = b * phi_inv * dg * s0_inv * info * s0_inv * dg * phi_inv;
  const double left = -phi_inv + (1.0 - b) * phi_inv * dg * s0_inv * dg * phi_inv;
  const double right = -phi_inv / (1.0 - b) + phi_inv * dg * s0_inv * dg * phi_inv;
  out.s2 = first + left * in.phi * right;

  out.s1_simplified = s0_inv;
  return out;
}

AsymptoticInputs asymptotic_inputs(const DistributionSpec& dist2, const EquationSpec& equation,
                                   double b, double primary_variance, double theta0) {
  dist2.validate();
  equation.validate();
  if (!(primary_variance > 0.0)) throw std::domain_error("primary variance must be positive");

  AsymptoticInputs in;
  in.b = b;
  in.fisher = 1.0 / primary_variance;
  const double m0 = equation.median_map(theta0);
  if (equation.variant == EquationVariant::MedianIndicator) {
    in.dg = pdf(dist2, m0);
    in.phi = 0.25;
  } else {
    using boost::math::quadrature::gauss_kronrod;
    const double h = equation.h;
    const double half = equation.kernel.support_halfwidth * h;
    const Kernel k = equation.kernel;
    auto dg_integrand = [&](double y) { return k.density((m0 - y) / h) / h * pdf(dist2, y); };
    auto phi_integrand = [&](double y) {
      const double g = k.cdf((m0 - y) / h) - 0.5;
      return g * g * pdf(dist2, y);
    };
    constexpr unsigned max_depth = 20;
    constexpr double tol = 1e-12;
    in.dg = gauss_kronrod<double, 31>::integrate(dg_integrand, m0 - half, m0 + half, max_depth, tol);
    // Outside the kernel support g = +-1/2 exactly.
    const double tails = 0.25 * (cdf(dist2, m0 - half) + (1.0 - cdf(dist2, m0 + half)));
    in.phi = tails +
             gauss_kronrod<double, 31>::integrate(phi_integrand, m0 - half, m0 + half, max_depth, tol);
  }
  in.validate();
  return in;
}

double NullQuadraticForm::evaluate(double u1, double u2) const {
  const double w1 = vinv11 * u1 + vinv12 * u2;
  const double w2 = vinv12 * u1 + vinv22 * u2;
  return middle11 * w1 * w1 + 2.0 * middle12 * w1 * w2;
}

NullQuadraticForm null_quadratic_form(const AsymptoticInputs& in) {
  in.validate();
  const double b = in.b;
  const double v11 = b * in.fisher;
  const double v12 = (1.0 - b) * in.dg;
  const double v22 = -(1.0 - b) * in.phi;
  NullQuadraticForm q;
  q.determinant = v11 * v22 - v12 * v12;
  if (q.determinant == 0.0 || !std::isfinite(q.determinant)) {
    std::ostringstream msg;
    msg << "V is singular (det V = " << q.determinant << ")";
    throw std::domain_error(msg.str());
  }
  // Block form of V^{-1} in terms of S0.
  const double s0 = covariances(in).s0;
  const double phi_inv = 1.0 / in.phi;
  q.vinv11 = 1.0 / s0;
  q.vinv12 = in.dg * phi_inv / s0;
  q.vinv22 = -phi_inv / (1.0 - b) + phi_inv * in.dg / s0 * in.dg * phi_inv;
  q.middle11 = s0;
  q.middle12 = (1.0 - b) * in.dg;
  q.sd_u1 = std::sqrt(b * in.fisher);
  q.sd_u2 = std::sqrt((1.0 - b) * in.phi);
  return q;
}

AsymptoticInputs empirical_inputs(const FusionProblem& problem, double theta0) {
  const auto& y = problem.y().values;
  const auto n1 = static_cast<double>(problem.n1());
  const auto n2 = static_cast<double>(problem.n2());
  const EquationSpec& eq = problem.equation();
  const double m0 = eq.median_map(theta0);

  AsymptoticInputs in;
  in.b = n1 / (n1 + n2);
  in.fisher = 1.0 / problem.s1_sq();

  std::vector<double> g;
  g_eval_all(eq, y, theta0, g);
  double phi = 0.0;
  for (double v : g) phi += v * v;
  in.phi = phi / n2;

  Kernel k = eq.kernel;
  double h = eq.h;
  if (eq.variant == EquationVariant::MedianIndicator) {
    k = epanechnikov_kernel();
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= n2;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = n2 > 1 ? std::sqrt(ss / (n2 - 1)) : 0.0;
    h = 1.06 * sd * std::pow(n2, -0.2);
    if (!(h > 0.0)) throw EstimationError("cannot estimate the density of y at theta0: y has no spread");
  }
  double dg = 0.0;
  for (double v : y) dg += k.density((m0 - v) / h) / h;
  in.dg = dg / n2;
  in.validate();
  return in;
}

double lr_statistic(const FusionProblem& problem, double theta0) {
  if (!std::isfinite(theta0)) throw std::domain_error("theta0 must be finite");
  const double at_null = objective(problem, theta0);
  if (!(at_null > -std::numeric_limits<double>::infinity())) {
    throw EstimationError("LR statistic undefined: empirical likelihood infeasible at theta0");
  }
  const FusionEstimate est = estimate(problem);
  return 2.0 * (est.objective - at_null);
}

std::vector<double> lr_null_sample(const AsymptoticInputs& inputs, std::size_t draws,
                                   RngState& rng) {
  if (draws == 0) throw std::domain_error("lr_null_sample needs at least one draw");
  const NullQuadraticForm q = null_quadratic_form(inputs);
  std::vector<double> out(draws);
  for (auto& v : out) {
    const double u1 = q.sd_u1 * rng.standard_normal();
    const double u2 = q.sd_u2 * rng.standard_normal();
    v = q.evaluate(u1, u2);
  }
  return out;
}

double monte_carlo_p_value(double statistic, std::span<const double> null_draws) {
  if (null_draws.empty()) throw std::domain_error("p-value needs null draws");
  std::size_t exceed = 0;
  for (double v : null_draws) exceed += v >= statistic ? 1 : 0;
  return static_cast<double>(exceed) / static_cast<double>(null_draws.size());
}

}  // namespace elfuse
