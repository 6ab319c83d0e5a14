#include "elfuse/estimating_equations.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace elfuse {

namespace {

const double kSqrt5 = std::sqrt(5.0);
const double kNorm = 3.0 / (4.0 * std::sqrt(5.0));

double epanechnikov_density(double u) {
  if (std::abs(u) > kSqrt5) return 0.0;
  return kNorm * (1.0 - u * u / 5.0);
}

double epanechnikov_cdf(double u) {
  if (u <= -kSqrt5) return 0.0;
  if (u >= kSqrt5) return 1.0;
  return 0.5 + kNorm * (u - u * u * u / 15.0);
}

}  // namespace

Kernel epanechnikov_kernel() { return {kSqrt5, &epanechnikov_density, &epanechnikov_cdf}; }

std::string_view variant_name(EquationVariant v) {
  return v == EquationVariant::MedianIndicator ? "median" : "smoothed";
}

EquationVariant parse_variant(std::string_view name) {
  if (name == "median") return EquationVariant::MedianIndicator;
  if (name == "smoothed") return EquationVariant::SmoothedMedian;
  throw std::invalid_argument("unknown equation variant: " + std::string(name));
}

EquationSpec EquationSpec::median_indicator() { return {}; }

EquationSpec EquationSpec::smoothed(double h, Kernel kernel) {
  EquationSpec spec;
  spec.variant = EquationVariant::SmoothedMedian;
  spec.kernel = kernel;
  spec.h = h;
  spec.validate();
  return spec;
}

void EquationSpec::validate() const {
  if (median_map == nullptr) throw std::invalid_argument("equation needs a median map");
  if (variant == EquationVariant::SmoothedMedian) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw std::domain_error("smoothing bandwidth h must be positive");
    }
    if (kernel.cdf == nullptr || kernel.density == nullptr) {
      throw std::invalid_argument("smoothed equation needs a kernel");
    }
  }
}

double g_eval(const EquationSpec& spec, double y, double theta) {
  const double m = spec.median_map(theta);
  if (spec.variant == EquationVariant::MedianIndicator) {
    return y <= m ? 0.5 : -0.5;
  }
  return spec.kernel.cdf((m - y) / spec.h) - 0.5;
}

void g_eval_all(const EquationSpec& spec, std::span<const double> y, double theta,
                std::vector<double>& out) {
  out.resize(y.size());
  const double m = spec.median_map(theta);
  if (spec.variant == EquationVariant::MedianIndicator) {
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] <= m ? 0.5 : -0.5;
    return;
  }
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = spec.kernel.cdf((m - y[i]) / spec.h) - 0.5;
}

double bandwidth(std::size_t n2, double exponent) {
  if (n2 == 0) throw std::domain_error("bandwidth needs n2 >= 1");
  if (!std::isfinite(exponent)) throw std::domain_error("bandwidth exponent must be finite");
  return std::pow(static_cast<double>(n2), exponent);
}

}  // namespace elfuse
