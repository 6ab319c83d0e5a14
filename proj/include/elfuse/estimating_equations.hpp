#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace elfuse {

/// Symmetric second-order kernel with compact support.
struct Kernel {
  double support_halfwidth = 0.0;
  double (*density)(double) = nullptr;
  /// psi(u) = integral of density over (-inf, u).
  double (*cdf)(double) = nullptr;
};

/// kappa(u) = 3/(4 sqrt 5) (1 - u^2/5) on |u| <= sqrt 5, unit variance.
Kernel epanechnikov_kernel();

enum class EquationVariant { MedianIndicator, SmoothedMedian };

std::string_view variant_name(EquationVariant v);
EquationVariant parse_variant(std::string_view name);

inline double identity_median(double theta) { return theta; }

/// Median-based estimating function g(y, theta) for the second sample.
///
/// MedianIndicator:  g1 = 1(y <= m(theta)) - 1/2
/// SmoothedMedian:   g2 = psi((m(theta) - y) / h) - 1/2
///
/// m(theta) is the median of the primary family; identity for the Gaussian
/// location model.
struct EquationSpec {
  EquationVariant variant = EquationVariant::MedianIndicator;
  Kernel kernel{};
  double h = 0.0;
  double (*median_map)(double) = &identity_median;

  static EquationSpec median_indicator();
  static EquationSpec smoothed(double h, Kernel kernel = epanechnikov_kernel());

  void validate() const;
};

double g_eval(const EquationSpec& spec, double y, double theta);

/// g_eval over a whole sample, written into out (resized to y.size()).
void g_eval_all(const EquationSpec& spec, std::span<const double> y, double theta,
                std::vector<double>& out);

/// Smoothing bandwidth n2^exponent.
double bandwidth(std::size_t n2, double exponent);

}  // namespace elfuse
