#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "elfuse/rng.hpp"

namespace elfuse {

enum class Family { Normal, StudentT, DoubleExponential };

/// One of the three second-population families (Normal doubles as the
/// primary family).
///
/// scale_param meaning by family:
///   Normal            - standard deviation
///   StudentT          - degrees of freedom (integer >= 1), unit scale
///   DoubleExponential - Laplace scale b, density exp(-|y - loc| / b) / (2b)
struct DistributionSpec {
  Family family = Family::Normal;
  double location = 0.0;
  double scale_param = 1.0;

  static DistributionSpec normal(double location, double sd);
  static DistributionSpec normal_from_variance(double location, double variance);
  static DistributionSpec student_t(double dof);
  static DistributionSpec double_exponential(double location, double b);

  /// Throws std::domain_error if the parameters are outside the family's domain.
  void validate() const;

  double median() const { return location; }
  double variance() const;

  /// Short label in the tables' style, e.g. "N(0,1.5)", "t3", "DE(0,0.5)".
  std::string label() const;

  bool operator==(const DistributionSpec&) const = default;
};

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

enum class Provenance { Primary, Secondary };

struct Sample {
  std::vector<double> values;
  Provenance provenance = Provenance::Primary;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
};

Sample sample(const DistributionSpec& spec, std::size_t n, RngState& rng,
              Provenance provenance = Provenance::Secondary);

/// A single draw; sample() is a loop over this.
double draw(const DistributionSpec& spec, RngState& rng);

double pdf(const DistributionSpec& spec, double y);
double cdf(const DistributionSpec& spec, double y);
double quantile(const DistributionSpec& spec, double p);

}  // namespace elfuse
