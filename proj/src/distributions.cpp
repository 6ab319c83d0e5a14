#include "elfuse/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace elfuse {

namespace bm = boost::math;

DistributionSpec DistributionSpec::normal(double location, double sd) {
  return {Family::Normal, location, sd};
}

DistributionSpec DistributionSpec::normal_from_variance(double location, double variance) {
  if (!(variance > 0.0)) throw std::domain_error("normal variance must be positive");
  return {Family::Normal, location, std::sqrt(variance)};
}

DistributionSpec DistributionSpec::student_t(double dof) {
  return {Family::StudentT, 0.0, dof};
}

DistributionSpec DistributionSpec::double_exponential(double location, double b) {
  return {Family::DoubleExponential, location, b};
}

void DistributionSpec::validate() const {
  if (!std::isfinite(location)) throw std::domain_error("distribution location must be finite");
  if (!std::isfinite(scale_param) || !(scale_param > 0.0)) {
    throw std::domain_error("distribution scale parameter must be positive and finite");
  }
  if (family == Family::StudentT &&
      (scale_param < 1.0 || scale_param != std::floor(scale_param))) {
    throw std::domain_error("student t degrees of freedom must be an integer >= 1");
  }
}

double DistributionSpec::variance() const {
  switch (family) {
    case Family::Normal:
      return scale_param * scale_param;
    case Family::StudentT:
      return scale_param > 2.0 ? scale_param / (scale_param - 2.0)
                               : std::numeric_limits<double>::infinity();
    case Family::DoubleExponential:
      return 2.0 * scale_param * scale_param;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

std::string trim_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << v;
  return os.str();
}

}  // namespace

std::string DistributionSpec::label() const {
  switch (family) {
    case Family::Normal:
      return "N(" + trim_number(location) + "," + trim_number(scale_param) + ")";
    case Family::StudentT:
      return "t" + trim_number(scale_param);
    case Family::DoubleExponential:
      return "DE(" + trim_number(location) + "," + trim_number(scale_param) + ")";
  }
  return "?";
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Normal: return "normal";
    case Family::StudentT: return "t";
    case Family::DoubleExponential: return "double_exponential";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "normal") return Family::Normal;
  if (name == "t") return Family::StudentT;
  if (name == "double_exponential") return Family::DoubleExponential;
  throw std::invalid_argument("unknown distribution family: " + std::string(name));
}

double draw(const DistributionSpec& spec, RngState& rng) {
  switch (spec.family) {
    case Family::Normal:
      return spec.location + spec.scale_param * rng.standard_normal();
    case Family::StudentT: {
      const auto dof = static_cast<int>(spec.scale_param);
      const double z = rng.standard_normal();
      double chi2 = 0.0;
      for (int i = 0; i < dof; ++i) {
        const double e = rng.standard_normal();
        chi2 += e * e;
      }
      return spec.location + z / std::sqrt(chi2 / dof);
    }
    case Family::DoubleExponential: {
      const double u = rng.uniform01() - 0.5;
      const double mag = -std::log1p(-2.0 * std::abs(u));
      return spec.location + (u < 0.0 ? -mag : mag) * spec.scale_param;
    }
  }
  return 0.0;
}

Sample sample(const DistributionSpec& spec, std::size_t n, RngState& rng,
              Provenance provenance) {
  spec.validate();
  if (n == 0) throw std::domain_error("sample size must be at least 1");
  Sample out;
  out.provenance = provenance;
  out.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.values.push_back(draw(spec, rng));
  return out;
}

double pdf(const DistributionSpec& spec, double y) {
  spec.validate();
  switch (spec.family) {
    case Family::Normal:
      return bm::pdf(bm::normal_distribution<double>(spec.location, spec.scale_param), y);
    case Family::StudentT:
      return bm::pdf(bm::students_t_distribution<double>(spec.scale_param), y - spec.location);
    case Family::DoubleExponential:
      return bm::pdf(bm::laplace_distribution<double>(spec.location, spec.scale_param), y);
  }
  return 0.0;
}

double cdf(const DistributionSpec& spec, double y) {
  spec.validate();
  switch (spec.family) {
    case Family::Normal:
      return bm::cdf(bm::normal_distribution<double>(spec.location, spec.scale_param), y);
    case Family::StudentT:
      return bm::cdf(bm::students_t_distribution<double>(spec.scale_param), y - spec.location);
    case Family::DoubleExponential:
      return bm::cdf(bm::laplace_distribution<double>(spec.location, spec.scale_param), y);
  }
  return 0.0;
}

double quantile(const DistributionSpec& spec, double p) {
  spec.validate();
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile probability must lie in (0, 1)");
  switch (spec.family) {
    case Family::Normal:
      return bm::quantile(bm::normal_distribution<double>(spec.location, spec.scale_param), p);
    case Family::StudentT:
      return spec.location +
             bm::quantile(bm::students_t_distribution<double>(spec.scale_param), p);
    case Family::DoubleExponential:
      return bm::quantile(bm::laplace_distribution<double>(spec.location, spec.scale_param), p);
  }
  return 0.0;
}

}  // namespace elfuse
