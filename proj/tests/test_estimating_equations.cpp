#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "elfuse/estimating_equations.hpp"
#include "oracles.hpp"

using namespace elfuse;

TEST_CASE("kernel is a unit-variance density matching the closed form") {
  const Kernel k = epanechnikov_kernel();
  const double r = std::sqrt(5.0);
  CHECK(k.support_halfwidth == doctest::Approx(r));
  CHECK(oracle::simpson(k.density, -r, r) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(oracle::simpson([&](double u) { return u * u * k.density(u); }, -r, r) ==
        doctest::Approx(1.0).epsilon(1e-12));
  for (double u = -3; u <= 3; u += 0.1) CHECK(k.density(u) == doctest::Approx(oracle::kernel(u)).epsilon(1e-14));
}

TEST_CASE("kernel cdf equals the integrated density") {
  const Kernel k = epanechnikov_kernel();
  const double r = std::sqrt(5.0);
  CHECK(k.cdf(-r - 1) == 0.0);
  CHECK(k.cdf(r + 1) == 1.0);
  CHECK(k.cdf(0) == doctest::Approx(0.5).epsilon(1e-15));
  for (double u = -2.3; u <= 2.3; u += 0.05) {
    const double q = oracle::simpson(oracle::kernel, -r, std::min(u, r), 4000);
    CHECK(std::abs(k.cdf(u) - q) < 1e-10);
  }
}

TEST_CASE("indicator equation") {
  const auto eq = EquationSpec::median_indicator();
  CHECK(g_eval(eq, 1.0, 1.0) == 0.5);
  CHECK(g_eval(eq, 0.99, 1.0) == 0.5);
  CHECK(g_eval(eq, 1.01, 1.0) == -0.5);
}

TEST_CASE("smoothed equation value and limits") {
  const auto eq = EquationSpec::smoothed(0.5);
  CHECK(g_eval(eq, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g_eval(eq, -5.0, 1.0) == 0.5);
  CHECK(g_eval(eq, 5.0, 1.0) == -0.5);
  // psi(u) - 1/2 written out
  const double u = (1.0 - 0.8) / 0.5;
  const double expected = 0.75 / std::sqrt(5.0) * (u - u * u * u / 15.0);
  CHECK(g_eval(eq, 0.8, 1.0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("smoothed equation converges to the indicator as h shrinks") {
  const std::vector<double> ys{-1.2, -0.3, 0.05, 0.4, 2.0};
  const auto ind = EquationSpec::median_indicator();
  double prev = INFINITY;
  for (double h : {1.0, 0.1, 0.01, 0.001}) {
    double err = 0;
    for (double y : ys) err = std::max(err, std::abs(g_eval(EquationSpec::smoothed(h), y, 0.1) - g_eval(ind, y, 0.1)));
    CHECK(err <= prev);
    prev = err;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("g_eval_all agrees with g_eval") {
  const std::vector<double> ys{-2, -0.5, 0, 0.1, 0.3, 3};
  std::vector<double> out;
  for (const auto& eq : {EquationSpec::median_indicator(), EquationSpec::smoothed(0.7)}) {
    g_eval_all(eq, ys, 0.2, out);
    REQUIRE(out.size() == ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) CHECK(out[i] == g_eval(eq, ys[i], 0.2));
  }
}

TEST_CASE("bandwidth and validation") {
  CHECK(bandwidth(16, -0.5) == doctest::Approx(0.25));
  CHECK(bandwidth(10, -1.0) == doctest::Approx(0.1));
  CHECK_THROWS_AS(bandwidth(0, -0.5), std::domain_error);
  CHECK_THROWS_AS(bandwidth(10, NAN), std::domain_error);
  CHECK_THROWS(EquationSpec::smoothed(0.0).validate());
  CHECK_THROWS(EquationSpec::smoothed(-1.0).validate());
  CHECK(parse_variant(variant_name(EquationVariant::SmoothedMedian)) == EquationVariant::SmoothedMedian);
  CHECK(parse_variant("median") == EquationVariant::MedianIndicator);
  CHECK_THROWS(parse_variant("mean"));
}
