#include "nlheat/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "nlheat/errors.hpp"

namespace nlheat {
namespace {

GTEST_TEST(GaussRule, PolynomialExactness) {
  for (int order = 1; order <= kMaxGaussOrder; ++order) {
    const GaussRule& rule = gauss_legendre_rule(order);
    ASSERT_EQ(rule.nodes.size(), static_cast<std::size_t>(order));
    // Integral over [-1, 1] of x^k: 2/(k+1) for even k, 0 for odd k.
    for (int k = 0; k <= 2 * order - 1; ++k) {
      double sum = 0.0;
      for (int q = 0; q < order; ++q) sum += rule.weights[q] * std::pow(rule.nodes[q], k);
      const double exact = k % 2 == 0 ? 2.0 / (k + 1) : 0.0;
      EXPECT_NEAR(sum, exact, 1e-13) << "order " << order << " degree " << k;
    }
  }
}

GTEST_TEST(GaussRule, NodesSymmetricAndSorted) {
  const GaussRule& rule = gauss_legendre_rule(8);
  for (int q = 0; q < 8; ++q) {
    EXPECT_NEAR(rule.nodes[q], -rule.nodes[7 - q], 1e-15);
    EXPECT_NEAR(rule.weights[q], rule.weights[7 - q], 1e-15);
    if (q > 0) EXPECT_LT(rule.nodes[q - 1], rule.nodes[q]);
  }
}

GTEST_TEST(GaussQuadrature, SineOverHalfPeriod) {
  EXPECT_NEAR(gauss_quadrature([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 8, 8), 2.0, 1e-12);
}

GTEST_TEST(GaussQuadrature, CubicExactWithOrderFour) {
  EXPECT_NEAR(gauss_quadrature([](double x) { return x * x * x; }, 0.0, 1.0, 1, 4), 0.25, 1e-16);
}

GTEST_TEST(GaussQuadrature, PanelsPartitionInterval) {
  const QuadratureGrid grid = composite_rule(0.2, 1.7, 5, 4);
  EXPECT_EQ(grid.size(), 20u);
  double w = 0.0;
  for (double v : grid.weights) w += v;
  EXPECT_NEAR(w, 1.5, 1e-14);
  const std::vector<double> breaks{0.0, 0.1, 0.5, 1.0};
  const QuadratureGrid uneven = composite_rule(breaks, 8);
  double sum = 0.0;
  for (std::size_t q = 0; q < uneven.size(); ++q) sum += uneven.weights[q] * std::exp(uneven.points[q]);
  EXPECT_NEAR(sum, std::exp(1.0) - 1.0, 1e-15);
}

GTEST_TEST(GaussQuadrature, Errors) {
  auto f = [](double x) { return x; };
  EXPECT_THROW(gauss_quadrature(f, 0.0, 1.0, 1, 0), ArgumentError);
  EXPECT_THROW(gauss_quadrature(f, 0.0, 1.0, 1, kMaxGaussOrder + 1), ArgumentError);
  EXPECT_THROW(gauss_quadrature(f, 1.0, 0.0, 1, 4), ArgumentError);
  EXPECT_THROW(gauss_quadrature(f, 0.0, 1.0, 0, 4), ArgumentError);
  const std::vector<double> bad{0.0, 0.5, 0.5};
  EXPECT_THROW(composite_rule(bad, 4), ArgumentError);
  const std::vector<double> single{0.0};
  EXPECT_THROW(composite_rule(single, 4), ArgumentError);
}

GTEST_TEST(GaussQuadrature, DefaultPanelCount) {
  EXPECT_EQ(default_panel_count(0.0, 1.0, 1.0, 16), 16);
  EXPECT_EQ(default_panel_count(0.3, 0.8, 1.0, 16), 8);
  EXPECT_EQ(default_panel_count(0.0, 1.0, 1.0, 0), 1);
}

}  // namespace
}  // namespace nlheat
