#pragma once

#include <span>
#include <vector>

namespace nlheat {

inline constexpr int kMaxGaussOrder = 64;
inline constexpr int kDefaultGaussOrder = 8;

/// Gauss-Legendre nodes and weights on the reference interval [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Rule with `order` points, exact for polynomials of degree 2*order-1.
/// Supported orders are 1..kMaxGaussOrder.
const GaussRule& gauss_legendre_rule(int order);

/// Flattened composite rule: quadrature points and weights on [lo, hi].
struct QuadratureGrid {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

QuadratureGrid composite_rule(double lo, double hi, int panels, int order);

/// Composite rule over consecutive panels [breaks[i], breaks[i+1]].
QuadratureGrid composite_rule(std::span<const double> breaks, int order);

/// Panels of width at most half a wavelength of sin(highest_mode*pi*x/ell),
/// i.e. ell/highest_mode. At least one panel.
int default_panel_count(double lo, double hi, double ell, int highest_mode);

/// Composite Gauss-Legendre approximation of the integral of f over [lo, hi].
template <class F>
double gauss_quadrature(F&& f, double lo, double hi, int panels, int order) {
  const QuadratureGrid grid = composite_rule(lo, hi, panels, order);
  double sum = 0.0;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    sum += grid.weights[q] * f(grid.points[q]);
  }
  return sum;
}

}  // namespace nlheat
