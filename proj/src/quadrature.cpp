#include "nlheat/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "nlheat/errors.hpp"

namespace nlheat {
namespace {

// Newton iteration on P_n from the Chebyshev-like initial guess; nodes are
// symmetric, so only the positive half is iterated.
GaussRule compute_rule(int n) {
  GaussRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre_rule(int order) {
  if (order < 1 || order > kMaxGaussOrder) {
    throw ArgumentError("gauss_quadrature: unsupported order " + std::to_string(order) +
                        " (supported 1.." + std::to_string(kMaxGaussOrder) + ")");
  }
  static std::array<GaussRule, kMaxGaussOrder + 1> table;
  static std::array<std::once_flag, kMaxGaussOrder + 1> flags;
  std::call_once(flags[order], [order] { table[order] = compute_rule(order); });
  return table[order];
}

QuadratureGrid composite_rule(double lo, double hi, int panels, int order) {
  if (!(lo < hi)) throw ArgumentError("gauss_quadrature: require lo < hi");
  if (panels < 1) throw ArgumentError("gauss_quadrature: panels must be >= 1");
  std::vector<double> breaks(panels + 1);
  const double h = (hi - lo) / panels;
  for (int k = 0; k <= panels; ++k) breaks[k] = lo + k * h;
  breaks[panels] = hi;
  return composite_rule(breaks, order);
}

QuadratureGrid composite_rule(std::span<const double> breaks, int order) {
  const GaussRule& rule = gauss_legendre_rule(order);
  if (breaks.size() < 2) throw ArgumentError("gauss_quadrature: need at least one panel");
  QuadratureGrid grid;
  grid.points.reserve((breaks.size() - 1) * order);
  grid.weights.reserve((breaks.size() - 1) * order);
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    if (!(a < b)) throw ArgumentError("gauss_quadrature: panel breaks must increase");
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int q = 0; q < order; ++q) {
      grid.points.push_back(mid + half * rule.nodes[q]);
      grid.weights.push_back(half * rule.weights[q]);
    }
  }
  return grid;
}

int default_panel_count(double lo, double hi, double ell, int highest_mode) {
  const double width = ell / std::max(highest_mode, 1);
  return std::max(1, static_cast<int>(std::ceil((hi - lo) / width - 1e-12)));
}

}  // namespace nlheat
