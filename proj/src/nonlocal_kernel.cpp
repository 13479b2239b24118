#include "nlheat/nonlocal_kernel.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "nlheat/errors.hpp"
#include "nlheat/format.hpp"
#include "nlheat/parallel.hpp"
#include "nlheat/quadrature.hpp"

namespace nlheat {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double sine_series(const std::vector<double>& coeffs, double ell, double x) {
  const double scale = std::sqrt(2.0 / ell);
  double sum = 0.0;
  for (std::size_t m = 0; m < coeffs.size(); ++m) {
    sum += coeffs[m] * std::sin((m + 1) * std::numbers::pi * x / ell);
  }
  return scale * sum;
}

Eigen::VectorXd padded(const std::vector<double>& coeffs, std::size_t n) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t m = 0; m < n && m < coeffs.size(); ++m) v[m] = coeffs[m];
  return v;
}

void check_grid_length(const GridKernel& grid, double ell, const char* op) {
  if (std::abs(grid.length - ell) > 1e-12 * std::max(1.0, ell)) {
    throw ArgumentError(std::string(op) + ": grid kernel length " + format_double(grid.length) +
                        " does not match domain length " + format_double(ell));
  }
}

/// Quadrature points, weights, and the mode table psi_j(x_q) * w_q.
struct WeightedModes {
  QuadratureGrid grid;
  Eigen::MatrixXd weighted;  // nq x N
};

WeightedModes weighted_modes(const KernelSpec& spec, const SpectralBasis& basis) {
  WeightedModes out;
  const auto breaks = kernel_panel_breaks(spec, basis.length(), basis.size());
  out.grid = composite_rule(breaks, basis.quadrature_order());
  const auto nq = static_cast<Eigen::Index>(out.grid.size());
  out.weighted.resize(nq, basis.size());
  for (Eigen::Index q = 0; q < nq; ++q) {
    for (int j = 0; j < basis.size(); ++j) {
      out.weighted(q, j) = out.grid.weights[q] * basis.mode(j, out.grid.points[q]);
    }
  }
  return out;
}

void finish_matrix(Eigen::MatrixXd& k, const char* op) {
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      if (!std::isfinite(k(i, j))) {
        throw NumericError(std::string(op) + ": non-finite entry (" + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
      }
    }
  }
  const Eigen::MatrixXd kt = k.transpose();
  k = 0.5 * (k + kt);
}

double separable_hs(const SeparableKernel& s) {
  const std::size_t n = std::max(s.g.size(), s.h.size());
  const Eigen::VectorXd g = padded(s.g, n);
  const Eigen::VectorXd h = padded(s.h, n);
  const double gg = g.squaredNorm();
  const double hh = h.squaredNorm();
  const double gh = g.dot(h);
  return std::sqrt(0.5 * (gg * hh + gh * gh));
}

}  // namespace

double GridKernel::operator()(double x, double xi) const {
  auto locate = [this](double v, int& i0, double& frac) {
    double u = v * n / length - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    i0 = std::min(static_cast<int>(std::floor(u)), n - 2);
    frac = u - i0;
  };
  int i = 0;
  int j = 0;
  double s = 0.0;
  double t = 0.0;
  locate(x, i, s);
  locate(xi, j, t);
  return (1 - s) * (1 - t) * sample(i, j) + s * (1 - t) * sample(i + 1, j) +
         (1 - s) * t * sample(i, j + 1) + s * t * sample(i + 1, j + 1);
}

double evaluate_kernel(const KernelSpec& spec, double ell, double x, double xi) {
  return std::visit(
      Overloaded{
          [](const ZeroKernel&) { return 0.0; },
          [&](const SeparableKernel& s) {
            const double gx = sine_series(s.g, ell, x);
            const double gxi = sine_series(s.g, ell, xi);
            const double hx = sine_series(s.h, ell, x);
            const double hxi = sine_series(s.h, ell, xi);
            return 0.5 * (gx * hxi + hx * gxi);
          },
          [&](const GaussianKernel& g) {
            const double d = x - xi;
            return g.amplitude * std::exp(-d * d / (2.0 * g.width * g.width));
          },
          [&](const GridKernel& g) { return g(x, xi); },
      },
      spec);
}

std::string kernel_type_name(const KernelSpec& spec) {
  return std::visit(Overloaded{
                        [](const ZeroKernel&) { return std::string("zero"); },
                        [](const SeparableKernel&) { return std::string("separable"); },
                        [](const GaussianKernel&) { return std::string("gaussian"); },
                        [](const GridKernel&) { return std::string("grid"); },
                    },
                    spec);
}

GridKernel sample_grid_kernel(const std::function<double(double, double)>& f, int n, double ell) {
  if (n < 2) throw ArgumentError("load_kernel: grid kernels need n >= 2");
  GridKernel grid;
  grid.n = n;
  grid.length = ell;
  grid.samples.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      grid.samples[static_cast<std::size_t>(i) * n + j] = f(grid.midpoint(i), grid.midpoint(j));
    }
  }
  return grid;
}

double check_symmetry(const KernelSpec& spec, const SpectralBasis& basis) {
  if (std::holds_alternative<ZeroKernel>(spec)) return 0.0;
  constexpr int kLattice = 33;
  const double ell = basis.length();
  double defect = 0.0;
  for (int a = 0; a < kLattice; ++a) {
    const double x = a * ell / (kLattice - 1);
    for (int b = 0; b < kLattice; ++b) {
      const double xi = b * ell / (kLattice - 1);
      const double d = std::abs(evaluate_kernel(spec, ell, x, xi) - evaluate_kernel(spec, ell, xi, x));
      defect = std::max(defect, d);
    }
  }
  return defect;
}

void require_symmetric(const KernelSpec& spec, const SpectralBasis& basis, double tol) {
  const double defect = check_symmetry(spec, basis);
  if (!(defect <= tol)) {
    throw ArgumentError("check_symmetry: kernel symmetry defect " + format_double(defect) +
                        " exceeds tolerance " + format_double(tol));
  }
}

double KernelMatrix::spectral_radius() const {
  if (matrix.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> kernel_panel_breaks(const KernelSpec& spec, double ell, int highest_mode) {
  const double mode_width = highest_mode > 0 ? ell / highest_mode : ell;
  auto uniform = [ell](double width) {
    const int panels = std::max(1, static_cast<int>(std::ceil(ell / width - 1e-12)));
    std::vector<double> breaks(panels + 1);
    for (int k = 0; k <= panels; ++k) breaks[k] = ell * k / panels;
    return breaks;
  };
  if (const auto* g = std::get_if<GaussianKernel>(&spec)) {
    return uniform(std::min(g->width / 2.0, mode_width));
  }
  if (const auto* grid = std::get_if<GridKernel>(&spec)) {
    // Kinks of the bilinear interpolant sit on the midpoints.
    std::vector<double> coarse;
    coarse.push_back(0.0);
    for (int i = 0; i < grid->n; ++i) coarse.push_back(grid->midpoint(i));
    coarse.push_back(ell);
    std::vector<double> breaks;
    breaks.push_back(0.0);
    for (std::size_t k = 0; k + 1 < coarse.size(); ++k) {
      const double a = coarse[k];
      const double b = coarse[k + 1];
      const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / mode_width - 1e-12)));
      for (int p = 1; p <= pieces; ++p) breaks.push_back(a + (b - a) * p / pieces);
    }
    breaks.back() = ell;
    return breaks;
  }
  return uniform(mode_width / 2.0);
}

KernelMatrix project_kernel(const KernelSpec& spec, const SpectralBasis& basis) {
  const int n = basis.size();
  KernelMatrix out;
  // The matrix is checked entrywise before the norm, so a non-finite sample
  // is reported by its matrix entry.
  auto with_norm = [&]() {
    out.hs_of_k = hs_norm(spec, basis);
    return out;
  };
  if (std::holds_alternative<ZeroKernel>(spec)) {
    out.matrix = Eigen::MatrixXd::Zero(n, n);
    return with_norm();
  }
  if (const auto* s = std::get_if<SeparableKernel>(&spec)) {
    const Eigen::VectorXd g = padded(s->g, n);
    const Eigen::VectorXd h = padded(s->h, n);
    out.matrix = 0.5 * (g * h.transpose() + h * g.transpose());
    finish_matrix(out.matrix, "project_kernel");
    return with_norm();
  }
  if (const auto* grid = std::get_if<GridKernel>(&spec)) {
    check_grid_length(*grid, basis.length(), "project_kernel");
  }
  const WeightedModes wm = weighted_modes(spec, basis);
  const auto nq = static_cast<Eigen::Index>(wm.grid.size());
  const double ell = basis.length();
  Eigen::MatrixXd samples(nq, nq);
#pragma omp parallel for num_threads(worker_count()) schedule(static)
  for (Eigen::Index b = 0; b < nq; ++b) {
    for (Eigen::Index a = 0; a < nq; ++a) {
      samples(a, b) = evaluate_kernel(spec, ell, wm.grid.points[a], wm.grid.points[b]);
    }
  }
  out.matrix = wm.weighted.transpose() * samples * wm.weighted;
  finish_matrix(out.matrix, "project_kernel");
  return with_norm();
}

double hs_norm(const KernelSpec& spec, const SpectralBasis& basis) {
  if (std::holds_alternative<ZeroKernel>(spec)) return 0.0;
  if (const auto* s = std::get_if<SeparableKernel>(&spec)) return separable_hs(*s);
  if (const auto* grid = std::get_if<GridKernel>(&spec)) {
    check_grid_length(*grid, basis.length(), "hs_norm");
  }
  const double ell = basis.length();
  const auto breaks = kernel_panel_breaks(spec, ell, 0);
  const QuadratureGrid q = composite_rule(breaks, basis.quadrature_order());
  const auto nq = static_cast<std::ptrdiff_t>(q.size());
  std::vector<double> rows(q.size(), 0.0);
#pragma omp parallel for num_threads(worker_count()) schedule(static)
  for (std::ptrdiff_t a = 0; a < nq; ++a) {
    double row = 0.0;
    for (std::ptrdiff_t b = 0; b < nq; ++b) {
      const double k = evaluate_kernel(spec, ell, q.points[a], q.points[b]);
      row += q.weights[b] * k * k;
    }
    rows[a] = q.weights[a] * row;
  }
  double total = 0.0;
  for (double r : rows) total += r;
  if (!std::isfinite(total)) throw NumericError("hs_norm: non-finite kernel norm");
  return std::sqrt(total);
}

namespace reference {

KernelMatrix project_kernel_serial(const KernelSpec& spec, const SpectralBasis& basis) {
  const int n = basis.size();
  KernelMatrix out;
  if (std::holds_alternative<ZeroKernel>(spec) || std::holds_alternative<SeparableKernel>(spec)) {
    return project_kernel(spec, basis);
  }
  if (const auto* grid = std::get_if<GridKernel>(&spec)) {
    check_grid_length(*grid, basis.length(), "project_kernel");
  }
  const WeightedModes wm = weighted_modes(spec, basis);
  const std::size_t nq = wm.grid.size();
  const double ell = basis.length();
  std::vector<double> samples(nq * nq);
  for (std::size_t a = 0; a < nq; ++a) {
    for (std::size_t b = 0; b < nq; ++b) {
      samples[a * nq + b] = evaluate_kernel(spec, ell, wm.grid.points[a], wm.grid.points[b]);
    }
  }
  out.matrix.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = 0.0;
      for (std::size_t a = 0; a < nq; ++a) {
        double inner = 0.0;
        for (std::size_t b = 0; b < nq; ++b) inner += samples[a * nq + b] * wm.weighted(b, j);
        sum += wm.weighted(a, i) * inner;
      }
      out.matrix(i, j) = sum;
      out.matrix(j, i) = sum;
    }
  }
  finish_matrix(out.matrix, "project_kernel");
  out.hs_of_k = hs_norm(spec, basis);
  return out;
}

}  // namespace reference

}  // namespace nlheat
