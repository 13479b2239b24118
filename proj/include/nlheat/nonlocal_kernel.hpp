#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nlheat/spectral_core.hpp"

namespace nlheat {

struct ZeroKernel {};

/// k(x, xi) = (g(x) h(xi) + h(x) g(xi)) / 2 with g, h given by their sine
/// coefficients. Symmetric by construction; g = h gives k = g(x) g(xi).
struct SeparableKernel {
  std::vector<double> g;
  std::vector<double> h;
};

/// k(x, xi) = amplitude * exp(-(x - xi)^2 / (2 width^2)).
struct GaussianKernel {
  double amplitude = 1.0;
  double width = 0.2;
};

/// Samples on the cell midpoints m = (i + 1/2) ell / n of a uniform n x n
/// grid, row-major with row i at x-midpoint i. Evaluated by bilinear
/// interpolation between midpoints, nearest value in the half-cell margins.
struct GridKernel {
  int n = 0;
  double length = 0.0;
  std::vector<double> samples;

  double sample(int i, int j) const { return samples[static_cast<std::size_t>(i) * n + j]; }
  double midpoint(int i) const { return (i + 0.5) * length / n; }
  double operator()(double x, double xi) const;
};

using KernelSpec = std::variant<ZeroKernel, SeparableKernel, GaussianKernel, GridKernel>;

/// Pointwise k(x, xi) on (0, ell)^2. `ell` fixes the sine basis behind
/// separable kernels; grid kernels carry their own length.
double evaluate_kernel(const KernelSpec& spec, double ell, double x, double xi);

/// Short name of the variant: zero, separable, gaussian, grid.
std::string kernel_type_name(const KernelSpec& spec);

/// Inline descriptions ("zero", "gaussian amplitude=5 width=0.2",
/// "separable g=1,0 h=0,1", "grid file=path") or a path to a grid file.
KernelSpec load_kernel(std::string_view source);
KernelSpec parse_inline_kernel(std::string_view text);

/// Grid file: header `n ell`, then n rows of n samples; `#` starts a comment
/// line. Errors carry the 1-based line number.
GridKernel read_grid_kernel(std::istream& in);
GridKernel read_grid_kernel_file(const std::string& path);
void write_grid_kernel(std::ostream& out, const GridKernel& grid);

/// Tabulates f on the midpoint grid.
GridKernel sample_grid_kernel(const std::function<double(double, double)>& f, int n, double ell);

/// sup over the 33 x 33 lattice x_a = a ell / 32 of |k(x, xi) - k(xi, x)|.
double check_symmetry(const KernelSpec& spec, const SpectralBasis& basis);

/// Throws ArgumentError when check_symmetry exceeds tol. Non-symmetric grid
/// kernels are rejected, never repaired.
void require_symmetric(const KernelSpec& spec, const SpectralBasis& basis, double tol);

/// Galerkin matrix K[i][j] = integral of k(x, xi) psi_i(x) psi_j(xi).
struct KernelMatrix {
  Eigen::MatrixXd matrix;
  double hs_of_k = 0.0;

  int size() const { return static_cast<int>(matrix.rows()); }
  double frobenius() const { return matrix.norm(); }
  double spectral_radius() const;
};

/// Parallel projection: samples the kernel on the tensor quadrature grid with
/// OpenMP and contracts against the basis. Closed form for zero/separable.
KernelMatrix project_kernel(const KernelSpec& spec, const SpectralBasis& basis);

/// L2(Omega x Omega) norm of k: closed form for zero/separable, tensor
/// Gauss-Legendre quadrature for gaussian/grid.
double hs_norm(const KernelSpec& spec, const SpectralBasis& basis);

/// Panel breakpoints used for tensor quadrature of the kernel against modes
/// up to `highest_mode` (0 means the kernel alone, as in hs_norm).
std::vector<double> kernel_panel_breaks(const KernelSpec& spec, double ell, int highest_mode);

namespace reference {

/// Serial entry-by-entry projection on the same quadrature grid as
/// project_kernel. Kept for testing and benchmarking.
KernelMatrix project_kernel_serial(const KernelSpec& spec, const SpectralBasis& basis);

}  // namespace reference

}  // namespace nlheat
