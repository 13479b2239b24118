#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <span>

namespace nlheat {

/// Interval (0, length) with a control subinterval (omega_lo, omega_hi).
class Domain {
 public:
  /// Validates 0 <= lo < hi <= length and length > 0.
  Domain(double length, double omega_lo, double omega_hi);

  double length() const { return length_; }
  double omega_lo() const { return omega_lo_; }
  double omega_hi() const { return omega_hi_; }
  double omega_measure() const { return omega_hi_ - omega_lo_; }

  /// True when the control set is not compactly contained (touches 0 or ell).
  bool omega_touches_boundary() const { return omega_lo_ == 0.0 || omega_hi_ == length_; }
  bool omega_is_whole() const { return omega_lo_ == 0.0 && omega_hi_ == length_; }

 private:
  double length_;
  double omega_lo_;
  double omega_hi_;
};

/// First N Dirichlet eigenpairs of -d^2/dx^2 on (0, ell):
/// lambda_j = ((j+1) pi / ell)^2, psi_j = sqrt(2/ell) sin((j+1) pi x / ell).
class SpectralBasis {
 public:
  SpectralBasis(const Domain& domain, int size, int quadrature_order);

  const Domain& domain() const { return domain_; }
  double length() const { return domain_.length(); }
  int size() const { return static_cast<int>(lambdas_.size()); }
  int quadrature_order() const { return quadrature_order_; }
  const Eigen::VectorXd& lambdas() const { return lambdas_; }
  double lambda(int j) const { return lambdas_[j]; }

  double wavenumber(int j) const { return (j + 1) * std::numbers::pi / domain_.length(); }

  /// psi_j(x) without range checks; see eval_mode for the checked version.
  double mode(int j, double x) const {
    return std::sqrt(2.0 / domain_.length()) * std::sin(wavenumber(j) * x);
  }

  /// Number of modes with lambda_j <= r, i.e. floor(sqrt(r) ell / pi).
  int modes_below(double r) const;

 private:
  Domain domain_;
  Eigen::VectorXd lambdas_;
  int quadrature_order_;
};

SpectralBasis build_basis(const Domain& domain, int size, int quadrature_order = 8);

/// Checked psi_j(x) for 0 <= j < N and 0 <= x <= ell.
double eval_mode(const SpectralBasis& basis, int j, double x);

/// Mode count floor(sqrt(r) ell / pi) for an interval of length ell.
int modes_below(double ell, double r);

/// M[i][j] = integral over (lo, hi) of psi_i psi_j, from the closed-form
/// antiderivative of sine products. `n` leading modes.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> restricted_mass_closed_form(
    Scalar ell, Scalar lo, Scalar hi, int n) {
  using std::acos;
  using std::cos;
  using std::sin;
  const Scalar pi = acos(Scalar(-1));
  const Scalar mid = (hi + lo) / 2;
  const Scalar half = (hi - lo) / 2;
  // sin(a hi) - sin(a lo) without cancellation for short intervals.
  auto sin_diff = [&](Scalar a) { return 2 * cos(a * mid) * sin(a * half); };
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(n, n);
  for (int i = 0; i < n; ++i) {
    const Scalar p = Scalar(i + 1) * pi / ell;
    m(i, i) = ((hi - lo) - sin_diff(2 * p) / (2 * p)) / ell;
    for (int j = 0; j < i; ++j) {
      const Scalar q = Scalar(j + 1) * pi / ell;
      const Scalar v = (sin_diff(p - q) / (p - q) - sin_diff(p + q) / (p + q)) / ell;
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return m;
}

Eigen::MatrixXd restricted_mass_matrix(const SpectralBasis& basis, double lo, double hi);

/// Restricted mass matrix bundled with its smallest eigenvalue, which is
/// computed in quad precision: for small control sets it falls far below
/// double epsilon long before N reaches 32.
struct RestrictedMass {
  double lo = 0.0;
  double hi = 0.0;
  Eigen::MatrixXd matrix;
  double min_eigenvalue = 0.0;
};

RestrictedMass make_restricted_mass(const SpectralBasis& basis, double lo, double hi);
RestrictedMass make_restricted_mass(const SpectralBasis& basis);  // over omega

/// Smallest eigenvalue of the leading n x n block, in quad precision.
double restricted_mass_min_eigenvalue(double ell, double lo, double hi, int n);

/// Smallest eigenpair of the leading n x n block, in quad precision. The
/// eigenvector is unit-norm and rounded to double.
struct MassEigenpair {
  double value = 0.0;
  Eigen::VectorXd vector;
};
MassEigenpair restricted_mass_min_eigenpair(double ell, double lo, double hi, int n);

/// c^T M c evaluated in quad precision; accurate even when the value is far
/// below double epsilon relative to |c|^2.
double restricted_quadratic_form(double ell, double lo, double hi, std::span<const double> c);

}  // namespace nlheat
