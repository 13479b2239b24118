#include "nlheat/spectral_core.hpp"

#include <string>

#include "nlheat/errors.hpp"

namespace nlheat {

Domain::Domain(double length, double omega_lo, double omega_hi)
    : length_(length), omega_lo_(omega_lo), omega_hi_(omega_hi) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ArgumentError("Domain: length must be positive and finite");
  }
  if (!(omega_lo >= 0.0 && omega_lo < omega_hi && omega_hi <= length)) {
    throw ArgumentError("Domain: control set must satisfy 0 <= lo < hi <= length, got (" +
                        std::to_string(omega_lo) + ", " + std::to_string(omega_hi) + ")");
  }
}

SpectralBasis::SpectralBasis(const Domain& domain, int size, int quadrature_order)
    : domain_(domain), quadrature_order_(quadrature_order) {
  if (size < 1) throw ArgumentError("build_basis: N must be >= 1, got " + std::to_string(size));
  if (quadrature_order < 1) throw ArgumentError("build_basis: quadrature order must be >= 1");
  lambdas_.resize(size);
  for (int j = 0; j < size; ++j) {
    const double k = (j + 1) * std::numbers::pi / domain.length();
    lambdas_[j] = k * k;
  }
}

int modes_below(double ell, double r) {
  if (!(r > 0.0)) return 0;
  // The small offset keeps r = lambda_n exactly on the inclusive side.
  return static_cast<int>(std::floor(std::sqrt(r) * ell / std::numbers::pi + 1e-9));
}

int SpectralBasis::modes_below(double r) const { return nlheat::modes_below(length(), r); }

SpectralBasis build_basis(const Domain& domain, int size, int quadrature_order) {
  return SpectralBasis(domain, size, quadrature_order);
}

double eval_mode(const SpectralBasis& basis, int j, double x) {
  if (j < 0 || j >= basis.size()) {
    throw ArgumentError("eval_mode: index " + std::to_string(j) + " outside [0, " +
                        std::to_string(basis.size()) + ")");
  }
  if (!(x >= 0.0 && x <= basis.length())) {
    throw ArgumentError("eval_mode: x outside [0, ell]");
  }
  return basis.mode(j, x);
}

Eigen::MatrixXd restricted_mass_matrix(const SpectralBasis& basis, double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= basis.length())) {
    throw ArgumentError("restricted_mass_matrix: need 0 <= lo < hi <= ell");
  }
  return restricted_mass_closed_form<double>(basis.length(), lo, hi, basis.size());
}

RestrictedMass make_restricted_mass(const SpectralBasis& basis, double lo, double hi) {
  RestrictedMass mass;
  mass.lo = lo;
  mass.hi = hi;
  mass.matrix = restricted_mass_matrix(basis, lo, hi);
  mass.min_eigenvalue = restricted_mass_min_eigenvalue(basis.length(), lo, hi, basis.size());
  return mass;
}

RestrictedMass make_restricted_mass(const SpectralBasis& basis) {
  return make_restricted_mass(basis, basis.domain().omega_lo(), basis.domain().omega_hi());
}

}  // namespace nlheat
