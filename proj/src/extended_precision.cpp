// Quad-precision evaluation of restricted mass spectra. Kept in its own
// translation unit: instantiating Eigen's eigensolver on float128 is slow
// to compile.
#include <boost/multiprecision/float128.hpp>

#include <Eigen/Dense>
#include <limits>

#include "nlheat/errors.hpp"
#include "nlheat/spectral_core.hpp"

using Quad = boost::multiprecision::float128;

namespace Eigen {
template <>
struct NumTraits<Quad> : GenericNumTraits<Quad> {
  using Real = Quad;
  using NonInteger = Quad;
  using Literal = Quad;
  using Nested = Quad;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 4,
    MulCost = 8
  };
  static Real epsilon() { return std::numeric_limits<Quad>::epsilon(); }
  static Real dummy_precision() { return Real(1e-30); }
  static Real highest() { return (std::numeric_limits<Quad>::max)(); }
  static Real lowest() { return -(std::numeric_limits<Quad>::max)(); }
  static Real infinity() { return std::numeric_limits<Quad>::infinity(); }
  static Real quiet_NaN() { return std::numeric_limits<Quad>::quiet_NaN(); }
  static int digits10() { return std::numeric_limits<Quad>::digits10; }
};
}  // namespace Eigen

namespace nlheat {
namespace {

using QuadMatrix = Eigen::Matrix<Quad, Eigen::Dynamic, Eigen::Dynamic>;

QuadMatrix quad_mass(double ell, double lo, double hi, int n) {
  if (n < 1) throw ArgumentError("restricted_mass_matrix: need at least one mode");
  if (!(lo >= 0.0 && lo < hi && hi <= ell)) {
    throw ArgumentError("restricted_mass_matrix: need 0 <= lo < hi <= ell");
  }
  return restricted_mass_closed_form<Quad>(Quad(ell), Quad(lo), Quad(hi), n);
}

}  // namespace

MassEigenpair restricted_mass_min_eigenpair(double ell, double lo, double hi, int n) {
  const QuadMatrix m = quad_mass(ell, lo, hi, n);
  Eigen::SelfAdjointEigenSolver<QuadMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("restricted_mass_matrix: quad-precision eigensolver failed");
  }
  MassEigenpair pair;
  pair.value = static_cast<double>(solver.eigenvalues()(0));
  pair.vector.resize(n);
  for (int i = 0; i < n; ++i) pair.vector[i] = static_cast<double>(solver.eigenvectors()(i, 0));
  // Sign convention: largest-magnitude entry positive.
  Eigen::Index imax = 0;
  pair.vector.cwiseAbs().maxCoeff(&imax);
  if (pair.vector[imax] < 0.0) pair.vector = -pair.vector;
  return pair;
}

double restricted_mass_min_eigenvalue(double ell, double lo, double hi, int n) {
  const QuadMatrix m = quad_mass(ell, lo, hi, n);
  Eigen::SelfAdjointEigenSolver<QuadMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("restricted_mass_matrix: quad-precision eigensolver failed");
  }
  return static_cast<double>(solver.eigenvalues()(0));
}

double restricted_quadratic_form(double ell, double lo, double hi, std::span<const double> c) {
  const int n = static_cast<int>(c.size());
  const QuadMatrix m = quad_mass(ell, lo, hi, n);
  Quad sum = 0;
  for (int i = 0; i < n; ++i) {
    Quad row = 0;
    for (int j = 0; j < n; ++j) row += m(i, j) * Quad(c[j]);
    sum += Quad(c[i]) * row;
  }
  return static_cast<double>(sum);
}

}  // namespace nlheat
