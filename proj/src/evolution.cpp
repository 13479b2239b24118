#include "nlheat/evolution.hpp"

#include <cmath>
#include <string>

#include "nlheat/errors.hpp"
#include "nlheat/format.hpp"

namespace nlheat {

Generator assemble_generator(const SpectralBasis& basis, const KernelMatrix& kmat) {
  if (kmat.size() != basis.size()) {
    throw ArgumentError("assemble_generator: kernel matrix is " + std::to_string(kmat.size()) + "x" +
                        std::to_string(kmat.size()) + " but basis has N = " + std::to_string(basis.size()));
  }
  Generator gen;
  gen.lambdas = basis.lambdas();
  gen.matrix = kmat.matrix;
  gen.matrix.diagonal() -= basis.lambdas();
  gen.hs_of_k = kmat.hs_of_k;
  return gen;
}

SpectralDecomposition decompose(const Generator& gen) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gen.matrix);
  if (solver.info() != Eigen::Success) {
    throw NumericError("decompose: symmetric eigensolver did not converge");
  }
  const int n = gen.size();
  SpectralDecomposition dec;
  dec.mus = solver.eigenvalues().reverse();
  dec.vectors = solver.eigenvectors().rowwise().reverse();
  for (int c = 0; c < n; ++c) {
    Eigen::Index imax = 0;
    dec.vectors.col(c).cwiseAbs().maxCoeff(&imax);
    if (dec.vectors(imax, c) < 0.0) dec.vectors.col(c) *= -1.0;
  }
  return dec;
}

Eigen::VectorXd propagate(const SpectralDecomposition& dec, const Eigen::VectorXd& state, double t) {
  if (state.size() != dec.size()) throw ArgumentError("propagate: state dimension mismatch");
  if (!(t >= 0.0)) throw ArgumentError("propagate: t must be >= 0 (use propagate_backward)");
  if (t == 0.0) return state;
  const Eigen::VectorXd growth = (dec.mus * t).array().exp();
  return dec.vectors * (growth.asDiagonal() * (dec.vectors.transpose() * state));
}

namespace {

void guard_backward(const SpectralDecomposition& dec, double t, const char* op) {
  const double exponent = t * std::max(dec.spread(), dec.mus.cwiseAbs().maxCoeff());
  if (exponent > kBackwardExponentGuard) {
    throw NumericError(std::string(op) + ": backward exponent " + format_double(exponent) +
                       " exceeds overflow guard " + format_double(kBackwardExponentGuard));
  }
}

}  // namespace

Eigen::VectorXd propagate_backward(const SpectralDecomposition& dec, const Eigen::VectorXd& state,
                                   double t) {
  if (state.size() != dec.size()) throw ArgumentError("propagate_backward: state dimension mismatch");
  if (!(t >= 0.0)) throw ArgumentError("propagate_backward: t must be >= 0");
  if (t == 0.0) return state;
  guard_backward(dec, t, "propagate_backward");
  const Eigen::VectorXd growth = (-dec.mus * t).array().exp();
  return dec.vectors * (growth.asDiagonal() * (dec.vectors.transpose() * state));
}

Eigen::MatrixXd semigroup_matrix(const SpectralDecomposition& dec, double t) {
  const Eigen::VectorXd growth = (dec.mus * t).array().exp();
  Eigen::MatrixXd e = dec.vectors * growth.asDiagonal() * dec.vectors.transpose();
  const Eigen::MatrixXd et = e.transpose();
  return 0.5 * (e + et);
}

double semigroup_norm(const SpectralDecomposition& dec, double t) {
  if (!(t >= 0.0)) throw ArgumentError("semigroup_norm: t must be >= 0");
  return std::exp(dec.top() * t);
}

LeftInverseResult left_inverse_constant(const SpectralDecomposition& dec, const RestrictedMass& mass,
                                        double t, double gate) {
  const int n = dec.size();
  if (mass.matrix.rows() != n) throw ArgumentError("left_inverse_constant: mass matrix dimension mismatch");
  if (!(t >= 0.0)) throw ArgumentError("left_inverse_constant: t must be >= 0");
  if (!(mass.min_eigenvalue >= gate)) {
    throw ConditioningError("left_inverse_constant: ill-conditioned control subdomain, smallest mass "
                            "eigenvalue " + format_double(mass.min_eigenvalue) + " below gate " +
                                format_double(gate),
                            mass.min_eigenvalue);
  }
  Eigen::LLT<Eigen::MatrixXd> chol(mass.matrix);
  if (chol.info() != Eigen::Success) {
    throw ConditioningError("left_inverse_constant: Cholesky of the mass matrix failed",
                            mass.min_eigenvalue);
  }
  LeftInverseResult out;
  if (t == 0.0) {
    out.zeta = 1.0;
    out.minimizer = Eigen::VectorXd::Unit(n, 0);
    return out;
  }
  guard_backward(dec, t, "left_inverse_constant");
  // With M = R^T R, zeta = 1 / sigma_max(R e^{-Lt} R^{-1}).
  const Eigen::MatrixXd back = semigroup_matrix(dec, -t);
  const Eigen::MatrixXd lower = chol.matrixL();
  const Eigen::MatrixXd linv_back = lower.triangularView<Eigen::Lower>().solve(back);  // L^{-1} B
  const Eigen::MatrixXd z = lower.transpose() * linv_back.transpose();                  // L^T B L^{-T}
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeFullU);
  const double sigma = svd.singularValues()[0];
  out.zeta = 1.0 / sigma;
  out.minimizer = lower.transpose().triangularView<Eigen::Upper>().solve(svd.matrixU().col(0));
  out.minimizer.normalize();
  return out;
}

}  // namespace nlheat
