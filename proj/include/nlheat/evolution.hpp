#pragma once

#include <Eigen/Dense>

#include "nlheat/nonlocal_kernel.hpp"
#include "nlheat/spectral_core.hpp"

namespace nlheat {

/// Exponent above which e^{-Lt} is refused rather than allowed to overflow.
inline constexpr double kBackwardExponentGuard = 700.0;

/// Default gate on the smallest eigenvalue of a restricted mass matrix that
/// is inverted (left_inverse_constant).
inline constexpr double kMassConditioningGate = 1e-14;

/// Truncated generator L = -diag(lambda) + K, exactly symmetric.
struct Generator {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd matrix;
  double hs_of_k = 0.0;

  int size() const { return static_cast<int>(matrix.rows()); }
};

Generator assemble_generator(const SpectralBasis& basis, const KernelMatrix& kmat);

/// L = Q diag(mu) Q^T with mu descending; each eigenvector has its
/// largest-magnitude entry positive.
struct SpectralDecomposition {
  Eigen::VectorXd mus;
  Eigen::MatrixXd vectors;

  int size() const { return static_cast<int>(mus.size()); }
  double top() const { return mus[0]; }
  double spread() const { return mus[0] - mus[mus.size() - 1]; }
};

SpectralDecomposition decompose(const Generator& gen);

/// e^{Lt} state for t >= 0.
Eigen::VectorXd propagate(const SpectralDecomposition& dec, const Eigen::VectorXd& state, double t);

/// e^{-Lt} state for t >= 0; refuses when t * max(spread, max|mu|) > 700.
Eigen::VectorXd propagate_backward(const SpectralDecomposition& dec, const Eigen::VectorXd& state,
                                   double t);

/// Dense e^{Lt} (t may be negative; no overflow guard).
Eigen::MatrixXd semigroup_matrix(const SpectralDecomposition& dec, double t);

/// Operator norm of e^{Lt} on the truncation: e^{mu_1 t}.
double semigroup_norm(const SpectralDecomposition& dec, double t);

struct LeftInverseResult {
  double zeta = 0.0;
  Eigen::VectorXd minimizer;  // attains zeta |v|_omega = |e^{Lt} v|_omega
};

/// Largest zeta with zeta |v|_omega <= |e^{Lt} v|_omega on the truncation.
/// Evaluated as 1 / |e^{-Lt}| in the omega-norm, which keeps full relative
/// accuracy when zeta is far below double epsilon.
LeftInverseResult left_inverse_constant(const SpectralDecomposition& dec, const RestrictedMass& mass,
                                        double t, double gate = kMassConditioningGate);

}  // namespace nlheat
