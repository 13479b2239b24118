#pragma once

// Assembled truncated problem shared by the evolution, observability and
// control tests.

#include "nlheat/evolution.hpp"
#include "nlheat/nonlocal_kernel.hpp"
#include "nlheat/spectral_core.hpp"

namespace nlheat::testing {

struct Problem {
  SpectralBasis basis;
  KernelMatrix kmat;
  Generator gen;
  SpectralDecomposition dec;
  RestrictedMass mass;
};

inline Problem make_problem(const Domain& domain, const KernelSpec& kernel, int n) {
  Problem p{build_basis(domain, n), {}, {}, {}, {}};
  p.kmat = project_kernel(kernel, p.basis);
  p.gen = assemble_generator(p.basis, p.kmat);
  p.dec = decompose(p.gen);
  p.mass = make_restricted_mass(p.basis);
  return p;
}

/// Problem with a prescribed Galerkin matrix in place of a projected kernel.
inline Problem make_problem(const Domain& domain, const Eigen::MatrixXd& k, double hs) {
  Problem p{build_basis(domain, static_cast<int>(k.rows())), {k, hs}, {}, {}, {}};
  p.gen = assemble_generator(p.basis, p.kmat);
  p.dec = decompose(p.gen);
  p.mass = make_restricted_mass(p.basis);
  return p;
}

/// |v|_omega = sqrt(v^T M v).
inline double omega_norm(const RestrictedMass& mass, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(mass.matrix * v)));
}

}  // namespace nlheat::testing
