#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "nlheat/evolution.hpp"
#include "nlheat/nonlocal_kernel.hpp"
#include "nlheat/spectral_core.hpp"

namespace nlheat {

/// Relative gate on lambda_min(G_T) / lambda_max(G_T) for Gramians that are
/// inverted (observability_cost, hum_control).
inline constexpr double kGramianConditioningGate = 1e-14;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Spectral observability on E_r = span{psi_j : lambda_j <= r}:
/// sum |c_j|^2 <= specobs_constant * |sum c_j psi_j|^2_omega.
struct ObsReport {
  double r = 0.0;
  int n_modes = 0;
  double c_min = 0.0;
  double specobs_constant = 0.0;
  Eigen::VectorXd witness;  // unit coefficients attaining the constant
};

ObsReport spectral_obs_constant(const SpectralBasis& basis, Interval omega, double r);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double residual = 0.0;  // Euclidean norm of the residual vector
};

/// Least-squares fit of y against x: y ~ intercept + slope * x.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// -log c_min(r) ~ C0 + C1 sqrt(r), with the linear-in-r fit for comparison.
struct SpecObsFit {
  std::vector<ObsReport> reports;
  LinearFit sqrt_fit;
  LinearFit linear_fit;
};

SpecObsFit specobs_sweep_and_fit(const SpectralBasis& basis, Interval omega,
                                 const std::vector<double>& r_list);

/// phi(s, T) = (e^{sT} - 1) / s with the cubic Taylor series for |sT| < 1e-4.
double gramian_weight(double s, double horizon);

/// G_T = integral_0^T e^{Lt} M e^{Lt} dt in closed form, symmetrized.
Eigen::MatrixXd observability_gramian(const SpectralDecomposition& dec, const RestrictedMass& mass,
                                      double horizon);

/// Throws ConditioningError unless lambda_min(G) >= gate * lambda_max(G).
/// Returns lambda_min(G).
double check_gramian_conditioning(const Eigen::MatrixXd& gramian, const char* op,
                                  double gate = kGramianConditioningGate);

struct CostReport {
  double horizon = 0.0;
  int n_used = 0;
  double kappa = 0.0;
  double gramian_min_eig = 0.0;
  Eigen::VectorXd witness;  // phi_0 maximizing |e^{LT} phi_0|^2 / phi_0^T G_T phi_0
  std::string error;        // non-empty when a sweep row failed
  bool ok() const { return error.empty(); }
};

/// Smallest kappa_T with |e^{LT} phi0|^2 <= kappa_T phi0^T G_T phi0 on the
/// truncation: the largest generalized eigenvalue of (e^{2LT}, G_T).
CostReport observability_cost(const SpectralDecomposition& dec, const RestrictedMass& mass, double horizon);

/// Fit of log kappa_T ~ a + C T^{-alpha}.
struct BlowupFit {
  std::string model;  // "inv_sqrt_T", "inv_T", or "free_alpha"
  double a = 0.0;
  double c = 0.0;
  double alpha = 0.0;
  double residual = 0.0;
  bool alpha_at_search_bound = false;
};

/// Fixed-exponent fit for a given alpha.
BlowupFit fit_blowup_fixed(const std::vector<double>& horizons, const std::vector<double>& log_kappa,
                           double alpha, std::string model);

/// alpha minimizing the residual over [alpha_lo, alpha_hi] (grid search then
/// golden-section refinement), with a and C by linear least squares.
BlowupFit fit_blowup_free(const std::vector<double>& horizons, const std::vector<double>& log_kappa,
                          double alpha_lo = 0.05, double alpha_hi = 4.0);

enum class Coupling { kFixedN, kInverseT };

struct SweepOptions {
  Coupling coupling = Coupling::kFixedN;
  int fixed_n = 16;
  int margin = 8;
  int quadrature_order = 8;
  bool parallel = true;
};

/// N(T) = floor(sqrt(1/T) ell / pi) + margin, tying the truncation to the
/// cutoff r = 1/T.
int coupled_truncation(double ell, double horizon, int margin);

struct CostSweep {
  std::vector<CostReport> rows;  // sorted by T descending
  BlowupFit sqrt_fit;
  BlowupFit inverse_fit;
  BlowupFit free_fit;
  std::string winner;  // model with the smaller residual among sqrt/inverse
};

/// One basis/projection/decomposition per horizon; rows run in parallel and
/// failures are recorded per row.
CostSweep cost_sweep(const Domain& domain, const KernelSpec& kernel, const std::vector<double>& horizons,
                     const SweepOptions& options);

/// Chain of certified factors for phi0 in E_r at one time t:
/// bound(t) = semigroup_norm(T)^2 * specobs_constant / zeta(t)^2, against the
/// extremal quotient max_{phi0 in E_r} |e^{LT} phi0|^2 / |e^{Lt} phi0|^2_omega.
struct ChainRow {
  double t = 0.0;
  double semigroup_factor = 0.0;
  double specobs_factor = 0.0;
  double zeta = 0.0;
  double bound = 0.0;            // +inf when zeta is not representable
  double extremal_quotient = 0.0;
  bool zeta_available = true;
};

std::vector<ChainRow> proof_chain(const SpectralBasis& basis, const SpectralDecomposition& dec,
                                  const RestrictedMass& mass, double horizon, double r,
                                  const std::vector<double>& times);

}  // namespace nlheat
