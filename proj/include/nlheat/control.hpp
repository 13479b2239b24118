#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nlheat/evolution.hpp"
#include "nlheat/nonlocal_kernel.hpp"
#include "nlheat/observability.hpp"
#include "nlheat/spectral_core.hpp"

namespace nlheat {

/// One stage of the staged (Lebeau-Robbiano) construction. Residuals are
/// |u| / |u0| at the end of the active and passive halves.
struct StageRecord {
  int k = 0;
  double r_k = 0.0;
  int n_modes = 0;
  double t_start = 0.0;
  double t_mid = 0.0;
  double t_end = 0.0;
  double cost_sq = 0.0;
  double low_mode_residual = 0.0;  // |P_k u(t_mid)| / |u0|
  double residual_after_active = 0.0;
  double residual_after_passive = 0.0;
};

/// Active phase of one control: on [t_start, t_end] the control has spectral
/// coefficients e^{L (t_end - s)} multiplier.
struct ControlPhase {
  double t_start = 0.0;
  double t_end = 0.0;
  Eigen::VectorXd multiplier;
};

struct ControlResult {
  double horizon = 0.0;
  int nt = 0;
  std::vector<ControlPhase> phases;   // one for HUM, one per stage for LR
  Eigen::VectorXd times;              // uniform grid of nt samples on [0, T]
  Eigen::MatrixXd control_coeffs;     // nt x N, row s = coefficients at times[s]
  double cost_sq = 0.0;               // |f|^2 in L2(0, T; omega)
  double ridge = 0.0;
  Eigen::VectorXd terminal_state;
  double terminal_residual = 0.0;     // |u(T)| / |u0|, 0 when u0 = 0
  std::vector<StageRecord> stage_log;

  const Eigen::VectorXd& multiplier() const { return phases.front().multiplier; }
};

/// Default ridge used when the caller opts into the fallback:
/// 1e-12 trace(G_T) / N.
double fallback_ridge(const Eigen::MatrixXd& gramian);

/// Minimum-energy null control: (G_T + ridge I) p = -e^{LT} u0, with the
/// terminal state e^{LT} u0 + G_T p in closed form.
ControlResult hum_control(const SpectralDecomposition& dec, const RestrictedMass& mass,
                          const Eigen::VectorXd& u0, double horizon, int nt, double ridge = 0.0);

/// Control coefficients sampled at `times` from the phases of a result.
Eigen::MatrixXd sample_control(const SpectralDecomposition& dec, const std::vector<ControlPhase>& phases,
                               const Eigen::VectorXd& times);

/// State trajectory u(t) under the closed-form control at the sample times.
Eigen::MatrixXd controlled_trajectory(const SpectralDecomposition& dec, const RestrictedMass& mass,
                                      const Eigen::VectorXd& u0, const ControlResult& result);

struct Simulation {
  Eigen::VectorXd times;       // the control sample times
  Eigen::MatrixXd snapshots;   // nt x N, state at each sample time
  Eigen::VectorXd terminal_state;
  double terminal_norm = 0.0;
};

/// Integrates u' = L u + M f(t) with exact exponential steps on a grid of
/// (nt - 1) * refine steps and order-4 Gauss source quadrature per step; f is
/// the piecewise-linear interpolant of the sampled control. Independent of
/// the Gramian closed form.
Simulation simulate_controlled(const SpectralDecomposition& dec, const RestrictedMass& mass,
                               const Eigen::VectorXd& u0, const Eigen::VectorXd& times,
                               const Eigen::MatrixXd& control_coeffs, int refine);

struct LrOptions {
  int stages = 4;
  double r0 = 0.0;     // 0 means lambda_1
  int margin = 8;
  int nt = 257;
  int quadrature_order = 8;
  double pinv_tolerance = 1e-15;
};

/// Modes used by the staged construction: enough for the last cutoff
/// r0 4^{S-1} plus the margin, and for every coefficient of u0.
int lr_truncation(const Domain& domain, int u0_size, const LrOptions& options);

/// Staged construction on a dyadic schedule: stage k spans T 2^{-(k+1)}, its
/// first half drives the modes with lambda_j <= r0 4^k to zero, its second
/// half is free decay.
ControlResult lr_staged_control(const Domain& domain, const KernelSpec& kernel, const Eigen::VectorXd& u0,
                                double horizon, const LrOptions& options = {});

/// Same, on an already assembled problem.
ControlResult lr_staged_control(const SpectralBasis& basis, const SpectralDecomposition& dec,
                                const RestrictedMass& mass, const Eigen::VectorXd& u0, double horizon,
                                const LrOptions& options = {});

/// |f|^2 recomputed by time quadrature of c(s)^T M c(s) over every phase.
double control_cost(const ControlResult& result, const RestrictedMass& mass, const SpectralDecomposition& dec);

}  // namespace nlheat
