#include "nlheat/observability.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <set>
#include <string>

#include "nlheat/errors.hpp"
#include "nlheat/format.hpp"
#include "nlheat/parallel.hpp"

namespace nlheat {

ObsReport spectral_obs_constant(const SpectralBasis& basis, Interval omega, double r) {
  if (!(r >= basis.lambda(0) * (1.0 - 1e-12))) {
    throw ArgumentError("spectral_obs_constant: empty window, r = " + format_double(r) +
                        " is below lambda_1 = " + format_double(basis.lambda(0)));
  }
  const int n = basis.modes_below(r);
  if (n > basis.size()) {
    throw ArgumentError("spectral_obs_constant: cutoff r = " + format_double(r) + " needs " +
                        std::to_string(n) + " modes but the basis has N = " + std::to_string(basis.size()));
  }
  const MassEigenpair pair = restricted_mass_min_eigenpair(basis.length(), omega.lo, omega.hi, n);
  if (!(pair.value > 0.0)) {
    throw NumericError("spectral_obs_constant: smallest restricted mass eigenvalue " +
                       format_double(pair.value) + " is not positive");
  }
  ObsReport rep;
  rep.r = r;
  rep.n_modes = n;
  rep.c_min = pair.value;
  rep.specobs_constant = 1.0 / pair.value;
  rep.witness = pair.vector;
  return rep;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x[i];
    rhs[i] = y[i];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  LinearFit fit;
  fit.intercept = coef[0];
  fit.slope = coef[1];
  fit.residual = (design * coef - rhs).norm();
  return fit;
}

SpecObsFit specobs_sweep_and_fit(const SpectralBasis& basis, Interval omega,
                                 const std::vector<double>& r_list) {
  if (r_list.size() < 5) throw ArgumentError("specobs_sweep_and_fit: need at least 5 cutoffs");
  const auto [lo, hi] = std::minmax_element(r_list.begin(), r_list.end());
  if (!(*lo > 0.0) || *hi / *lo < 16.0 * (1.0 - 1e-12)) {
    throw ArgumentError("specobs_sweep_and_fit: cutoffs must span a factor of at least 16");
  }
  SpecObsFit out;
  out.reports.resize(r_list.size());
  const auto count = static_cast<std::ptrdiff_t>(r_list.size());
  // Exceptions cannot cross the parallel region; the lowest failing index is
  // rethrown so the reported error does not depend on scheduling.
  std::vector<std::exception_ptr> failures(r_list.size());
#pragma omp parallel for num_threads(worker_count()) schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out.reports[i] = spectral_obs_constant(basis, omega, r_list[i]);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  std::set<int> distinct;
  std::vector<double> sqrt_r;
  std::vector<double> lin_r;
  std::vector<double> y;
  for (const auto& rep : out.reports) {
    distinct.insert(rep.n_modes);
    sqrt_r.push_back(std::sqrt(rep.r));
    lin_r.push_back(rep.r);
    y.push_back(-std::log(rep.c_min));
  }
  if (distinct.size() < 2) {
    throw ArgumentError("specobs_sweep_and_fit: insufficient data, fewer than 2 distinct mode counts");
  }
  out.sqrt_fit = fit_line(sqrt_r, y);
  out.linear_fit = fit_line(lin_r, y);
  return out;
}

double gramian_weight(double s, double horizon) {
  const double x = s * horizon;
  if (std::abs(x) < 1e-4) return horizon * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0);
  return std::expm1(x) / s;
}

Eigen::MatrixXd observability_gramian(const SpectralDecomposition& dec, const RestrictedMass& mass,
                                      double horizon) {
  if (!(horizon > 0.0)) throw ArgumentError("observability_gramian: T must be positive");
  const int n = dec.size();
  if (mass.matrix.rows() != n) throw ArgumentError("observability_gramian: mass matrix dimension mismatch");
  const Eigen::MatrixXd w = dec.vectors.transpose() * mass.matrix * dec.vectors;
  Eigen::MatrixXd weighted(n, n);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) weighted(a, b) = w(a, b) * gramian_weight(dec.mus[a] + dec.mus[b], horizon);
  }
  Eigen::MatrixXd g = dec.vectors * weighted * dec.vectors.transpose();
  const Eigen::MatrixXd gt = g.transpose();
  return 0.5 * (g + gt);
}

double check_gramian_conditioning(const Eigen::MatrixXd& gramian, const char* op, double gate) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gramian, Eigen::EigenvaluesOnly);
  const double lmin = solver.eigenvalues()[0];
  const double lmax = solver.eigenvalues()[solver.eigenvalues().size() - 1];
  if (!(lmax > 0.0) || !(lmin >= gate * lmax)) {
    throw ConditioningError(std::string(op) + ": ill-conditioned Gramian, lambda_min = " + format_double(lmin) +
                                ", lambda_max = " + format_double(lmax) + " (gate " + format_double(gate) +
                                " relative); shrink the control subdomain truncation or set a ridge",
                            lmin);
  }
  return lmin;
}

CostReport observability_cost(const SpectralDecomposition& dec, const RestrictedMass& mass, double horizon) {
  const Eigen::MatrixXd g = observability_gramian(dec, mass, horizon);
  CostReport rep;
  rep.horizon = horizon;
  rep.n_used = dec.size();
  rep.gramian_min_eig = check_gramian_conditioning(g, "observability_cost");
  const Eigen::MatrixXd e2 = semigroup_matrix(dec, 2.0 * horizon);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(e2, g);
  if (solver.info() != Eigen::Success) {
    throw ConditioningError("observability_cost: generalized eigensolver failed", rep.gramian_min_eig);
  }
  const Eigen::Index top = solver.eigenvalues().size() - 1;
  rep.kappa = solver.eigenvalues()[top];
  rep.witness = solver.eigenvectors().col(top).normalized();
  Eigen::Index imax = 0;
  rep.witness.cwiseAbs().maxCoeff(&imax);
  if (rep.witness[imax] < 0.0) rep.witness = -rep.witness;
  if (!std::isfinite(rep.kappa) || !(rep.kappa > 0.0)) {
    throw NumericError("observability_cost: non-positive or non-finite kappa_T " + format_double(rep.kappa));
  }
  return rep;
}

BlowupFit fit_blowup_fixed(const std::vector<double>& horizons, const std::vector<double>& log_kappa,
                           double alpha, std::string model) {
  std::vector<double> x(horizons.size());
  for (std::size_t i = 0; i < horizons.size(); ++i) x[i] = std::pow(horizons[i], -alpha);
  const LinearFit line = fit_line(x, log_kappa);
  BlowupFit fit;
  fit.model = std::move(model);
  fit.a = line.intercept;
  fit.c = line.slope;
  fit.alpha = alpha;
  fit.residual = line.residual;
  return fit;
}

BlowupFit fit_blowup_free(const std::vector<double>& horizons, const std::vector<double>& log_kappa,
                          double alpha_lo, double alpha_hi) {
  auto residual = [&](double alpha) { return fit_blowup_fixed(horizons, log_kappa, alpha, "").residual; };
  constexpr double kStep = 0.01;
  double best = alpha_lo;
  double best_res = residual(alpha_lo);
  for (double a = alpha_lo + kStep; a <= alpha_hi + 1e-12; a += kStep) {
    const double res = residual(a);
    if (res < best_res) {
      best_res = res;
      best = a;
    }
  }
  // Golden-section refinement on the bracketing grid cell.
  double lo = std::max(alpha_lo, best - kStep);
  double hi = std::min(alpha_hi, best + kStep);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = residual(x1);
  double f2 = residual(x2);
  for (int iter = 0; iter < 60; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = residual(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = residual(x2);
    }
  }
  double alpha = 0.5 * (lo + hi);
  if (residual(best) < residual(alpha)) alpha = best;
  BlowupFit fit = fit_blowup_fixed(horizons, log_kappa, alpha, "free_alpha");
  fit.alpha_at_search_bound = alpha - alpha_lo < 1e-6 || alpha_hi - alpha < 1e-6;
  return fit;
}

int coupled_truncation(double ell, double horizon, int margin) {
  return static_cast<int>(std::floor(std::sqrt(1.0 / horizon) * ell / std::numbers::pi)) + margin;
}

CostSweep cost_sweep(const Domain& domain, const KernelSpec& kernel, const std::vector<double>& horizons,
                     const SweepOptions& options) {
  std::vector<double> sorted = horizons;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  CostSweep out;
  out.rows.resize(sorted.size());
  const auto count = static_cast<std::ptrdiff_t>(sorted.size());
  const int workers = options.parallel ? worker_count() : 1;
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    CostReport& row = out.rows[i];
    row.horizon = sorted[i];
    try {
      if (!(sorted[i] > 0.0)) throw ArgumentError("cost_sweep: horizons must be positive");
      const int n = options.coupling == Coupling::kFixedN
                        ? options.fixed_n
                        : coupled_truncation(domain.length(), sorted[i], options.margin);
      row.n_used = n;
      const SpectralBasis basis = build_basis(domain, n, options.quadrature_order);
      const SpectralDecomposition dec = decompose(assemble_generator(basis, project_kernel(kernel, basis)));
      row = observability_cost(dec, make_restricted_mass(basis), sorted[i]);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  std::vector<double> ts;
  std::vector<double> logs;
  for (const auto& row : out.rows) {
    if (row.ok()) {
      ts.push_back(row.horizon);
      logs.push_back(std::log(row.kappa));
    }
  }
  if (ts.size() >= 3) {
    out.sqrt_fit = fit_blowup_fixed(ts, logs, 0.5, "inv_sqrt_T");
    out.inverse_fit = fit_blowup_fixed(ts, logs, 1.0, "inv_T");
    out.free_fit = fit_blowup_free(ts, logs);
    out.winner = out.sqrt_fit.residual <= out.inverse_fit.residual ? out.sqrt_fit.model : out.inverse_fit.model;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.sqrt_fit = {"inv_sqrt_T", nan, nan, 0.5, nan, false};
    out.inverse_fit = {"inv_T", nan, nan, 1.0, nan, false};
    out.free_fit = {"free_alpha", nan, nan, nan, nan, false};
    out.winner = "insufficient_data";
  }
  return out;
}

std::vector<ChainRow> proof_chain(const SpectralBasis& basis, const SpectralDecomposition& dec,
                                  const RestrictedMass& mass, double horizon, double r,
                                  const std::vector<double>& times) {
  const ObsReport obs = spectral_obs_constant(basis, {mass.lo, mass.hi}, r);
  const int n = obs.n_modes;
  const double sg = semigroup_norm(dec, horizon);
  const Eigen::MatrixXd e_final = semigroup_matrix(dec, horizon);
  const Eigen::MatrixXd final_block = e_final.leftCols(n);  // e^{LT} P
  const Eigen::MatrixXd lhs = final_block.transpose() * final_block;
  std::vector<ChainRow> rows;
  for (double t : times) {
    ChainRow row;
    row.t = t;
    row.semigroup_factor = sg * sg;
    row.specobs_factor = obs.specobs_constant;
    try {
      row.zeta = left_inverse_constant(dec, mass, t).zeta;
      row.bound = row.semigroup_factor * row.specobs_factor / (row.zeta * row.zeta);
    } catch (const NumericError&) {
      row.zeta_available = false;
      row.zeta = 0.0;
      row.bound = std::numeric_limits<double>::infinity();
    }
    const Eigen::MatrixXd block = semigroup_matrix(dec, t).leftCols(n);  // e^{Lt} P
    const Eigen::MatrixXd rhs = block.transpose() * mass.matrix * block;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(lhs, rhs);
    row.extremal_quotient = solver.info() == Eigen::Success ? solver.eigenvalues().maxCoeff()
                                                            : std::numeric_limits<double>::infinity();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nlheat
