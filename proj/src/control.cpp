#include "nlheat/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nlheat/errors.hpp"
#include "nlheat/format.hpp"
#include "nlheat/quadrature.hpp"

namespace nlheat {
namespace {

enum class Side { kClosed, kLeft, kRight };

struct SamplePoint {
  double t;
  Side side;
};

bool phase_contains(const ControlPhase& ph, double t, Side side) {
  if (t > ph.t_start && t < ph.t_end) return true;
  if (t == ph.t_start) return side != Side::kLeft;
  if (t == ph.t_end) return side != Side::kRight;
  return false;
}

Eigen::VectorXd sample_at(const SpectralDecomposition& dec, const std::vector<ControlPhase>& phases, double t,
                          Side side) {
  for (const auto& ph : phases) {
    if (phase_contains(ph, t, side)) return propagate(dec, ph.multiplier, ph.t_end - t);
  }
  return Eigen::VectorXd::Zero(dec.size());
}

Eigen::VectorXd uniform_times(double horizon, int nt) {
  Eigen::VectorXd times(nt);
  for (int s = 0; s < nt; ++s) times[s] = horizon * s / (nt - 1);
  times[nt - 1] = horizon;
  return times;
}

/// Contribution at time t of the control in `ph`, in eigen coordinates.
Eigen::VectorXd phase_response(const SpectralDecomposition& dec, const Eigen::MatrixXd& w,
                               const ControlPhase& ph, double t) {
  const int n = dec.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (t <= ph.t_start) return out;
  const double stop = std::min(t, ph.t_end);
  const double len = stop - ph.t_start;
  const double span = ph.t_end - ph.t_start;
  const Eigen::VectorXd y = dec.vectors.transpose() * ph.multiplier;
  for (int a = 0; a < n; ++a) {
    double sum = 0.0;
    for (int b = 0; b < n; ++b) {
      sum += w(a, b) * y[b] * std::exp(dec.mus[b] * (span - len)) * gramian_weight(dec.mus[a] + dec.mus[b], len);
    }
    out[a] = sum * std::exp(dec.mus[a] * (t - stop));
  }
  return out;
}

}  // namespace

double fallback_ridge(const Eigen::MatrixXd& gramian) { return 1e-12 * gramian.trace() / gramian.rows(); }

ControlResult hum_control(const SpectralDecomposition& dec, const RestrictedMass& mass, const Eigen::VectorXd& u0,
                          double horizon, int nt, double ridge) {
  const int n = dec.size();
  if (u0.size() != n) throw ArgumentError("hum_control: initial state dimension mismatch");
  if (!(horizon > 0.0)) throw ArgumentError("hum_control: T must be positive");
  if (nt < 16) throw ArgumentError("hum_control: nt must be >= 16");
  if (!(ridge >= 0.0)) throw ArgumentError("hum_control: ridge must be >= 0");
  const Eigen::MatrixXd g = observability_gramian(dec, mass, horizon);
  if (ridge == 0.0) check_gramian_conditioning(g, "hum_control");

  ControlResult out;
  out.horizon = horizon;
  out.nt = nt;
  out.ridge = ridge;
  const Eigen::VectorXd free_state = propagate(dec, u0, horizon);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  if (free_state.squaredNorm() > 0.0) {
    const Eigen::MatrixXd system = g + ridge * Eigen::MatrixXd::Identity(n, n);
    Eigen::LLT<Eigen::MatrixXd> chol(system);
    if (chol.info() != Eigen::Success) {
      throw ConditioningError("hum_control: Gramian system is not positive definite; set a ridge", 0.0);
    }
    p = chol.solve(-free_state);
  }
  out.phases.push_back({0.0, horizon, p});
  out.terminal_state = free_state + g * p;
  out.cost_sq = p.dot(g * p);
  const double u0_norm = u0.norm();
  out.terminal_residual = u0_norm > 0.0 ? out.terminal_state.norm() / u0_norm : 0.0;
  out.times = uniform_times(horizon, nt);
  out.control_coeffs = sample_control(dec, out.phases, out.times);
  return out;
}

Eigen::MatrixXd sample_control(const SpectralDecomposition& dec, const std::vector<ControlPhase>& phases,
                               const Eigen::VectorXd& times) {
  Eigen::MatrixXd coeffs(times.size(), dec.size());
  for (Eigen::Index s = 0; s < times.size(); ++s) {
    Side side = Side::kClosed;
    if (s + 1 < times.size() && times[s + 1] == times[s]) side = Side::kLeft;
    if (s > 0 && times[s - 1] == times[s]) side = Side::kRight;
    coeffs.row(s) = sample_at(dec, phases, times[s], side).transpose();
  }
  return coeffs;
}

Eigen::MatrixXd controlled_trajectory(const SpectralDecomposition& dec, const RestrictedMass& mass,
                                      const Eigen::VectorXd& u0, const ControlResult& result) {
  const Eigen::MatrixXd w = dec.vectors.transpose() * mass.matrix * dec.vectors;
  Eigen::MatrixXd traj(result.times.size(), dec.size());
  for (Eigen::Index s = 0; s < result.times.size(); ++s) {
    const double t = result.times[s];
    Eigen::VectorXd eig = Eigen::VectorXd::Zero(dec.size());
    for (const auto& ph : result.phases) eig += phase_response(dec, w, ph, t);
    traj.row(s) = (propagate(dec, u0, t) + dec.vectors * eig).transpose();
  }
  return traj;
}

Simulation simulate_controlled(const SpectralDecomposition& dec, const RestrictedMass& mass,
                               const Eigen::VectorXd& u0, const Eigen::VectorXd& times,
                               const Eigen::MatrixXd& control_coeffs, int refine) {
  const int n = dec.size();
  if (u0.size() != n || control_coeffs.cols() != n || control_coeffs.rows() != times.size() ||
      mass.matrix.rows() != n) {
    throw ArgumentError("simulate_controlled: mismatched dimensions");
  }
  if (times.size() < 2) throw ArgumentError("simulate_controlled: need at least two control samples");
  if (refine < 1) throw ArgumentError("simulate_controlled: refinement factor must be >= 1");
  const GaussRule& rule = gauss_legendre_rule(4);
  const Eigen::MatrixXd forcing = control_coeffs * mass.matrix;  // rows: (M c_s)^T

  Simulation sim;
  sim.times = times;
  sim.snapshots.resize(times.size(), n);
  Eigen::VectorXd u = u0;
  sim.snapshots.row(0) = u.transpose();

  double cached_step = -1.0;
  Eigen::MatrixXd step_map;
  std::vector<Eigen::MatrixXd> node_maps(rule.nodes.size());
  for (Eigen::Index k = 0; k + 1 < times.size(); ++k) {
    const double h = times[k + 1] - times[k];
    if (h < 0.0) throw ArgumentError("simulate_controlled: sample times must be non-decreasing");
    if (h > 0.0) {
      const double dt = h / refine;
      if (dt != cached_step) {
        step_map = semigroup_matrix(dec, dt);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          node_maps[q] = semigroup_matrix(dec, dt * (1.0 - rule.nodes[q]) / 2.0);
        }
        cached_step = dt;
      }
      const Eigen::VectorXd f0 = forcing.row(k).transpose();
      const Eigen::VectorXd f1 = forcing.row(k + 1).transpose();
      for (int i = 0; i < refine; ++i) {
        Eigen::VectorXd next = step_map * u;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double local = dt * i + dt * (1.0 + rule.nodes[q]) / 2.0;
          const double theta = local / h;
          next += (0.5 * dt * rule.weights[q]) * (node_maps[q] * ((1.0 - theta) * f0 + theta * f1));
        }
        u = next;
      }
    }
    sim.snapshots.row(k + 1) = u.transpose();
  }
  sim.terminal_state = u;
  sim.terminal_norm = u.norm();
  return sim;
}

int lr_truncation(const Domain& domain, int u0_size, const LrOptions& options) {
  const double lambda1 = std::pow(std::numbers::pi / domain.length(), 2);
  const double r0 = options.r0 > 0.0 ? options.r0 : lambda1;
  const double r_last = r0 * std::pow(4.0, options.stages - 1);
  return std::max(u0_size, modes_below(domain.length(), r_last) + options.margin);
}

ControlResult lr_staged_control(const Domain& domain, const KernelSpec& kernel, const Eigen::VectorXd& u0,
                                double horizon, const LrOptions& options) {
  const int n = lr_truncation(domain, static_cast<int>(u0.size()), options);
  const SpectralBasis basis = build_basis(domain, n, options.quadrature_order);
  const SpectralDecomposition dec = decompose(assemble_generator(basis, project_kernel(kernel, basis)));
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(n);
  padded.head(u0.size()) = u0;
  return lr_staged_control(basis, dec, make_restricted_mass(basis), padded, horizon, options);
}

ControlResult lr_staged_control(const SpectralBasis& basis, const SpectralDecomposition& dec,
                                const RestrictedMass& mass, const Eigen::VectorXd& u0, double horizon,
                                const LrOptions& options) {
  const int n = dec.size();
  if (u0.size() != n) throw ArgumentError("lr_staged_control: initial state dimension mismatch");
  if (!(horizon > 0.0)) throw ArgumentError("lr_staged_control: T must be positive");
  if (options.stages < 2) throw ArgumentError("lr_staged_control: need at least 2 stages");
  if (options.nt < 16) throw ArgumentError("lr_staged_control: nt must be >= 16");
  const double r0 = options.r0 > 0.0 ? options.r0 : basis.lambda(0);
  if (!(r0 >= basis.lambda(0) * (1.0 - 1e-12))) {
    throw ArgumentError("lr_staged_control: r0 must be >= lambda_1");
  }

  ControlResult out;
  out.horizon = horizon;
  const double u0_norm = u0.norm();
  const double scale = u0_norm > 0.0 ? 1.0 / u0_norm : 0.0;
  Eigen::VectorXd u = u0;
  double t = 0.0;
  for (int k = 0; k < options.stages; ++k) {
    StageRecord rec;
    rec.k = k;
    rec.r_k = r0 * std::pow(4.0, k);
    rec.n_modes = basis.modes_below(rec.r_k);
    if (rec.n_modes > n) {
      throw ArgumentError("lr_staged_control: stage " + std::to_string(k) + " needs " +
                          std::to_string(rec.n_modes) + " modes, truncation has " + std::to_string(n));
    }
    const double half = horizon * std::ldexp(1.0, -(k + 2));
    rec.t_start = t;
    rec.t_mid = t + half;
    rec.t_end = t + 2.0 * half;

    const Eigen::MatrixXd g = observability_gramian(dec, mass, half);
    const Eigen::VectorXd drifted = propagate(dec, u, half);
    const int m = rec.n_modes;
    const Eigen::MatrixXd block = g.topLeftCorner(m, m);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    try {
      check_gramian_conditioning(block, "lr_staged_control");
    } catch (const ConditioningError& e) {
      throw ConditioningError("lr_staged_control: stage " + std::to_string(k) + ": " + e.what(), e.value());
    }
    // Least-norm solution through the pseudo-inverse of the low-mode block.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block);
    const Eigen::VectorXd& theta = eig.eigenvalues();
    const double cut = options.pinv_tolerance * theta.maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) inv[i] = theta[i] > cut ? 1.0 / theta[i] : 0.0;
    p.head(m) = -(eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * drifted.head(m))));

    u = drifted + g * p;
    rec.cost_sq = p.dot(g * p);
    rec.low_mode_residual = u.head(m).norm() * scale;
    rec.residual_after_active = u.norm() * scale;
    u = propagate(dec, u, half);
    rec.residual_after_passive = u.norm() * scale;
    out.phases.push_back({rec.t_start, rec.t_mid, p});
    out.cost_sq += rec.cost_sq;
    out.stage_log.push_back(rec);
    t = rec.t_end;
  }
  if (t > horizon * (1.0 + 1e-15)) {
    throw std::logic_error("lr_staged_control: dyadic schedule overran the horizon");
  }
  u = propagate(dec, u, horizon - t);
  out.terminal_state = u;
  out.terminal_residual = u.norm() * scale;

  // Uniform samples plus both one-sided values at every phase boundary.
  std::vector<double> grid;
  for (int s = 0; s < options.nt; ++s) grid.push_back(horizon * s / (options.nt - 1));
  grid.back() = horizon;
  for (const auto& ph : out.phases) {
    grid.push_back(ph.t_start);
    grid.push_back(ph.t_start);
    grid.push_back(ph.t_end);
    grid.push_back(ph.t_end);
  }
  std::sort(grid.begin(), grid.end());
  std::vector<double> times;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // Keep at most two copies of any time: left and right limits.
    if (times.size() >= 2 && times[times.size() - 1] == grid[i] && times[times.size() - 2] == grid[i]) continue;
    times.push_back(grid[i]);
  }
  out.times = Eigen::Map<Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
  out.nt = static_cast<int>(times.size());
  out.control_coeffs = sample_control(dec, out.phases, out.times);
  return out;
}

double control_cost(const ControlResult& result, const RestrictedMass& mass, const SpectralDecomposition& dec) {
  double total = 0.0;
  const double fastest = 2.0 * dec.mus.cwiseAbs().maxCoeff();
  for (const auto& ph : result.phases) {
    if (ph.multiplier.squaredNorm() == 0.0) continue;
    const double span = ph.t_end - ph.t_start;
    // Geometric panels towards sigma = 0, where the fast modes of
    // e^{L sigma} p live; sigma = t_end - s.
    std::vector<double> breaks{0.0};
    const int levels = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(fastest * span, 2.0)))) + 2);
    for (int l = levels; l >= 0; --l) {
      const double b = span * std::ldexp(1.0, -l);
      const double a = breaks.back();
      for (int piece = 1; piece <= 2; ++piece) breaks.push_back(a + (b - a) * piece / 2.0);
    }
    breaks.back() = span;
    const QuadratureGrid grid = composite_rule(breaks, kDefaultGaussOrder);
    for (std::size_t q = 0; q < grid.size(); ++q) {
      const Eigen::VectorXd c = propagate(dec, ph.multiplier, grid.points[q]);
      total += grid.weights[q] * c.dot(mass.matrix * c);
    }
  }
  return total;
}

}  // namespace nlheat
