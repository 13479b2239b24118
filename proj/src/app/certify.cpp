#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "nlheat/app.hpp"
#include "nlheat/control.hpp"
#include "nlheat/errors.hpp"
#include "nlheat/evolution.hpp"
#include "nlheat/observability.hpp"
#include "nlheat/quadrature.hpp"

namespace nlheat {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Suite {
 public:
  explicit Suite(std::uint64_t seed) : rng_(seed) {}

  /// Passes when value <= threshold.
  void at_most(const std::string& name, double value, double threshold) {
    rows_.push_back({name, value <= threshold, value, threshold, {}});
  }
  void at_least(const std::string& name, double value, double threshold) {
    rows_.push_back({name, value >= threshold, value, threshold, {}});
  }
  void skip(const std::string& name, double threshold, const std::string& why) {
    rows_.push_back({name, false, kNaN, threshold, why});
  }

  Eigen::VectorXd normal(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = dist_(rng_);
    return v;
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  std::vector<CheckRow> take() { return std::move(rows_); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_;
  std::vector<CheckRow> rows_;
};

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

double omega_norm_sq(const SpectralBasis& basis, const RestrictedMass& mass, const Eigen::VectorXd& c) {
  return restricted_quadratic_form(basis.length(), mass.lo, mass.hi, std::span<const double>(c.data(), c.size()));
}

void spectral_checks(Suite& s, const ExperimentConfig& cfg, const SpectralBasis& basis, const RestrictedMass& mass) {
  const double ell = basis.length();
  const double pi = std::numbers::pi;
  double exact = 0.0;
  for (int j = 0; j < basis.size(); ++j) {
    const double w = (j + 1) * pi / ell;
    exact = std::max(exact, std::abs(basis.lambda(j) - w * w));
  }
  s.at_most("spectral.eigenvalue_exactness", exact, 0.0);

  double norm_err = 0.0;
  for (int j = 0; j < basis.size(); ++j) {
    const double v = gauss_quadrature([&](double x) { return basis.mode(j, x) * basis.mode(j, x); }, 0.0, ell,
                                      default_panel_count(0.0, ell, ell, 2 * (j + 1)), 8);
    norm_err = std::max(norm_err, std::abs(v - 1.0));
  }
  s.at_most("spectral.normalization", norm_err, 1e-12);

  const int ng = std::min(basis.size(), 16);
  const SpectralBasis small = build_basis(basis.domain(), ng, basis.quadrature_order());
  double gram = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    double lo = s.uniform(0.0, ell);
    double hi = s.uniform(0.0, ell);
    if (lo > hi) std::swap(lo, hi);
    if (hi - lo < 1e-3 * ell) hi = std::min(ell, lo + 1e-3 * ell);
    const Eigen::MatrixXd m = restricted_mass_matrix(small, lo, hi);
    const int panels = default_panel_count(lo, hi, ell, 2 * ng);
    for (int i = 0; i < ng; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double q = gauss_quadrature([&](double x) { return small.mode(i, x) * small.mode(j, x); }, lo, hi,
                                          panels, 8);
        gram = std::max(gram, std::abs(q - m(i, j)));
      }
    }
  }
  s.at_most("spectral.gram_consistency", gram, 1e-10);

  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mass.matrix, Eigen::EigenvaluesOnly).eigenvalues();
  s.at_most("spectral.mass_spectrum_bound", std::max({0.0, -ev[0], ev[ev.size() - 1] - 1.0}), 1e-12);

  const Eigen::MatrixXd whole = restricted_mass_matrix(basis, 0.0, ell);
  s.at_most("spectral.whole_domain_identity", max_abs(whole - Eigen::MatrixXd::Identity(basis.size(), basis.size())),
            1e-14);

  const double quarter = (cfg.omega_hi - cfg.omega_lo) / 4.0;
  const Eigen::MatrixXd inner = restricted_mass_matrix(basis, cfg.omega_lo + quarter, cfg.omega_hi - quarter);
  double mono = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd c = s.normal(basis.size());
    mono = std::max(mono, c.dot(inner * c) - c.dot(mass.matrix * c));
  }
  s.at_most("spectral.monotonicity", mono, 1e-12);
}

void kernel_checks(Suite& s, const ExperimentConfig& cfg, const SpectralBasis& basis, const KernelSpec& kernel) {
  s.at_most("kernel.symmetry_defect", check_symmetry(kernel, basis), cfg.symmetry_tol);
  double ratio = 0.0;
  double radius_excess = -std::numeric_limits<double>::infinity();
  double drop = 0.0;
  double prev = 0.0;
  for (int n : {4, 8, 16, 32}) {
    const SpectralBasis b = build_basis(basis.domain(), n, basis.quadrature_order());
    const KernelMatrix k = project_kernel(kernel, b);
    const double frob = k.frobenius();
    if (k.hs_of_k > 0.0) ratio = std::max(ratio, frob / (k.hs_of_k * (1.0 + 1e-8)));
    else ratio = std::max(ratio, frob > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    radius_excess = std::max(radius_excess, k.spectral_radius() - frob);
    drop = std::max(drop, prev - frob);
    prev = frob;
  }
  s.at_most("kernel.hs_domination", ratio, 1.0);
  s.at_most("kernel.radius_below_frobenius", radius_excess, 1e-12 * std::max(1.0, prev));
  s.at_most("kernel.truncation_monotone", drop, 1e-12 * std::max(1.0, prev));
}

void evolution_checks(Suite& s, const ExperimentConfig& cfg, const SpectralBasis& basis, const KernelMatrix& kmat,
                      const SpectralDecomposition& dec, const RestrictedMass& mass) {
  const int n = basis.size();
  const Generator gen = assemble_generator(basis, kmat);
  s.at_most("evolution.orthogonality",
            max_abs(dec.vectors.transpose() * dec.vectors - Eigen::MatrixXd::Identity(n, n)), 1e-10);
  s.at_most("evolution.reconstruction",
            max_abs(dec.vectors * dec.mus.asDiagonal() * dec.vectors.transpose() - gen.matrix),
            1e-9 * (1.0 + max_abs(gen.matrix)));
  double weyl = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) weyl = std::max(weyl, std::abs(dec.mus[j] + basis.lambda(j)) - kmat.frobenius());
  s.at_most("evolution.weyl_bound", weyl, 1e-10);

  const Eigen::VectorXd v = s.normal(n);
  double law = 0.0;
  for (double a : {0.01, 0.1, 1.0}) {
    for (double b : {0.01, 0.1, 1.0}) {
      const Eigen::VectorXd joint = propagate(dec, v, a + b);
      const Eigen::VectorXd split = propagate(dec, propagate(dec, v, a), b);
      law = std::max(law, (joint - split).norm() / joint.norm());
    }
  }
  s.at_most("evolution.semigroup_law", law, 1e-9);

  double sem = 0.0;
  for (int i = 1; i <= 50; ++i) {
    const double t = 5.0 * i / 50.0;
    sem = std::max(sem, semigroup_norm(dec, t) / std::exp((-basis.lambda(0) + kmat.hs_of_k) * t));
  }
  s.at_most("evolution.sem_est", sem, 1.0 + 1e-10);

  // The round trip loses about eps * e^{t spread} in double precision, so
  // the 1e-8 check runs where that is attainable and the long-time check is
  // scaled by the conditioning.
  const double spread = std::max(dec.spread(), 1e-300);
  const double tb = std::min(0.05, 15.0 / spread);
  const Eigen::VectorXd back = propagate(dec, propagate_backward(dec, v, tb), tb);
  s.at_most("evolution.backward_roundtrip", (back - v).norm() / v.norm(), 1e-8);
  if (dec.spread() > 0.0) {
    const double tl = 30.0 / spread;
    const Eigen::VectorXd back_long = propagate(dec, propagate_backward(dec, v, tl), tl);
    s.at_most("evolution.backward_roundtrip_conditioned",
              (back_long - v).norm() / v.norm() / (std::numeric_limits<double>::epsilon() * std::exp(tl * spread)),
              1.0);
  } else {
    s.skip("evolution.backward_roundtrip_conditioned", 1.0, "single eigenvalue, the round trip is exact");
  }

  if (!(mass.min_eigenvalue >= cfg.conditioning_gate)) {
    const std::string why = "restricted mass matrix below the conditioning gate";
    s.skip("evolution.zeta_at_zero", 0.0, why);
    s.skip("evolution.zeta_positive", 0.0, why);
    s.skip("evolution.sem_inv", 1e-10, why);
    return;
  }
  s.at_most("evolution.zeta_at_zero", std::abs(left_inverse_constant(dec, mass, 0.0).zeta - 1.0), 0.0);
  double zmin = std::numeric_limits<double>::infinity();
  double inv = -std::numeric_limits<double>::infinity();
  for (double t : cfg.times) {
    LeftInverseResult z;
    try {
      z = left_inverse_constant(dec, mass, t, cfg.conditioning_gate);
    } catch (const NumericError&) {
      continue;  // beyond the backward overflow guard
    }
    zmin = std::min(zmin, z.zeta);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd u = s.normal(n);
      const Eigen::VectorXd et = propagate(dec, u, t);
      inv = std::max(inv, z.zeta * std::sqrt(u.dot(mass.matrix * u)) - std::sqrt(et.dot(mass.matrix * et)));
    }
  }
  s.at_least("evolution.zeta_positive", zmin, std::numeric_limits<double>::min());
  s.at_most("evolution.sem_inv", inv, 1e-10);
}

void observability_checks(Suite& s, const ExperimentConfig& cfg, const SpectralBasis& basis,
                          const KernelSpec& kernel, const SpectralDecomposition& dec, const RestrictedMass& mass) {
  const int n = basis.size();
  // Beyond ~24 modes c_min drops below eps^2 |c|^2 and the rounded witness
  // no longer represents the minimizer to 1e-8.
  const double r = cfg.obs_r > 0.0 ? cfg.obs_r : basis.lambda(std::min(n, 24) - 1);
  const ObsReport obs = spectral_obs_constant(basis, {mass.lo, mass.hi}, r);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  w.head(obs.n_modes) = obs.witness;
  const double wq = omega_norm_sq(basis, mass, w);
  s.at_most("observability.specobs_witness", std::abs(w.squaredNorm() - obs.specobs_constant * wq) / w.squaredNorm(),
            1e-8);
  double spec = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    c.head(obs.n_modes) = s.normal(obs.n_modes);
    spec = std::max(spec, c.squaredNorm() / (obs.specobs_constant * omega_norm_sq(basis, mass, c)));
  }
  s.at_most("observability.specobs_inequality", spec, 1.0 + 1e-10);

  const double T = cfg.horizon;
  const Eigen::MatrixXd g = observability_gramian(dec, mass, T);
  const Eigen::VectorXd gev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g, Eigen::EigenvaluesOnly).eigenvalues();
  s.at_most("observability.gramian_psd", -gev[0] / g.norm(), 1e-12);
  s.at_most("observability.gramian_symmetry", max_abs(g - g.transpose()) / max_abs(g), 1e-13);

  CostReport cost;
  try {
    cost = observability_cost(dec, mass, T);
  } catch (const ConditioningError& e) {
    s.skip("observability.kappa_witness", 1e-8, e.what());
    s.skip("observability.semobs_inequality", 1.0 + 1e-8, e.what());
    return;
  }
  const Eigen::VectorXd ew = propagate(dec, cost.witness, T);
  s.at_most("observability.kappa_witness",
            std::abs(cost.kappa * cost.witness.dot(g * cost.witness) - ew.squaredNorm()) / ew.squaredNorm(), 1e-8);
  double semobs = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd phi = s.normal(n);
    semobs = std::max(semobs, propagate(dec, phi, T).squaredNorm() / (cost.kappa * phi.dot(g * phi)));
  }
  s.at_most("observability.semobs_inequality", semobs, 1.0 + 1e-8);

  // kappa non-increasing in T at fixed truncation.
  std::vector<double> horizons = cfg.horizons;
  horizons.push_back(T);
  std::sort(horizons.begin(), horizons.end());
  double rise_t = -std::numeric_limits<double>::infinity();
  double prev = std::numeric_limits<double>::infinity();
  bool ok_t = true;
  for (double h : horizons) {
    try {
      const double k = observability_cost(dec, mass, h).kappa;
      rise_t = std::max(rise_t, (k - prev) / k);
      prev = k;
    } catch (const ConditioningError&) {
      ok_t = false;
    }
  }
  if (ok_t) s.at_most("observability.kappa_monotone_T", rise_t, 1e-9);
  else s.skip("observability.kappa_monotone_T", 1e-9, "a horizon failed the Gramian conditioning gate");

  // Nested control sets: kappa non-increasing as omega grows, and the
  // Gramian quadratic form non-decreasing at 100 random points.
  const double width = cfg.omega_hi - cfg.omega_lo;
  std::vector<RestrictedMass> nested;
  for (double shrink : {0.25, 0.125, 0.0}) {
    nested.push_back(make_restricted_mass(basis, cfg.omega_lo + shrink * width, cfg.omega_hi - shrink * width));
  }
  double rise_w = -std::numeric_limits<double>::infinity();
  bool ok_w = true;
  prev = std::numeric_limits<double>::infinity();
  for (const auto& m : nested) {
    try {
      const double k = observability_cost(dec, m, T).kappa;
      rise_w = std::max(rise_w, (k - prev) / k);
      prev = k;
    } catch (const ConditioningError&) {
      ok_w = false;
    }
  }
  std::vector<Eigen::MatrixXd> grams;
  for (const auto& m : nested) grams.push_back(observability_gramian(dec, m, T));
  double form = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd phi = s.normal(n);
    for (std::size_t i = 0; i + 1 < grams.size(); ++i) {
      const double a = phi.dot(grams[i] * phi);
      const double b = phi.dot(grams[i + 1] * phi);
      form = std::max(form, (a - b) / b);
    }
  }
  if (ok_w) rise_w = std::max(rise_w, form);
  if (ok_w) s.at_most("observability.kappa_monotone_omega", rise_w, 1e-9);
  else s.skip("observability.kappa_monotone_omega", 1e-9, "a control set failed the Gramian conditioning gate");

  // Proof chain on a small low-frequency window.
  const double r_chain = basis.lambda(std::min(n, 4) - 1);
  std::vector<double> chain_t;
  for (int i = 1; i <= 20; ++i) chain_t.push_back(T * i / 20.0);
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& row : proof_chain(basis, dec, mass, T, r_chain, chain_t)) {
    slack = std::min(slack, row.bound / row.extremal_quotient);
  }
  s.at_least("observability.proof_chain", slack, 1.0 - 1e-9);
  (void)kernel;
}

void control_checks(Suite& s, const ExperimentConfig& cfg, const Domain& domain, const KernelSpec& kernel,
                    const SpectralDecomposition& dec, const RestrictedMass& mass) {
  const int n = dec.size();
  const double T = cfg.horizon;
  const Eigen::VectorXd u0 = initial_state(cfg, n);
  ControlResult hum;
  CostReport cost;
  try {
    hum = hum_control(dec, mass, u0, T, cfg.nt, 0.0);
    cost = observability_cost(dec, mass, T);
  } catch (const ConditioningError& e) {
    for (const char* name : {"control.exact_null", "control.simulated_null", "control.cost_quadrature",
                             "control.nullcond_random", "control.duality", "control.linearity"}) {
      s.skip(name, 0.0, e.what());
    }
    hum.phases.clear();
  }
  if (!hum.phases.empty()) {
    s.at_most("control.exact_null", hum.terminal_residual, 1e-8);
    const Simulation sim = simulate_controlled(dec, mass, u0, hum.times, hum.control_coeffs, cfg.refine);
    s.at_most("control.simulated_null", sim.terminal_norm / u0.norm(), 1e-5);
    s.at_most("control.cost_quadrature", std::abs(control_cost(hum, mass, dec) - hum.cost_sq) / hum.cost_sq, 1e-6);
    double nullcond = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd v = s.normal(n);
      nullcond = std::max(nullcond, hum_control(dec, mass, v, T, 16).cost_sq / (cost.kappa * v.squaredNorm()));
    }
    s.at_most("control.nullcond_random", nullcond, 1.0 + 1e-6);
    const Eigen::VectorXd aligned = propagate(dec, cost.witness, T);
    const double dual = hum_control(dec, mass, aligned, T, 16).cost_sq / aligned.squaredNorm();
    s.at_most("control.duality", std::abs(dual - cost.kappa) / cost.kappa, 1e-4);
    const Eigen::VectorXd a = s.normal(n);
    const Eigen::VectorXd b = s.normal(n);
    const Eigen::VectorXd pa = hum_control(dec, mass, a, T, 16).multiplier();
    const Eigen::VectorXd pb = hum_control(dec, mass, b, T, 16).multiplier();
    const Eigen::VectorXd pab = hum_control(dec, mass, 2.0 * a - 3.0 * b, T, 16).multiplier();
    s.at_most("control.linearity", (pab - (2.0 * pa - 3.0 * pb)).norm() / (2.0 * pa.norm() + 3.0 * pb.norm()), 1e-9);
  }

  if (dec.top() > 0.0 && !hum.phases.empty()) {
    const double growth = propagate(dec, u0, T).norm() / u0.norm();
    s.at_least("control.unstable_uncontrolled_growth", growth, 1.0);
    s.at_most("control.unstable_controlled_residual", hum.terminal_residual, 1e-6);
  } else {
    s.skip("control.unstable_controlled_residual", 1e-6, "configured generator is stable (mu_1 <= 0)");
  }

  LrOptions opts;
  opts.stages = cfg.stages;
  opts.r0 = cfg.r0;
  opts.margin = cfg.margin;
  opts.nt = std::min(cfg.nt, 257);
  opts.quadrature_order = cfg.quadrature_order;
  const int n_lr = std::max(n, lr_truncation(domain, n, opts));
  const SpectralBasis lb = build_basis(domain, n_lr, cfg.quadrature_order);
  const SpectralDecomposition ldec = decompose(assemble_generator(lb, project_kernel(kernel, lb)));
  const RestrictedMass lmass = make_restricted_mass(lb);
  ControlResult lr;
  try {
    lr = lr_staged_control(lb, ldec, lmass, initial_state(cfg, n_lr), T, opts);
  } catch (const ConditioningError& e) {
    for (const char* name : {"control.lr_low_modes", "control.lr_monotone", "control.lr_final_residual"}) {
      s.skip(name, 0.0, e.what());
    }
    return;
  }
  double low = 0.0;
  double rise = -std::numeric_limits<double>::infinity();
  double prev = 1.0;
  for (const auto& st : lr.stage_log) {
    low = std::max(low, st.low_mode_residual);
    rise = std::max({rise, st.residual_after_active - prev, st.residual_after_passive - st.residual_after_active});
    prev = st.residual_after_passive;
  }
  s.at_most("control.lr_low_modes", low, 1e-8);
  s.at_most("control.lr_monotone", rise, 0.0);
  s.at_most("control.lr_final_residual", lr.terminal_residual, 1e-3);

  if (std::holds_alternative<ZeroKernel>(kernel)) {
    double decay = 0.0;
    for (const auto& st : lr.stage_log) {
      const double half = st.t_end - st.t_mid;
      const Eigen::VectorXd v = s.normal(n_lr);
      const Eigen::VectorXd out = propagate(ldec, v, half);
      for (int j = 0; j < n_lr; ++j) {
        const double expect = std::exp(-lb.lambda(j) * half) * v[j];
        decay = std::max(decay, std::abs(out[j] - expect) / std::abs(v[j]));
      }
    }
    s.at_most("control.lr_passive_decay", decay, 1e-10);
  } else {
    s.skip("control.lr_passive_decay", 1e-10, "mode-wise passive decay is exact only for the zero kernel");
  }
}

}  // namespace

std::vector<CheckRow> certify_all(const ExperimentConfig& cfg) {
  Suite s(cfg.seed);
  const Domain domain = make_domain(cfg);
  const SpectralBasis basis = build_basis(domain, cfg.n, cfg.quadrature_order);
  const KernelSpec kernel = make_kernel(cfg);
  const RestrictedMass mass = make_restricted_mass(basis);
  spectral_checks(s, cfg, basis, mass);
  kernel_checks(s, cfg, basis, kernel);
  const KernelMatrix kmat = project_kernel(kernel, basis);
  const SpectralDecomposition dec = decompose(assemble_generator(basis, kmat));
  evolution_checks(s, cfg, basis, kmat, dec, mass);
  observability_checks(s, cfg, basis, kernel, dec, mass);
  control_checks(s, cfg, domain, kernel, dec, mass);
  return s.take();
}

}  // namespace nlheat
