#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nlheat/app.hpp"
#include "nlheat/control.hpp"
#include "nlheat/errors.hpp"
#include "nlheat/evolution.hpp"
#include "nlheat/format.hpp"
#include "nlheat/observability.hpp"

namespace nlheat {
namespace {

/// Buffers a CSV file and writes it in one go.
class Csv {
 public:
  explicit Csv(const std::string& header) { body_ << header << '\n'; }

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((body_ << (first ? "" : ",") << cell(fields), first = false), ...);
    body_ << '\n';
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("run_command: cannot write '" + path.string() + "'");
    out << body_.str();
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::ostringstream body_;
};

struct Problem {
  Domain domain;
  SpectralBasis basis;
  KernelSpec kernel;
  KernelMatrix kmat;
  SpectralDecomposition dec;
  RestrictedMass mass;
};

Problem build_problem(const ExperimentConfig& cfg, int n) {
  const Domain domain = make_domain(cfg);
  SpectralBasis basis = build_basis(domain, n, cfg.quadrature_order);
  KernelSpec kernel = make_kernel(cfg);
  require_symmetric(kernel, basis, cfg.symmetry_tol);
  KernelMatrix kmat = project_kernel(kernel, basis);
  SpectralDecomposition dec = decompose(assemble_generator(basis, kmat));
  RestrictedMass mass = make_restricted_mass(basis);
  return Problem{domain, std::move(basis), std::move(kernel), std::move(kmat), std::move(dec), std::move(mass)};
}

Problem build_problem(const ExperimentConfig& cfg) { return build_problem(cfg, cfg.n); }

std::vector<double> default_cutoffs(const SpectralBasis& basis) {
  std::vector<double> r;
  for (int j = 0; j < basis.size(); ++j) r.push_back(basis.lambda(j));
  return r;
}

void cmd_basis(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const SpectralBasis basis = build_basis(make_domain(cfg), cfg.n, cfg.quadrature_order);
  const Eigen::MatrixXd m = restricted_mass_matrix(basis, cfg.omega_lo, cfg.omega_hi);
  Csv csv("j,lambda,mass_diag");
  for (int j = 0; j < basis.size(); ++j) csv.row(j + 1, basis.lambda(j), m(j, j));
  csv.write(dir / "basis.csv");
}

void cmd_kernel(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const Problem p = build_problem(cfg);
  Csv mat("i,j,value");
  for (int i = 0; i < p.kmat.size(); ++i) {
    for (int j = 0; j < p.kmat.size(); ++j) mat.row(i + 1, j + 1, p.kmat.matrix(i, j));
  }
  mat.write(dir / "kernel_matrix.csv");
  Csv summary("kernel,N,hs_norm,frobenius,spectral_radius,symmetry_defect");
  summary.row(kernel_type_name(p.kernel), p.kmat.size(), p.kmat.hs_of_k, p.kmat.frobenius(),
              p.kmat.spectral_radius(), check_symmetry(p.kernel, p.basis));
  summary.write(dir / "kernel_summary.csv");
}

void cmd_evolve(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const Problem p = build_problem(cfg);
  const Eigen::VectorXd u0 = initial_state(cfg, cfg.n);
  Csv csv("t,semigroup_norm,sem_est_bound,state_norm");
  for (double t : cfg.times) {
    csv.row(t, semigroup_norm(p.dec, t), std::exp((-p.basis.lambda(0) + p.kmat.hs_of_k) * t),
            propagate(p.dec, u0, t).norm());
  }
  csv.write(dir / "evolve.csv");
}

void cmd_zeta(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const Problem p = build_problem(cfg);
  Csv csv("t,zeta");
  for (double t : cfg.times) csv.row(t, left_inverse_constant(p.dec, p.mass, t, cfg.conditioning_gate).zeta);
  csv.write(dir / "zeta.csv");
}

void cmd_obs_constant(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const SpectralBasis basis = build_basis(make_domain(cfg), cfg.n, cfg.quadrature_order);
  const double r = cfg.obs_r > 0.0 ? cfg.obs_r : basis.lambda(basis.size() - 1);
  const ObsReport rep = spectral_obs_constant(basis, {cfg.omega_lo, cfg.omega_hi}, r);
  Csv csv("r,n_modes,c_min,specobs_constant");
  csv.row(rep.r, rep.n_modes, rep.c_min, rep.specobs_constant);
  csv.write(dir / "obs_constant.csv");
  Csv witness("j,coefficient");
  for (Eigen::Index j = 0; j < rep.witness.size(); ++j) witness.row(static_cast<int>(j + 1), rep.witness[j]);
  witness.write(dir / "obs_witness.csv");
}

void cmd_obs_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const SpectralBasis basis = build_basis(make_domain(cfg), cfg.n, cfg.quadrature_order);
  const auto r_list = cfg.r_list.empty() ? default_cutoffs(basis) : cfg.r_list;
  const SpecObsFit fit = specobs_sweep_and_fit(basis, {cfg.omega_lo, cfg.omega_hi}, r_list);
  Csv csv("r,n_modes,c_min,specobs_constant");
  for (const auto& rep : fit.reports) csv.row(rep.r, rep.n_modes, rep.c_min, rep.specobs_constant);
  csv.write(dir / "obs_sweep.csv");
  Csv fits("model,C0,C1,residual");
  fits.row("sqrt_r", fit.sqrt_fit.intercept, fit.sqrt_fit.slope, fit.sqrt_fit.residual);
  fits.row("linear_r", fit.linear_fit.intercept, fit.linear_fit.slope, fit.linear_fit.residual);
  fits.write(dir / "obs_fit.csv");
}

void cmd_gramian(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const Problem p = build_problem(cfg);
  const Eigen::MatrixXd g = observability_gramian(p.dec, p.mass, cfg.horizon);
  Csv mat("i,j,value");
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < g.cols(); ++j) mat.row(i + 1, j + 1, g(i, j));
  }
  mat.write(dir / "gramian.csv");
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g, Eigen::EigenvaluesOnly).eigenvalues();
  Csv summary("T,N,min_eig,max_eig");
  summary.row(cfg.horizon, cfg.n, ev[0], ev[ev.size() - 1]);
  summary.write(dir / "gramian_summary.csv");
}

void cmd_cost(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  const Problem p = build_problem(cfg);
  const CostReport rep = observability_cost(p.dec, p.mass, cfg.horizon);
  Csv csv("T,N_used,kappa_T,gramian_min_eig");
  csv.row(rep.horizon, rep.n_used, rep.kappa, rep.gramian_min_eig);
  csv.write(dir / "cost.csv");
}

void cmd_cost_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  SweepOptions opts;
  opts.coupling = cfg.coupling == "paper" ? Coupling::kInverseT : Coupling::kFixedN;
  opts.fixed_n = cfg.n;
  opts.margin = cfg.margin;
  opts.quadrature_order = cfg.quadrature_order;
  const CostSweep sweep = cost_sweep(make_domain(cfg), make_kernel(cfg), cfg.horizons, opts);
  const BlowupFit& f = sweep.free_fit;
  Csv csv("T,N_used,kappa_T,gramian_min_eig,fit_model,fit_C,fit_alpha,fit_residual");
  for (const auto& row : sweep.rows) {
    if (!row.ok()) {
      log << "warning: cost-sweep row T=" << format_double(row.horizon) << " failed: " << row.error << '\n';
      csv.row(row.horizon, row.n_used, std::string("nan"), std::string("nan"), f.model, f.c, f.alpha, f.residual);
      continue;
    }
    csv.row(row.horizon, row.n_used, row.kappa, row.gramian_min_eig, f.model, f.c, f.alpha, f.residual);
  }
  csv.write(dir / "cost_sweep.csv");
  Csv fits("model,a,C,alpha,residual,alpha_at_search_bound,winner");
  for (const BlowupFit* b : {&sweep.sqrt_fit, &sweep.inverse_fit, &sweep.free_fit}) {
    fits.row(b->model, b->a, b->c, b->alpha, b->residual, std::string(b->alpha_at_search_bound ? "true" : "false"),
             std::string(b->model == sweep.winner ? "true" : "false"));
  }
  fits.write(dir / "cost_fits.csv");
}

ControlResult solve_hum(const Problem& p, const ExperimentConfig& cfg, const Eigen::VectorXd& u0,
                        std::ostream& log) {
  try {
    return hum_control(p.dec, p.mass, u0, cfg.horizon, cfg.nt, cfg.ridge);
  } catch (const ConditioningError&) {
    if (!cfg.auto_ridge || cfg.ridge > 0.0) throw;
    const double ridge = fallback_ridge(observability_gramian(p.dec, p.mass, cfg.horizon));
    log << "warning: hum_control: Gramian failed the conditioning gate, retrying with ridge "
        << format_double(ridge) << '\n';
    return hum_control(p.dec, p.mass, u0, cfg.horizon, cfg.nt, ridge);
  }
}

void cmd_control_hum(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const Problem p = build_problem(cfg);
  const Eigen::VectorXd u0 = initial_state(cfg, cfg.n);
  const ControlResult res = solve_hum(p, cfg, u0, log);
  const Eigen::MatrixXd traj = controlled_trajectory(p.dec, p.mass, u0, res);
  const double u0_norm = u0.norm();
  Csv csv("t,cost_density,residual_projection");
  for (Eigen::Index s = 0; s < res.times.size(); ++s) {
    const Eigen::VectorXd c = res.control_coeffs.row(s).transpose();
    csv.row(res.times[s], c.dot(p.mass.matrix * c), u0_norm > 0.0 ? traj.row(s).norm() / u0_norm : 0.0);
  }
  csv.write(dir / "control.csv");
  const CostReport cost = observability_cost(p.dec, p.mass, cfg.horizon);
  const bool ok = res.cost_sq <= cost.kappa * u0.squaredNorm() * (1.0 + 1e-6);
  Csv summary("T,cost_sq,terminal_residual,kappa_T,nullcond_ok");
  summary.row(cfg.horizon, res.cost_sq, res.terminal_residual, cost.kappa, std::string(ok ? "true" : "false"));
  summary.write(dir / "control_summary.csv");
  const Simulation sim = simulate_controlled(p.dec, p.mass, u0, res.times, res.control_coeffs, cfg.refine);
  log << "control-hum: closed-form residual " << format_double(res.terminal_residual)
      << ", simulated residual " << format_double(u0_norm > 0.0 ? sim.terminal_norm / u0_norm : 0.0) << '\n';
}

void cmd_control_lr(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  LrOptions opts;
  opts.stages = cfg.stages;
  opts.r0 = cfg.r0;
  opts.margin = cfg.margin;
  opts.nt = cfg.nt;
  opts.quadrature_order = cfg.quadrature_order;
  const Domain domain = make_domain(cfg);
  const int n = std::max(cfg.n, lr_truncation(domain, cfg.n, opts));
  const Problem p = build_problem(cfg, n);
  const Eigen::VectorXd u0 = initial_state(cfg, n);
  const ControlResult res = lr_staged_control(p.basis, p.dec, p.mass, u0, cfg.horizon, opts);
  Csv csv("k,r_k,t_start,t_mid,t_end,residual_after_active,residual_after_passive");
  for (const auto& s : res.stage_log) {
    csv.row(s.k, s.r_k, s.t_start, s.t_mid, s.t_end, s.residual_after_active, s.residual_after_passive);
  }
  csv.write(dir / "lr.csv");
  const Simulation sim = simulate_controlled(p.dec, p.mass, u0, res.times, res.control_coeffs, cfg.refine);
  const double u0_norm = u0.norm();
  std::string hum_cost = "nan";
  try {
    hum_cost = format_double(hum_control(p.dec, p.mass, u0, cfg.horizon, 16, 0.0).cost_sq);
  } catch (const ConditioningError& e) {
    log << "note: one-shot comparison unavailable: " << e.what() << '\n';
  }
  Csv summary("T,N_used,stages,cost_sq,terminal_residual,simulated_residual,hum_cost_sq");
  summary.row(cfg.horizon, n, cfg.stages, res.cost_sq, res.terminal_residual,
              u0_norm > 0.0 ? sim.terminal_norm / u0_norm : 0.0, hum_cost);
  summary.write(dir / "lr_summary.csv");
}

int cmd_certify(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& log) {
  const auto rows = certify_all(cfg);
  Csv csv("check,status,value,threshold");
  int failed = 0;
  int skipped = 0;
  for (const auto& r : rows) {
    const std::string status = !r.note.empty() ? "skip" : r.pass ? "pass" : "fail";
    if (status == "fail") ++failed;
    if (status == "skip") ++skipped;
    csv.row(r.check, status, r.value, r.threshold);
  }
  csv.write(dir / "certify.csv");
  log << "certify-all: " << rows.size() - failed - skipped << " passed, " << skipped << " skipped, " << failed
      << " failed\n";
  for (const auto& r : rows) {
    if (!r.note.empty()) log << "  skip " << r.check << ": " << r.note << '\n';
    if (r.note.empty() && !r.pass) log << "  FAIL " << r.check << '\n';
  }
  return failed == 0 ? 0 : 2;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const ArgumentError*>(&e) != nullptr) return 1;
  if (dynamic_cast<const FormatError*>(&e) != nullptr) return 1;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e) != nullptr) return 1;
  return 2;
}

int run_command(const std::string& verb, const ExperimentConfig& config, std::ostream& log) {
  const auto& verbs = command_verbs();
  if (std::find(verbs.begin(), verbs.end(), verb) == verbs.end()) {
    throw ArgumentError("run_command: unknown verb '" + verb + "'");
  }
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream echo(dir / "config.resolved", std::ios::binary);
    if (!echo) throw ArgumentError("run_command: cannot write to output directory '" + dir.string() + "'");
    echo << to_text(config);
  }
  if (verb == "basis") cmd_basis(config, dir);
  else if (verb == "kernel-project") cmd_kernel(config, dir);
  else if (verb == "evolve") cmd_evolve(config, dir);
  else if (verb == "zeta") cmd_zeta(config, dir);
  else if (verb == "obs-constant") cmd_obs_constant(config, dir);
  else if (verb == "obs-sweep") cmd_obs_sweep(config, dir);
  else if (verb == "gramian") cmd_gramian(config, dir);
  else if (verb == "cost") cmd_cost(config, dir);
  else if (verb == "cost-sweep") cmd_cost_sweep(config, dir, log);
  else if (verb == "control-hum") cmd_control_hum(config, dir, log);
  else if (verb == "control-lr") cmd_control_lr(config, dir, log);
  else if (verb == "certify-all") return cmd_certify(config, dir, log);
  else throw ArgumentError("run_command: unknown verb '" + verb + "'");
  return 0;
}

}  // namespace nlheat
