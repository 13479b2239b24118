#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nlheat/nonlocal_kernel.hpp"
#include "nlheat/spectral_core.hpp"

namespace nlheat {

/// Fully resolved experiment configuration. Every field has a value after
/// parsing; optional keys take the defaults below.
struct ExperimentConfig {
  // domain
  double length = 1.0;
  double omega_lo = 0.0;
  double omega_hi = 1.0;
  // kernel
  std::string kernel_type = "zero";  // zero | gaussian | separable | grid
  double kernel_amplitude = 1.0;
  double kernel_width = 0.2;
  std::vector<double> kernel_g;
  std::vector<double> kernel_h;
  std::string kernel_file;  // absolute after resolution
  // basis
  int n = 8;
  int quadrature_order = 8;
  // time
  double horizon = 0.5;
  std::vector<double> horizons{0.4, 0.2, 0.1, 0.05, 0.025};
  std::vector<double> times{0.0, 0.001, 0.01, 0.05, 0.1, 0.25, 0.5};
  // sweep
  std::string coupling = "paper";  // paper | fixed
  int margin = 8;
  std::vector<double> r_list;  // empty: r = lambda_1 .. lambda_N
  double obs_r = 0.0;          // obs-constant cutoff, 0 means lambda_N
  // control
  int nt = 4097;
  int refine = 4;
  double ridge = 0.0;
  bool auto_ridge = false;
  int stages = 4;
  double r0 = 0.0;  // 0 means lambda_1
  std::vector<double> u0;  // empty: first min(N, 16) modes, unit norm
  // tolerance
  double symmetry_tol = 1e-12;
  double conditioning_gate = 1e-14;
  // seed
  std::uint64_t seed = 20240611;
  // output
  std::string output_dir = "out";
};

/// Strict parse of `section.key = value` lines (`#` comments, blank lines).
/// Overrides are `key=value` strings applied after the file; `T` and `N` are
/// accepted as short forms of time.T and basis.N. Relative kernel files are
/// resolved against `base_dir`.
ExperimentConfig parse_config_text(std::string_view text, const std::string& base_dir,
                                   const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config_text(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& config);

Domain make_domain(const ExperimentConfig& config);
KernelSpec make_kernel(const ExperimentConfig& config);
/// Initial state padded to `n` coefficients.
Eigen::VectorXd initial_state(const ExperimentConfig& config, int n);

inline const std::vector<std::string>& command_verbs() {
  static const std::vector<std::string> verbs{"basis",       "kernel-project", "evolve",    "zeta",
                                              "obs-constant", "obs-sweep",      "gramian",   "cost",
                                              "cost-sweep",   "control-hum",    "control-lr", "certify-all"};
  return verbs;
}

/// Exit status for an exception escaping a command: 1 for argument, format
/// and config errors, 2 for numeric and conditioning errors.
int exit_code_for(const std::exception& e);

/// Runs one verb, writing CSV files and config.resolved into
/// config.output_dir. Returns 0, or 2 when certify-all records a failure.
/// Errors propagate as exceptions.
int run_command(const std::string& verb, const ExperimentConfig& config, std::ostream& log);

struct CheckRow {
  std::string check;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;  // set, e.g., for skipped checks
};

/// Invariant suite over the configured problem; randomized checks draw from
/// config.seed.
std::vector<CheckRow> certify_all(const ExperimentConfig& config);

}  // namespace nlheat
