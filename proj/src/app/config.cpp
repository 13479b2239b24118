#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "nlheat/app.hpp"
#include "nlheat/errors.hpp"
#include "nlheat/format.hpp"

namespace nlheat {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Errors raised while converting a value; `where` is prefixed by the caller.
struct ValueError {
  std::string message;
};

double to_real(std::string_view v) {
  const auto d = parse_double(v);
  if (!d || !std::isfinite(*d)) throw ValueError{"expected a finite decimal, got '" + std::string(v) + "'"};
  return *d;
}

double to_positive(std::string_view v) {
  const double d = to_real(v);
  if (!(d > 0.0)) throw ValueError{"expected a positive value, got '" + std::string(v) + "'"};
  return d;
}

double to_nonnegative(std::string_view v) {
  const double d = to_real(v);
  if (!(d >= 0.0)) throw ValueError{"expected a non-negative value, got '" + std::string(v) + "'"};
  return d;
}

int to_int(std::string_view v, long long lo, long long hi) {
  const auto i = parse_integer(v);
  if (!i) throw ValueError{"expected an integer, got '" + std::string(v) + "'"};
  if (*i < lo || *i > hi) {
    throw ValueError{"integer " + std::string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"};
  }
  return static_cast<int>(*i);
}

bool to_bool(std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ValueError{"expected true or false, got '" + std::string(v) + "'"};
}

std::vector<double> to_list(std::string_view v, bool positive) {
  std::vector<double> out;
  if (v.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = v.find(',', start);
    const auto item = trim(v.substr(start, comma == std::string_view::npos ? v.size() - start : comma - start));
    out.push_back(positive ? to_positive(item) : to_real(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string from_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

std::string choice(std::string_view v, std::initializer_list<const char*> allowed) {
  std::string names;
  for (const char* a : allowed) {
    if (v == a) return std::string(v);
    names += names.empty() ? a : std::string("|") + a;
  }
  throw ValueError{"expected one of " + names + ", got '" + std::string(v) + "'"};
}

struct Key {
  const char* name;
  bool required;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;  // empty string: omit from echo
};

const std::vector<Key>& keys() {
  using C = ExperimentConfig;
  using V = std::string_view;
  static const std::vector<Key> table{
      {"domain.length", true, [](C& c, V v) { c.length = to_positive(v); },
       [](const C& c) { return format_double(c.length); }},
      {"domain.omega_lo", true, [](C& c, V v) { c.omega_lo = to_real(v); },
       [](const C& c) { return format_double(c.omega_lo); }},
      {"domain.omega_hi", true, [](C& c, V v) { c.omega_hi = to_real(v); },
       [](const C& c) { return format_double(c.omega_hi); }},
      {"kernel.type", true,
       [](C& c, V v) { c.kernel_type = choice(v, {"zero", "gaussian", "separable", "grid"}); },
       [](const C& c) { return c.kernel_type; }},
      {"kernel.amplitude", false, [](C& c, V v) { c.kernel_amplitude = to_real(v); },
       [](const C& c) { return format_double(c.kernel_amplitude); }},
      {"kernel.width", false, [](C& c, V v) { c.kernel_width = to_positive(v); },
       [](const C& c) { return format_double(c.kernel_width); }},
      {"kernel.g", false, [](C& c, V v) { c.kernel_g = to_list(v, false); },
       [](const C& c) { return from_list(c.kernel_g); }},
      {"kernel.h", false, [](C& c, V v) { c.kernel_h = to_list(v, false); },
       [](const C& c) { return from_list(c.kernel_h); }},
      {"kernel.file", false, [](C& c, V v) { c.kernel_file = std::string(v); },
       [](const C& c) { return c.kernel_file; }},
      {"basis.N", true, [](C& c, V v) { c.n = to_int(v, 1, 4096); },
       [](const C& c) { return std::to_string(c.n); }},
      {"basis.quadrature_order", false, [](C& c, V v) { c.quadrature_order = to_int(v, 1, 64); },
       [](const C& c) { return std::to_string(c.quadrature_order); }},
      {"time.T", true, [](C& c, V v) { c.horizon = to_positive(v); },
       [](const C& c) { return format_double(c.horizon); }},
      {"time.T_list", false, [](C& c, V v) { c.horizons = to_list(v, true); },
       [](const C& c) { return from_list(c.horizons); }},
      {"time.t_list", false,
       [](C& c, V v) {
         c.times = to_list(v, false);
         for (double t : c.times) {
           if (t < 0.0) throw ValueError{"times must be >= 0"};
         }
       },
       [](const C& c) { return from_list(c.times); }},
      {"sweep.coupling", false, [](C& c, V v) { c.coupling = choice(v, {"paper", "fixed"}); },
       [](const C& c) { return c.coupling; }},
      {"sweep.margin", false, [](C& c, V v) { c.margin = to_int(v, 0, 1024); },
       [](const C& c) { return std::to_string(c.margin); }},
      {"sweep.r_list", false, [](C& c, V v) { c.r_list = to_list(v, true); },
       [](const C& c) { return from_list(c.r_list); }},
      {"sweep.obs_r", false, [](C& c, V v) { c.obs_r = to_nonnegative(v); },
       [](const C& c) { return format_double(c.obs_r); }},
      {"control.nt", false, [](C& c, V v) { c.nt = to_int(v, 16, 1 << 20); },
       [](const C& c) { return std::to_string(c.nt); }},
      {"control.nt_fine_factor", false, [](C& c, V v) { c.refine = to_int(v, 1, 1024); },
       [](const C& c) { return std::to_string(c.refine); }},
      {"control.ridge", false, [](C& c, V v) { c.ridge = to_nonnegative(v); },
       [](const C& c) { return format_double(c.ridge); }},
      {"control.auto_ridge", false, [](C& c, V v) { c.auto_ridge = to_bool(v); },
       [](const C& c) { return std::string(c.auto_ridge ? "true" : "false"); }},
      {"control.stages", false, [](C& c, V v) { c.stages = to_int(v, 2, 30); },
       [](const C& c) { return std::to_string(c.stages); }},
      {"control.r0", false, [](C& c, V v) { c.r0 = to_nonnegative(v); },
       [](const C& c) { return format_double(c.r0); }},
      {"control.u0", false, [](C& c, V v) { c.u0 = to_list(v, false); },
       [](const C& c) { return from_list(c.u0); }},
      {"tolerance.symmetry", false, [](C& c, V v) { c.symmetry_tol = to_nonnegative(v); },
       [](const C& c) { return format_double(c.symmetry_tol); }},
      {"tolerance.conditioning", false, [](C& c, V v) { c.conditioning_gate = to_nonnegative(v); },
       [](const C& c) { return format_double(c.conditioning_gate); }},
      {"seed.oracle", false,
       [](C& c, V v) {
         const auto i = parse_integer(v);
         if (!i || *i < 0) throw ValueError{"expected a non-negative integer seed, got '" + std::string(v) + "'"};
         c.seed = static_cast<std::uint64_t>(*i);
       },
       [](const C& c) { return std::to_string(c.seed); }},
      {"output.dir", false, [](C& c, V v) { c.output_dir = std::string(v); },
       [](const C& c) { return c.output_dir; }},
  };
  return table;
}

const Key* find_key(std::string_view name) {
  for (const auto& k : keys()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

std::string canonical_key(std::string_view name) {
  if (name == "T") return "time.T";
  if (name == "N") return "basis.N";
  return std::string(name);
}

void validate(ExperimentConfig& c, const std::string& base_dir) {
  if (!(c.omega_lo >= 0.0 && c.omega_lo < c.omega_hi && c.omega_hi <= c.length)) {
    throw ArgumentError("parse_config: need 0 <= domain.omega_lo < domain.omega_hi <= domain.length, got (" +
                        format_double(c.omega_lo) + ", " + format_double(c.omega_hi) + ") in (0, " +
                        format_double(c.length) + ")");
  }
  if (c.kernel_type == "separable" && c.kernel_g.empty()) {
    throw ArgumentError("parse_config: kernel.type = separable needs kernel.g");
  }
  if (c.kernel_type == "grid") {
    if (c.kernel_file.empty()) throw ArgumentError("parse_config: kernel.type = grid needs kernel.file");
    std::filesystem::path p(c.kernel_file);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    c.kernel_file = std::filesystem::absolute(p).lexically_normal().string();
    const GridKernel grid = read_grid_kernel_file(c.kernel_file);
    if (std::abs(grid.length - c.length) > 1e-12 * c.length) {
      throw ArgumentError("parse_config: grid kernel length " + format_double(grid.length) + " in '" +
                          c.kernel_file + "' does not match domain.length " + format_double(c.length));
    }
  }
  if (c.u0.size() > static_cast<std::size_t>(c.n)) {
    throw ArgumentError("parse_config: control.u0 has " + std::to_string(c.u0.size()) +
                        " coefficients but basis.N = " + std::to_string(c.n));
  }
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view text, const std::string& base_dir,
                                   const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;  // key -> line
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    // A '#' after whitespace starts a trailing comment.
    for (std::size_t i = 1; i < line.size(); ++i) {
      if (line[i] == '#' && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line = trim(line.substr(0, i));
        break;
      }
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw FormatError("parse_config: expected 'section.key = value'", line_no);
    const std::string name(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const Key* key = find_key(name);
    if (key == nullptr) throw FormatError("parse_config: unknown key '" + name + "'", line_no);
    if (auto it = seen.find(name); it != seen.end()) {
      throw FormatError("parse_config: duplicate key '" + name + "' (first set on line " +
                            std::to_string(it->second) + ")",
                        line_no);
    }
    seen[name] = line_no;
    try {
      key->set(cfg, value);
    } catch (const ValueError& e) {
      throw FormatError("parse_config: " + name + ": " + e.message, line_no);
    }
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ArgumentError("parse_config: override '" + ov + "' is not key=value");
    const std::string name = canonical_key(trim(std::string_view(ov).substr(0, eq)));
    const Key* key = find_key(name);
    if (key == nullptr) throw ArgumentError("parse_config: override names unknown key '" + name + "'");
    try {
      key->set(cfg, trim(std::string_view(ov).substr(eq + 1)));
    } catch (const ValueError& e) {
      throw ArgumentError("parse_config: override " + name + ": " + e.message);
    }
    seen.emplace(name, 0);
  }
  for (const auto& k : keys()) {
    if (k.required && !seen.count(k.name)) {
      throw ArgumentError(std::string("parse_config: missing required key '") + k.name + "'");
    }
  }
  validate(cfg, base_dir);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("parse_config: cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config_text(buf.str(), dir.empty() ? std::string(".") : dir.string(), overrides);
}

std::string to_text(const ExperimentConfig& config) {
  std::string out = "# resolved configuration\n";
  std::string section;
  for (const auto& k : keys()) {
    const std::string name = k.name;
    const std::string value = k.get(config);
    if (value.empty()) continue;
    const std::string sec = name.substr(0, name.find('.'));
    if (sec != section) {
      out += '\n';
      section = sec;
    }
    out += name + " = " + value + '\n';
  }
  return out;
}

Domain make_domain(const ExperimentConfig& config) {
  return Domain(config.length, config.omega_lo, config.omega_hi);
}

KernelSpec make_kernel(const ExperimentConfig& config) {
  if (config.kernel_type == "zero") return ZeroKernel{};
  if (config.kernel_type == "gaussian") return GaussianKernel{config.kernel_amplitude, config.kernel_width};
  if (config.kernel_type == "separable") {
    return SeparableKernel{config.kernel_g, config.kernel_h.empty() ? config.kernel_g : config.kernel_h};
  }
  return read_grid_kernel_file(config.kernel_file);
}

Eigen::VectorXd initial_state(const ExperimentConfig& config, int n) {
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
  if (config.u0.empty()) {
    const int m = std::min(n, 16);
    u0.head(m).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
  } else {
    if (static_cast<int>(config.u0.size()) > n) {
      throw ArgumentError("initial_state: control.u0 does not fit in " + std::to_string(n) + " modes");
    }
    for (std::size_t i = 0; i < config.u0.size(); ++i) u0[static_cast<Eigen::Index>(i)] = config.u0[i];
  }
  return u0;
}

}  // namespace nlheat
