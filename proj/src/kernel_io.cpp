#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlheat/errors.hpp"
#include "nlheat/format.hpp"
#include "nlheat/nonlocal_kernel.hpp"

namespace nlheat {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::vector<double> parse_list(std::string_view text, std::string_view key) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const auto v = parse_double(item);
    if (!v || !std::isfinite(*v)) {
      throw FormatError("load_kernel: bad number '" + std::string(item) + "' in " + std::string(key), 1);
    }
    values.push_back(*v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

bool is_comment_or_blank(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

KernelSpec parse_inline_kernel(std::string_view text) {
  const auto tokens = split_ws(text);
  if (tokens.empty()) throw FormatError("load_kernel: empty kernel description", 1);
  const std::string_view type = tokens[0];
  auto value_of = [&](std::string_view token, std::string_view& key) {
    const std::size_t eq = token.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("load_kernel: expected key=value, got '" + std::string(token) + "'", 1);
    }
    key = token.substr(0, eq);
    return token.substr(eq + 1);
  };
  if (type == "zero") {
    if (tokens.size() != 1) throw FormatError("load_kernel: zero kernel takes no parameters", 1);
    return ZeroKernel{};
  }
  if (type == "gaussian") {
    GaussianKernel g;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      std::string_view key;
      const auto value = value_of(tokens[t], key);
      const auto v = parse_double(value);
      if (!v || !std::isfinite(*v)) {
        throw FormatError("load_kernel: bad number for " + std::string(key), 1);
      }
      if (key == "amplitude") {
        g.amplitude = *v;
      } else if (key == "width") {
        g.width = *v;
      } else {
        throw FormatError("load_kernel: unknown gaussian parameter '" + std::string(key) + "'", 1);
      }
    }
    if (!(g.width > 0.0)) throw FormatError("load_kernel: gaussian width must be positive", 1);
    return g;
  }
  if (type == "separable") {
    SeparableKernel s;
    bool have_h = false;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      std::string_view key;
      const auto value = value_of(tokens[t], key);
      if (key == "g") {
        s.g = parse_list(value, key);
      } else if (key == "h") {
        s.h = parse_list(value, key);
        have_h = true;
      } else {
        throw FormatError("load_kernel: unknown separable parameter '" + std::string(key) + "'", 1);
      }
    }
    if (s.g.empty()) throw FormatError("load_kernel: separable kernel needs g=...", 1);
    if (!have_h) s.h = s.g;
    return s;
  }
  if (type == "grid") {
    if (tokens.size() != 2) throw FormatError("load_kernel: grid kernel needs file=<path>", 1);
    std::string_view key;
    const auto value = value_of(tokens[1], key);
    if (key != "file") throw FormatError("load_kernel: grid kernel needs file=<path>", 1);
    return read_grid_kernel_file(std::string(value));
  }
  throw FormatError("load_kernel: unknown kernel type '" + std::string(type) + "'", 1);
}

KernelSpec load_kernel(std::string_view source) {
  const auto tokens = split_ws(source);
  if (!tokens.empty()) {
    const std::string_view head = tokens[0];
    if (head == "zero" || head == "gaussian" || head == "separable" || head == "grid") {
      return parse_inline_kernel(source);
    }
  }
  return read_grid_kernel_file(std::string(source));
}

GridKernel read_grid_kernel(std::istream& in) {
  GridKernel grid;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  int row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto tokens = split_ws(line);
    if (!have_header) {
      if (tokens.size() != 2) throw FormatError("load_kernel: header must be 'n ell'", line_no);
      const auto n = parse_integer(tokens[0]);
      const auto ell = parse_double(tokens[1]);
      if (!n) throw FormatError("load_kernel: bad sample count '" + std::string(tokens[0]) + "'", line_no);
      if (*n < 2) throw FormatError("load_kernel: grid kernels need n >= 2", line_no);
      if (*n > 100000) throw FormatError("load_kernel: sample count too large", line_no);
      if (!ell || !std::isfinite(*ell) || !(*ell > 0.0)) {
        throw FormatError("load_kernel: bad domain length '" + std::string(tokens[1]) + "'", line_no);
      }
      grid.n = static_cast<int>(*n);
      grid.length = *ell;
      grid.samples.reserve(static_cast<std::size_t>(grid.n) * grid.n);
      have_header = true;
      continue;
    }
    if (row >= grid.n) {
      throw FormatError("load_kernel: non-square sample block, more than " + std::to_string(grid.n) + " rows",
                        line_no);
    }
    if (static_cast<int>(tokens.size()) != grid.n) {
      throw FormatError("load_kernel: non-square sample block, row has " + std::to_string(tokens.size()) +
                            " values, expected " + std::to_string(grid.n),
                        line_no);
    }
    for (const auto token : tokens) {
      const auto v = parse_double(token);
      if (!v) throw FormatError("load_kernel: bad sample '" + std::string(token) + "'", line_no);
      if (!std::isfinite(*v)) throw FormatError("load_kernel: NaN or infinite sample", line_no);
      grid.samples.push_back(*v);
    }
    ++row;
  }
  if (!have_header) throw FormatError("load_kernel: missing header 'n ell'", line_no + 1);
  if (row != grid.n) {
    throw FormatError("load_kernel: non-square sample block, " + std::to_string(row) + " rows, expected " +
                          std::to_string(grid.n),
                      line_no + 1);
  }
  return grid;
}

GridKernel read_grid_kernel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("load_kernel: cannot open grid kernel file '" + path + "'", 0);
  return read_grid_kernel(in);
}

void write_grid_kernel(std::ostream& out, const GridKernel& grid) {
  out << grid.n << ' ' << format_double(grid.length) << '\n';
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      if (j > 0) out << ' ';
      out << format_double(grid.sample(i, j));
    }
    out << '\n';
  }
}

}  // namespace nlheat
