#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nlheat/errors.hpp"
#include "nlheat/nonlocal_kernel.hpp"

namespace nlheat {
namespace {

int format_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    read_grid_kernel(in);
  } catch (const FormatError& e) {
    return e.line();
  }
  return -1;
}

GTEST_TEST(LoadKernel, InlineZero) {
  EXPECT_TRUE(std::holds_alternative<ZeroKernel>(load_kernel("zero")));
}

GTEST_TEST(LoadKernel, InlineGaussianRoundTrip) {
  const KernelSpec spec = load_kernel("gaussian amplitude=5 width=0.2");
  const auto* g = std::get_if<GaussianKernel>(&spec);
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(g->amplitude, 5.0);
  EXPECT_EQ(g->width, 0.2);
}

GTEST_TEST(LoadKernel, InlineSeparable) {
  const KernelSpec spec = load_kernel("separable g=1,0.5 h=0,2,3");
  const auto* s = std::get_if<SeparableKernel>(&spec);
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->g, (std::vector<double>{1.0, 0.5}));
  EXPECT_EQ(s->h, (std::vector<double>{0.0, 2.0, 3.0}));
  const KernelSpec same_spec = load_kernel("separable g=2");
  const auto* same = std::get_if<SeparableKernel>(&same_spec);
  ASSERT_NE(same, nullptr);
  EXPECT_EQ(same->h, same->g);
}

GTEST_TEST(LoadKernel, InlineErrors) {
  EXPECT_THROW(load_kernel("gaussian amplitude=x"), FormatError);
  EXPECT_THROW(load_kernel("gaussian width=-1"), FormatError);
  EXPECT_THROW(load_kernel("gaussian depth=1"), FormatError);
  EXPECT_THROW(load_kernel("zero amplitude=1"), FormatError);
  EXPECT_THROW(load_kernel("separable h=1"), FormatError);
  EXPECT_THROW(load_kernel("separable g=1,,2"), FormatError);
  EXPECT_THROW(parse_inline_kernel("wavelet"), FormatError);
  EXPECT_THROW(load_kernel("/nonexistent/kernel.txt"), FormatError);
}

GTEST_TEST(GridFile, WriteReadRoundTripIsSymmetric) {
  const GridKernel grid =
      sample_grid_kernel([](double x, double xi) { return std::cos(3.0 * (x - xi)) + x * xi; }, 64, 1.0);
  const auto path = std::filesystem::temp_directory_path() / "nlheat_grid_roundtrip.txt";
  {
    std::ofstream out(path);
    out << "# tabulated test kernel\n";
    write_grid_kernel(out, grid);
  }
  const KernelSpec spec = load_kernel(path.string());
  const auto* back = std::get_if<GridKernel>(&spec);
  ASSERT_NE(back, nullptr);
  EXPECT_EQ(back->n, 64);
  EXPECT_EQ(back->length, 1.0);
  EXPECT_EQ(back->samples, grid.samples);
  // Samples are exactly symmetric; interpolation adds only rounding.
  for (int a = 0; a < 64; ++a) {
    for (int c = 0; c < 64; ++c) ASSERT_EQ(back->sample(a, c), back->sample(c, a));
  }
  EXPECT_LE(check_symmetry(spec, build_basis(Domain(1.0, 0.3, 0.8), 4)), 1e-15);
  const KernelSpec inline_spec = load_kernel("grid file=" + path.string());
  EXPECT_EQ(std::get<GridKernel>(inline_spec).samples, grid.samples);
  std::filesystem::remove(path);
}

GTEST_TEST(GridFile, CommentsAndBlankLines) {
  std::istringstream in("# header follows\n\n2 1.5\n# row 0\n1 2\n\n2 4\n");
  const GridKernel g = read_grid_kernel(in);
  EXPECT_EQ(g.n, 2);
  EXPECT_EQ(g.length, 1.5);
  EXPECT_EQ(g.sample(1, 1), 4.0);
}

GTEST_TEST(GridFile, ErrorsCarryLineNumbers) {
  EXPECT_EQ(format_error_line("2\n1 2\n3 4\n"), 1);                 // header
  EXPECT_EQ(format_error_line("1 1.0\n1\n"), 1);                    // n < 2
  EXPECT_EQ(format_error_line("2 -1\n1 2\n3 4\n"), 1);              // bad length
  EXPECT_EQ(format_error_line("2 1\n1 2 3\n3 4\n"), 2);             // non-square row
  EXPECT_EQ(format_error_line("2 1\n1 2\n3 4\n5 6\n"), 4);          // too many rows
  EXPECT_EQ(format_error_line("# c\n2 1\n1 2\n"), 4);               // too few rows
  EXPECT_EQ(format_error_line("2 1\n1 2\n3 nan\n"), 3);             // NaN sample
  EXPECT_EQ(format_error_line("2 1\n1 2\n3 inf\n"), 3);             // infinite sample
  EXPECT_EQ(format_error_line("2 1\n1 2\n3 4,5\n"), 3);             // bad token
  EXPECT_EQ(format_error_line(""), 1);                              // missing header
}

GTEST_TEST(GridFile, NonSquareMessage) {
  std::istringstream in("3 1\n1 2 3\n4 5\n7 8 9\n");
  try {
    read_grid_kernel(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("non-square"), std::string::npos) << e.what();
    EXPECT_EQ(e.line(), 3);
  }
}

}  // namespace
}  // namespace nlheat
