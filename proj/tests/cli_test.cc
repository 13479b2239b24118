// Runs the nlheat executable and checks the exit-code contract.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "test_files.hpp"

namespace nlheat {
namespace {

using testing::read_file;
using testing::scratch_dir;
using testing::source_path;
using testing::write_file;

int run(const std::string& args) {
  const std::string cmd = std::string(NLHEAT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string conf(const std::string& name) { return source_path("configs/" + name + ".conf").string(); }

GTEST_TEST(Cli, SuccessAndOverrides) {
  const auto dir = scratch_dir("cli_cost");
  EXPECT_EQ(run("cost -c " + conf("scalar") + " --T 0.1 --set output.dir=" + dir.string()), 0);
  const std::string csv = read_file(dir / "cost.csv");
  EXPECT_NE(csv.find("\n0.1,1,3.18433551"), std::string::npos) << csv;
  EXPECT_NE(read_file(dir / "config.resolved").find("time.T = 0.1\n"), std::string::npos);
  // Positional overrides, with the short keys.
  const auto dir2 = scratch_dir("cli_cost_positional");
  EXPECT_EQ(run("cost T=1e-7 N=1 output.dir=" + dir2.string() + " -c " + conf("scalar")), 0);
  EXPECT_NE(read_file(dir2 / "config.resolved").find("time.T = 1e-07\n"), std::string::npos)
      << read_file(dir2 / "config.resolved");
}

GTEST_TEST(Cli, UsageAndDomainErrorsExitOne) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("cost"), 1);                                   // missing --config
  EXPECT_EQ(run("plot -c " + conf("scalar")), 1);              // unknown verb
  EXPECT_EQ(run("cost -c /nonexistent/exp.conf"), 1);          // unreadable file
  EXPECT_EQ(run("cost -c " + conf("scalar") + " --set basis.M=3"), 1);  // unknown key
  EXPECT_EQ(run("cost -c " + conf("scalar") + " --T -1"), 1);  // bad value
  const auto dir = scratch_dir("cli_format");
  write_file(dir / "bad.conf", read_file(conf("scalar")) + "basis.N = 2\n");
  EXPECT_EQ(run("cost -c " + (dir / "bad.conf").string()), 1);  // duplicate key
}

GTEST_TEST(Cli, NumericErrorsExitTwo) {
  const auto dir = scratch_dir("cli_numeric");
  // A small control set at N = 32 gives a numerically singular mass matrix.
  EXPECT_EQ(run("zeta -c " + conf("default") + " N=32 domain.omega_lo=0.45 domain.omega_hi=0.55 output.dir=" +
                dir.string()),
            2);
  EXPECT_EQ(run("control-hum -c " + conf("default") + " N=32 domain.omega_lo=0.45 domain.omega_hi=0.55 output.dir=" +
                dir.string()),
            2);
}

GTEST_TEST(Cli, CertifyAllIsDeterministic) {
  const auto a = scratch_dir("cli_certify_a");
  const auto b = scratch_dir("cli_certify_b");
  EXPECT_EQ(run("certify-all -c " + conf("default") + " output.dir=" + a.string()), 0);
  EXPECT_EQ(run("certify-all -c " + conf("default") + " --threads 2 output.dir=" + b.string()), 0);
  const std::string first = read_file(a / "certify.csv");
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, read_file(b / "certify.csv"));
  EXPECT_EQ(first.find(",fail,"), std::string::npos) << first;
}

}  // namespace
}  // namespace nlheat
