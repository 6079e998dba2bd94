#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const std::string kCli = MIMOSIM_CLI_PATH;
const std::string kConfigs = MIMOSIM_CONFIG_DIR;

int run(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mimosim_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, SuccessfulRunWritesOutputs) {
  const fs::path out = scratch("ok");
  const int rc = run("--config " + kConfigs + "/minimal.ini --out " + out.string() +
                     " --snr 0,10 --trials 2 --frames 5 --threads 1 --scenario cf -q");
  EXPECT_EQ(rc, 0);
  EXPECT_TRUE(fs::exists(out / "results.csv"));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  const std::string csv = slurp(out / "results.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "topology,precoder,allocator,snr_db,ber,ber_ci95,sum_rate,sum_rate_sem,bits_total,realizations");
  fs::remove_all(out);
}

TEST(Cli, SeedOverrideIsReproducible) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  const std::string common = "--config " + kConfigs + "/minimal.ini --snr 5 --trials 2 --frames 5 -q --seed 99";
  ASSERT_EQ(run(common + " --threads 1 --out " + a.string()), 0);
  ASSERT_EQ(run(common + " --threads 4 --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "results.csv"), slurp(b / "results.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, ConfigErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("--config /nonexistent.ini"), 1);
  EXPECT_EQ(run("--config " + kConfigs + "/minimal.ini --snr 1:x"), 1);
  EXPECT_EQ(run("--config " + kConfigs + "/minimal.ini --bogus"), 1);

  const fs::path bad = scratch("bad.ini");
  std::ofstream(bad) << "[sweep]\nfoo = 1\n";
  EXPECT_EQ(run("--config " + bad.string()), 1);
  fs::remove(bad);
}

TEST(Cli, RuntimeErrorsExitTwo) {
  // Uninformative estimates make every zero-forcing trial singular.
  EXPECT_EQ(run("--config " + kConfigs + "/minimal.ini --snr 0 --trials 2 --frames 2 --precoder ZF --alloc UPA"
                " --sigma-e2 1 -q --out " + scratch("abort").string()),
            2);
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "x";
  EXPECT_EQ(run("--config " + kConfigs + "/minimal.ini --snr 0 --trials 1 --frames 2 -q --out " +
                (blocker / "sub").string()),
            2);
  fs::remove(blocker);
}

TEST(Cli, VersionAndHelp) {
  EXPECT_EQ(run("--version"), 0);
  EXPECT_EQ(run("--help"), 0);
}
