#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "rtsim_cli/cli.hpp"

namespace rtsim {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("rtsim_cli_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string config(const std::string& name) {
  return (test::source_dir() / "configs" / name).string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

TEST(Cli, RunWritesThreeFiles) {
  TempDir dir;
  auto r = call({"run", "--config", config("examples/mpcp_pair.cfg"), "--out", dir.path().string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  for (auto f : {"events.csv", "summary.csv", "samples.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  }
  EXPECT_EQ(slurp(dir.path() / "summary.csv").substr(0, 5), "task,");
}

TEST(Cli, RunIsByteIdentical) {
  TempDir a, b;
  auto cfg = config("examples/dpcp_trio.cfg");
  ASSERT_EQ(call({"run", "--config", cfg, "--out", a.path().string()}).code, 0);
  ASSERT_EQ(call({"run", "--config", cfg, "--out", b.path().string()}).code, 0);
  for (auto f : {"events.csv", "summary.csv", "samples.csv"}) {
    EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
  }
}

TEST(Cli, InvalidConfigIsTwo) {
  TempDir dir;
  auto cfg = dir.path() / "bad.cfg";
  std::ofstream(cfg) << "[system]\nprocessors = 1\nprotocol = mpcp\n\n"
                        "[task]\nid = 1\nwcet = 2\nperiod = 10\ndeadline = 20\npriority = 1\n"
                        "processor = 0\n";
  auto r = call({"run", "--config", cfg.string(), "--out", dir.path().string()});
  EXPECT_EQ(r.code, cli::kInvalidConfig);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, MissingConfigIsUsage) {
  EXPECT_EQ(call({"run", "--config", "/nonexistent/x.cfg"}).code, cli::kUsage);
  EXPECT_EQ(call({"run", "--bogus"}).code, cli::kUsage);
  EXPECT_EQ(call({}).code, cli::kUsage);
}

TEST(Cli, SweepOneRowPerCell) {
  TempDir dir;
  auto r = call({"sweep", "--config", config("examples/dpcp_trio.cfg"), "--protocol", "all",
                 "--out", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(slurp(dir.path() / "summary.csv")), 1u + 5u);

  TempDir two;
  r = call({"sweep", "--config", config("examples/dpcp_trio.cfg"), "--protocol", "mpcp,fmlp-s",
            "--overheads", config("overheads/zero.cfg"), "--overheads",
            config("overheads/mrsp.cfg"), "--out", two.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(slurp(two.path() / "summary.csv")), 1u + 4u);
}

TEST(Cli, SweepRejectsUnknownProtocol) {
  TempDir dir;
  auto r = call({"sweep", "--config", config("examples/dpcp_trio.cfg"), "--protocol", "pip",
                 "--out", dir.path().string()});
  EXPECT_EQ(r.code, cli::kUsage);
  r = call({"sweep", "--config", config("examples/dpcp_trio.cfg"), "--out", dir.path().string()});
  EXPECT_EQ(r.code, cli::kUsage);
}

TEST(Cli, VerifyOutcomes) {
  auto r = call({"verify", "--config", config("examples/mpcp_pair.cfg")});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("match"), std::string::npos);
  EXPECT_EQ(call({"verify", "--config", config("examples/dpcp_trio.cfg")}).code, cli::kOk);
  EXPECT_EQ(call({"verify", "--config", config("table1.cfg")}).code, cli::kGuard);
  r = call({"verify", "--config", config("examples/mpcp_pair.cfg"), "--mutate", "stretch-cs"});
  EXPECT_EQ(r.code, cli::kMismatch);
  EXPECT_NE(r.err.find("differs"), std::string::npos);
}

TEST(Cli, RunWithVerifyGuard) {
  TempDir dir;
  EXPECT_EQ(call({"run", "--config", config("examples/dpcp_trio.cfg"), "--verify-guard", "--out",
                  dir.path().string()})
                .code,
            cli::kOk);
  EXPECT_EQ(call({"run", "--config", config("table1.cfg"), "--verify-guard", "--out",
                  dir.path().string()})
                .code,
            cli::kGuard);
}

TEST(Cli, GenerateRoundTrips) {
  TempDir dir;
  auto file = dir.path() / "g.cfg";
  auto r = call({"generate", "--seed", "7", "--protocol", "dflp", "--out", file.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto s = load_scenario(file);
  EXPECT_EQ(s.system.protocol, Protocol::Dflp);
  EXPECT_EQ(s.tasks.size(), 8u);

  auto stdout_run = call({"generate", "--seed", "7", "--protocol", "dflp", "--out", "-"});
  EXPECT_EQ(stdout_run.out, slurp(file));

  auto t = call({"generate", "--table1", "--protocol", "dpcp", "--out", "-"});
  ASSERT_EQ(t.code, 0);
  auto shipped = slurp(test::source_dir() / "configs" / "table1.cfg");
  EXPECT_NE(shipped.find(t.out), std::string::npos);

  EXPECT_EQ(call({"generate", "--tasks", "2", "--processors", "4", "--out", "-"}).code,
            cli::kInvalidConfig);
}

}  // namespace
}  // namespace rtsim
