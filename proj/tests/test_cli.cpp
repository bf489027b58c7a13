#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seba/cli.hpp"

namespace fs = std::filesystem;
using seba::read_file;

namespace {

const char* kPhi = "1.5707963267948966";

struct Result {
  int code;
  std::string out, err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("seba-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" + SEBA_CLI_PATH + "' " + args + " >'" +
                            out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out), read_file(err)};
  }

  std::string file(const std::string& name) { return read_file(dir_ / name); }
  fs::path path(const std::string& name) { return dir_ / name; }

  void make_spectra(double cutoff = 2000.0) {
    ASSERT_EQ(run("norms --dim 2 --coeffs 1,1 --cutoff " + std::to_string(cutoff) + " --out n.csv").code, 0);
    ASSERT_EQ(run(std::string("solve --norms n.csv --phi ") + kPhi + " --out p.csv").code, 0);
  }

  fs::path dir_;
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(Cli, NormsMatchesLatticeExample) {
  const auto r = run("norms --dim 2 --coeffs 1,1 --cutoff 10 --out n.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = file("n.csv");
  EXPECT_EQ(count_lines(text), 9u);
  EXPECT_EQ(text.substr(text.find('\n') + 1), "0,1\n1,4\n2,4\n4,4\n5,8\n8,4\n9,4\n10,8\n");
  EXPECT_TRUE(r.out.empty());
}

TEST_F(Cli, Version) {
  const auto r = run("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(seba::kToolkitVersion), std::string::npos);
  EXPECT_NE(r.out.find("norms schema v1"), std::string::npos);
}

TEST_F(Cli, SchemaVersionMismatchIsUsageError) {
  make_spectra(100.0);
  auto text = file("n.csv");
  text.replace(text.find("v1"), 2, "v2");
  std::ofstream(path("v2.csv")) << text;
  const auto r = run(std::string("solve --norms v2.csv --phi ") + kPhi + " --out q.csv");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unsupported schema version v2"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("q.csv")));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("norms --dim 2 --coeffs 1,1 --cutoff 10 --out n.csv --bogus 1").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("norms --dim 2 --coeffs 1,1 --out n.csv").code, 2);
  EXPECT_EQ(run("norms --dim 3 --coeffs 1,1 --cutoff 10 --out n.csv").code, 2);
  EXPECT_EQ(run("solve --norms missing.csv --phi 1 --out p.csv").code, 2);
  EXPECT_EQ(run("greedy3 --coeffs 1,1,1 --target 5 --random 3").code, 2);
  EXPECT_EQ(run("greedy3 --coeffs 1,1,1").code, 2);
  ASSERT_EQ(run("norms --dim 2 --coeffs 1,1 --cutoff 100 --out n.csv").code, 0);
  const auto r = run("solve --norms n.csv --phi 3.141592653589793 --out p.csv");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unperturbed"), std::string::npos);
}

TEST_F(Cli, ComputationErrors) {
  make_spectra(2000.0);
  // 620 levels are too few for spacing statistics.
  const auto r = run("stats --norms n.csv --perturbed p.csv --xmax 1000 --bins 10 --out s.json");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("at least 1000"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("s.json")));
  const auto h = run("heat --norms n.csv --perturbed p.csv --betas 0.01 --out h.csv");
  EXPECT_EQ(h.code, 1);
  EXPECT_NE(h.err.find("x_max >= 4000"), std::string::npos);
  ASSERT_EQ(run("norms --dim 2 --coeffs 1.6180339887498949,0.6180339887498949 --cutoff 2000 --out g.csv").code, 0);
  EXPECT_EQ(run("heat --norms g.csv --perturbed p.csv --betas 0.1 --out h.csv").code, 1);
}

TEST_F(Cli, RerunsAreByteIdentical) {
  std::map<std::string, std::string> first;
  const std::vector<std::string> cmds = {
      "norms --dim 2 --coeffs 1.6180339887498949,0.6180339887498949 --cutoff 3000 --out n.csv",
      std::string("solve --norms n.csv --phi ") + kPhi + " --xmax 1500 --workers 3 --out p.csv",
      "stats --norms n.csv --perturbed p.csv --xmax 1500 --bins 25 --out s.json",
      "heat --norms n.csv --perturbed p.csv --betas 0.2,0.1,0.05 --out h.csv",
      std::string("trace-check --dim 2 --norms n.csv --perturbed p.csv --phi ") + kPhi + " --beta 0.1 --out t.json"};
  const std::vector<std::string> outs = {"n.csv", "p.csv", "s.json", "h.csv", "t.json"};
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      const auto r = run(cmds[i]);
      ASSERT_EQ(r.code, 0) << cmds[i] << "\n" << r.err;
      if (pass == 0) first[outs[i]] = file(outs[i]);
      else EXPECT_EQ(file(outs[i]), first[outs[i]]) << outs[i];
    }
  const auto report = seba::json::parse(first["t.json"]);
  EXPECT_LE(report["report"]["abs_error"].get<double>(), 1e-6);
  EXPECT_EQ(report["config"]["beta"], "0.1");
  const auto stats = seba::json::parse(first["s.json"]);
  EXPECT_EQ(stats["config"]["bins"], "25");
  EXPECT_EQ(stats["report"]["histogram"]["norms"]["densities"].size(), 25u);
}

TEST_F(Cli, WorkerCountDoesNotChangeOutput) {
  ASSERT_EQ(run("norms --dim 2 --coeffs 1,1 --cutoff 4000 --out n.csv").code, 0);
  ASSERT_EQ(run("solve --norms n.csv --phi 2 --workers 1 --out p1.csv").code, 0);
  ASSERT_EQ(run("solve --norms n.csv --phi 2 --workers 4 --out p4.csv").code, 0);
  EXPECT_EQ(file("p1.csv"), file("p4.csv"));
}

TEST_F(Cli, ConfigFileWithCommandLineOverride) {
  std::ofstream(path("run.cfg")) << "# norms settings\ndim = 2\ncoeffs=1,1\ncutoff=10\nout=from_config.csv\n";
  ASSERT_EQ(run("norms --config run.cfg").code, 0);
  EXPECT_EQ(count_lines(file("from_config.csv")), 9u);
  ASSERT_EQ(run("norms --config run.cfg --cutoff 5 --out override.csv").code, 0);
  EXPECT_EQ(count_lines(file("override.csv")), 6u);
  EXPECT_FALSE(fs::exists(path("from_config.csv.tmp")));
  std::ofstream(path("bad.cfg")) << "dim 2\n";
  EXPECT_EQ(run("norms --config bad.cfg").code, 2);
  std::ofstream(path("unknown.cfg")) << "dim=2\ncoeffs=1,1\ncutoff=10\nout=x.csv\ncolour=blue\n";
  EXPECT_EQ(run("norms --config unknown.cfg").code, 2);
}

TEST_F(Cli, Greedy) {
  const auto r = run("greedy3 --coeffs 1,1,1 --target 123456.789");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = seba::json::parse(r.out);
  EXPECT_EQ(j["report"]["m"], 351);
  EXPECT_EQ(j["report"]["n"], 15);
  EXPECT_EQ(j["report"]["k"], 5);
  EXPECT_TRUE(j["report"]["bounds_hold"].get<bool>());
  const auto a = run("greedy3 --random 2000 --seed 9");
  const auto b = run("greedy3 --random 2000 --seed 9");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(seba::json::parse(a.out)["report"]["violations"], 0);
}

TEST_F(Cli, PipelineCachesAndDetectsCorruption) {
  const std::string cmd = std::string("pipeline --dim 2 --coeffs 1,1 --phi ") + kPhi +
                          " --xmax 1000 --workers 2 --cache-dir cache --out-dir out";
  const auto r1 = run(cmd);
  ASSERT_EQ(r1.code, 0) << r1.err;
  EXPECT_NE(r1.err.find("solve: computing"), std::string::npos);
  const std::vector<std::string> reports = {"out/stats.json", "out/heat.csv", "out/trace.json"};
  std::vector<std::string> first;
  for (const auto& f : reports) first.push_back(file(f));
  const auto trace = seba::json::parse(first[2]);
  EXPECT_LE(trace["report"]["abs_error"].get<double>(), 1e-6);
  EXPECT_EQ(trace["config"]["xmax"], "1000");
  EXPECT_FALSE(seba::json::parse(first[0])["report"]["ratio"].is_null());

  const auto r2 = run(cmd);
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_NE(r2.err.find("norms: cache hit"), std::string::npos);
  EXPECT_NE(r2.err.find("solve: cache hit"), std::string::npos);
  for (std::size_t i = 0; i < reports.size(); ++i) EXPECT_EQ(file(reports[i]), first[i]) << reports[i];

  // Corrupt one row of the cached perturbed spectrum.
  fs::path cached;
  for (const auto& e : fs::directory_iterator(path("cache")))
    if (e.path().filename().string().rfind("perturbed-", 0) == 0 && e.path().extension() == ".csv") cached = e.path();
  ASSERT_FALSE(cached.empty());
  auto text = read_file(cached);
  const auto row = text.find("\n5,");
  ASSERT_NE(row, std::string::npos);
  text[text.find(',', row + 3) - 1] ^= 1;
  std::ofstream(cached, std::ios::binary | std::ios::trunc) << text;
  const auto r3 = run(cmd);
  ASSERT_EQ(r3.code, 0) << r3.err;
  EXPECT_NE(r3.err.find("solve: computing"), std::string::npos);
  EXPECT_NE(r3.err.find("norms: cache hit"), std::string::npos);
  for (std::size_t i = 0; i < reports.size(); ++i) EXPECT_EQ(file(reports[i]), first[i]) << reports[i];

  // A changed upstream parameter never reuses the old spectrum.
  const auto r4 = run(cmd + " --tol 1e-11");
  ASSERT_EQ(r4.code, 0) << r4.err;
  EXPECT_NE(r4.err.find("solve: computing"), std::string::npos);
}

TEST_F(Cli, InProcessDispatch) {
  std::ostringstream out, err;
  EXPECT_EQ(seba::cli::dispatch({"--version"}, out, err), 0);
  EXPECT_NE(out.str().find("seba"), std::string::npos);
  EXPECT_EQ(seba::cli::dispatch({"norms", "--dim", "2"}, out, err), 2);
}
