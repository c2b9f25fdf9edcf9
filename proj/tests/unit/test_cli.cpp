#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "afgd/cli.hpp"

using namespace afgd;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out, err;
};

CliResult invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "afgd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = afgd::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "afgd_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

const std::string kData = std::string(AFGD_SOURCE_DIR) + "/data/";
const std::string kScenarios = std::string(AFGD_SOURCE_DIR) + "/scenarios/";

}  // namespace

TEST(Cli, HelpForEverySubcommand) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"--help"}, {"run", "--help"}, {"certify", "--help"},
        {"search", "--help"}, {"sweep", "--help"}, {"regress", "--help"}}) {
    const auto r = invoke(args);
    EXPECT_EQ(r.code, cli::kExitOk) << args.front();
    EXPECT_NE(r.out.find("AFGD_OUT_DIR"), std::string::npos) << args.front();
  }
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"run"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"run", "sim1", "--alpha", "abc"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"certify"}).code, cli::kExitUsage);
}

TEST(Cli, RunBuiltinWritesTrajectories) {
  const auto dir = scratch("run_sim1");
  const auto r = invoke({"run", "sim1", "--out", dir.string()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  for (const char* m : {"AFOGD", "GD", "FOGD"})
    EXPECT_TRUE(fs::exists(dir / (std::string("sim1_") + m + ".csv"))) << m;
  EXPECT_TRUE(fs::exists(dir / "sim1_summary.json"));
  EXPECT_NE(r.out.find("alpha_GD"), std::string::npos);
}

TEST(Cli, RunMissingScenarioIsUsageError) {
  const auto r = invoke({"run", "no_such_scenario.toml"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("not found"), std::string::npos);
}

TEST(Cli, RunMalformedScenarioIsUsageError) {
  const auto dir = scratch("bad_scenario");
  std::ofstream(dir / "bad.toml") << "name = \"x\"\n[objective]\nkind = \"cubic\"\n";
  const auto r = invoke({"run", (dir / "bad.toml").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find(":3"), std::string::npos) << r.err;
}

TEST(Cli, MethodFilterAndOverride) {
  const auto dir = scratch("filter");
  const auto r = invoke({"run", "sim1", "--method", "afogd", "--alpha", "0.1", "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_FALSE(fs::exists(dir / "sim1_GD.csv"));
  const auto csv = lines(slurp(dir / "sim1_AFOGD.csv"));
  ASSERT_FALSE(csv.empty());
  EXPECT_EQ(csv[0].rfind("# method=AFOGD kind=AFOGD alpha=0.10000000000000001 ", 0), 0u) << csv[0];
  EXPECT_EQ(invoke({"run", "sim1", "--method", "nesterov", "--out", dir.string()}).code,
            cli::kExitUsage);
  EXPECT_EQ(invoke({"run", "sim1", "--mu", "2.5", "--out", dir.string()}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"run", "sim1", "--seed-x0", "1,x", "--out", dir.string()}).code,
            cli::kExitUsage);
}

TEST(Cli, InlineAndFileScenariosProduceIdenticalOutput) {
  const auto a = scratch("inline"), b = scratch("file");
  ASSERT_EQ(invoke({"run", "sim2", "--out", a.string()}).code, cli::kExitOk);
  ASSERT_EQ(invoke({"run", kScenarios + "sim2.toml", "--out", b.string()}).code, cli::kExitOk);
  for (const char* f : {"sim2_AFOAGD.csv", "sim2_HeavyBall.csv", "sim2_GD.csv", "sim2_FOGD.csv",
                        "sim2_summary.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, OutDirFromEnvironment) {
  const auto dir = scratch("env");
  ::setenv(cli::kOutDirEnv, dir.string().c_str(), 1);
  const auto r = invoke({"run", "sim1", "--method", "GD"});
  ::unsetenv(cli::kOutDirEnv);
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "sim1_GD.csv"));
  // --out still wins
  const auto flag = scratch("env_flag");
  ::setenv(cli::kOutDirEnv, dir.string().c_str(), 1);
  invoke({"run", "sim1", "--method", "FOGD", "--out", flag.string()});
  ::unsetenv(cli::kOutDirEnv);
  EXPECT_TRUE(fs::exists(flag / "sim1_FOGD.csv"));
  EXPECT_FALSE(fs::exists(dir / "sim1_FOGD.csv"));
}

TEST(Cli, CertifyPublishedFixturesFail) {
  // the published matrices violate their LMIs by about 0.4 and 1.7; see the
  // acceptance report for the analysis
  const auto p2 = invoke({"certify", "--cert", kData + "sim2_p2.json"});
  EXPECT_EQ(p2.code, cli::kExitFailure);
  EXPECT_NE(p2.out.find("INVALID"), std::string::npos);
  EXPECT_NE(p2.out.find("only one psi case"), std::string::npos);
  EXPECT_EQ(invoke({"certify", "--cert", kData + "sim2_p1.json"}).code, cli::kExitFailure);
}

TEST(Cli, CertifyTheoremOneFixture) {
  const auto r = invoke({"certify", "--cert", kData + "sim2_theorem1.json"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  EXPECT_NE(r.out.find("verdict: valid"), std::string::npos);
  // rate below the closed-form minimum
  const auto dir = scratch("t1");
  std::ofstream(dir / "low.json")
      << R"({"params": {"m": 2, "L": 8, "alpha": 0.1, "eta": 0, "c1": 0.5, "c2": 1},
            "tol": 1e-9,
            "certificates": [{"case": "theorem1", "rho_sq": 0.05, "h": 0.1, "p": [1]}]})";
  EXPECT_EQ(invoke({"certify", "--cert", (dir / "low.json").string()}).code, cli::kExitFailure);
}

TEST(Cli, CertifyErrors) {
  EXPECT_EQ(invoke({"certify", "--cert", kData + "missing.json"}).code, cli::kExitUsage);
  const auto dir = scratch("cert_err");
  std::ofstream(dir / "broken.json") << "{\"params\": ";
  EXPECT_EQ(invoke({"certify", "--cert", (dir / "broken.json").string()}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"certify", "--cert", kData + "sim2_theorem1.json", "--m", "-1"}).code,
            cli::kExitUsage);
}

TEST(Cli, SearchThenCertifyRoundTrip) {
  const auto dir = scratch("search");
  const auto path = (dir / "cert.json").string();
  const auto s = invoke({"search", "--m", "2", "--L", "8", "--alpha", "0.1", "--eta", "0.2",
                      "--c1", "0.5", "--c2", "1", "--out", path});
  ASSERT_EQ(s.code, cli::kExitOk) << s.err;
  const auto doc = read_certificate_file(path);
  ASSERT_EQ(doc.certificates.size(), 2u);
  for (const auto& c : doc.certificates) {
    EXPECT_GE(c.rho_sq, 0.807);
    EXPECT_LE(c.rho_sq, 0.85);
  }
  const auto c = invoke({"certify", "--cert", path});
  EXPECT_EQ(c.code, cli::kExitOk) << c.out;

  // the same document with -P is rejected
  CertificateDocument neg = doc;
  for (auto& cert : neg.certificates) cert.p = -cert.p;
  write_certificate_file(dir / "neg.json", neg);
  const auto n = invoke({"certify", "--cert", (dir / "neg.json").string()});
  EXPECT_EQ(n.code, cli::kExitFailure);
  EXPECT_NE(n.out.find("not positive definite"), std::string::npos);
}

TEST(Cli, SearchClosedForm) {
  const auto dir = scratch("search_afogd");
  const auto path = (dir / "t1.json").string();
  const auto r = invoke({"search", "--method", "afogd", "--m", "2", "--L", "8", "--alpha", "0.1",
                      "--c1", "0.5", "--c2", "1", "--out", path});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto doc = read_certificate_file(path);
  ASSERT_EQ(doc.certificates.size(), 1u);
  EXPECT_NEAR(doc.certificates[0].rho_sq, 0.84, 1e-15);
  EXPECT_DOUBLE_EQ(doc.certificates[0].h, 0.1);
  EXPECT_EQ(invoke({"certify", "--cert", path}).code, cli::kExitOk);
}

TEST(Cli, SearchInfeasibleAndInvalid) {
  EXPECT_EQ(invoke({"search", "--method", "afogd", "--m", "2", "--L", "8", "--alpha", "100"}).code,
            cli::kExitFailure);
  EXPECT_EQ(invoke({"search", "--m", "2", "--L", "8", "--alpha", "100", "--eta", "0.2"}).code,
            cli::kExitFailure);
  EXPECT_EQ(invoke({"search", "--m", "0", "--L", "8", "--alpha", "0.1"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"search", "--m", "2", "--L", "8", "--alpha", "0.1", "--method", "gd"}).code,
            cli::kExitUsage);
  EXPECT_EQ(invoke({"search", "--m", "2", "--L", "8"}).code, cli::kExitUsage);
}

TEST(Cli, SweepMuGrid) {
  const auto dir = scratch("sweep");
  const auto r = invoke({"sweep", "sim1", "--param", "mu=0.5,1,1.5,1.7", "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto csv = lines(slurp(dir / "sim1_sweep.csv"));
  ASSERT_EQ(csv.size(), 5u);
  EXPECT_EQ(csv[0], "mu,method,stop_reason,steps,final_error,final_value,error");
  // mu = 1 is plain GD: same number of steps as the GD run of the scenario
  const auto gd = run_simulation1().method("GD");
  EXPECT_EQ(csv[2].rfind("1,AFOGD,GradientTolerance," + std::to_string(gd.trajectory.steps()) +
                             ",", 0),
            0u)
      << csv[2];
}

TEST(Cli, SweepCertifyColumnAndErrors) {
  const auto dir = scratch("sweep_cert");
  const auto r = invoke({"sweep", "sim1", "--param", "alpha=0.05,0.1", "--param", "c2=1.3",
                      "--certify", "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto csv = lines(slurp(dir / "sim1_sweep.csv"));
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_NE(csv[0].find(",certified_rho,"), std::string::npos);
  EXPECT_EQ(invoke({"sweep", "sim1", "--param", "mu="}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"sweep", "sim1", "--param", "beta=1,2"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"sweep", "sim1", "--param", "mu"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"sweep", "sim1"}).code, cli::kExitUsage);
}

TEST(Cli, Regress) {
  const auto dir = scratch("regress");
  const auto r = invoke({"regress", "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "regress_AFOAGD.csv"));
  EXPECT_TRUE(fs::exists(dir / "regress_Nesterov.csv"));
  EXPECT_NE(r.out.find("normal equations: theta = (0.355"), std::string::npos) << r.out;

  std::ofstream(dir / "pts.csv") << "x,y\n0,1\n1,3\n2,5\n3,7\n";
  const auto d = invoke({"regress", "--data", (dir / "pts.csv").string(), "--out", dir.string()});
  EXPECT_EQ(d.code, cli::kExitOk) << d.err;
  EXPECT_NE(d.out.find("normal equations: theta = (1"), std::string::npos) << d.out;

  EXPECT_EQ(invoke({"regress", "--theta", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(invoke({"regress", "--data", (dir / "none.csv").string()}).code, cli::kExitUsage);
}

TEST(Cli, BinaryExitStatus) {
  const std::string bin = AFGD_CLI_PATH;
  const int help = std::system((bin + " --help > /dev/null").c_str());
  ASSERT_TRUE(WIFEXITED(help));
  EXPECT_EQ(WEXITSTATUS(help), 0);
  const int missing = std::system((bin + " run /nonexistent.toml 2> /dev/null").c_str());
  ASSERT_TRUE(WIFEXITED(missing));
  EXPECT_EQ(WEXITSTATUS(missing), 2);
}
