#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "icv/kg_client.h"
#include "icv/metrics.h"

namespace icv {
namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the icv binary with `args` through the shell.
Result Icv(const std::string &args) {
  const std::string err_path = testing::TempDir("cli-stderr") + "/err.txt";
  const std::string command = std::string(ICV_BINARY) + " " + args + " 2>" + err_path;
  Result r;
  FILE *pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf;
  size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = testing::ReadFile(err_path);
  return r;
}

std::string Data(const std::string &name) { return testing::DataPath(name); }
std::string Golden(const std::string &name) {
  return std::string(ICV_GOLDEN_DIR) + "/" + name;
}

std::string DemoArgs() {
  return "--corpus " + Data("ideas.json") + " --gold " + Data("demo_gold.json") +
         " --lexicon " + Data("demo.tsv");
}

TEST(Cli, SweepMatchesGoldenAndHas101Rows) {
  const Result r = Icv("sweep " + DemoArgs());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, testing::ReadFile(Golden("demo_sweep.csv")));
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 102);
  EXPECT_NE(r.err.find("best gamma 0.4100"), std::string::npos) << r.err;
}

TEST(Cli, SweepBestRowEqualsManualRecompute) {
  const std::string dir = testing::TempDir("cli-sweep");
  const Result r = Icv("sweep " + DemoArgs() + " --format json --out " + dir + "/s.json");
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json doc = nlohmann::json::parse(testing::ReadFile(dir + "/s.json"));
  EXPECT_EQ(doc["rows"].size(), 101u);
  const double gamma = doc["bestGamma"].get<double>();

  const Corpus corpus = LoadCorpus(Data("ideas.json"));
  const GoldStandard gold = LoadGold(Data("demo_gold.json"), corpus);
  const LocalBackend backend(std::make_shared<Lexicon>(LoadLexicon(Data("demo.tsv"))));
  std::vector<AutoAnnotation> runs;
  for (const Idea &idea : corpus) runs.push_back(AnnotateAllComputer(backend, idea, gamma));
  const QualityReport q = ScoreAnnotations(ToAnnotations(runs), gold);
  char expected[160];
  std::snprintf(expected, sizeof(expected),
                "best gamma %.4f: macro P %.4f R %.4f F %.4f, micro P %.4f R %.4f F %.4f",
                gamma, q.macro_precision, q.macro_recall, q.macro_f, q.micro_precision,
                q.micro_recall, q.micro_f);
  EXPECT_NE(r.out.find(expected), std::string::npos) << r.out;
  for (const auto &row : doc["rows"]) {
    EXPECT_LE(row["macro"]["f"].get<double>(), q.macro_f + 1e-12);
  }
}

TEST(Cli, SpotMatchesGolden) {
  const Result r = Icv("spot --corpus " + Data("ideas.json") + " --lexicon " +
                       Data("demo.tsv") + " --gamma 0.5");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, testing::ReadFile(Golden("demo_spot_050.json")));
}

TEST(Cli, KappaPrintsThreeDecimals) {
  Result r = Icv("kappa " + Golden("kappa_a.json") + " " + Golden("kappa_b.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0.400\n");
  r = Icv("kappa " + Golden("kappa_a.json") + " " + Golden("kappa_a.json"));
  EXPECT_EQ(r.out, "1.000\n");
}

TEST(Cli, SimulateEvaluateCompare) {
  const std::string dir = testing::TempDir("cli-sim");
  Result r = Icv("simulate --config validated-threshold --policy oracle -n 2 " + DemoArgs() +
                 " --out " + dir + "/vt.json --report /dev/null");
  ASSERT_EQ(r.code, 0) << r.err;
  r = Icv("evaluate " + dir + "/vt.json --gold " + Data("demo_gold.json") + " --format csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, testing::ReadFile(Golden("demo_evaluate_oracle.csv")));

  r = Icv("simulate --config baseline --config automatic-threshold --policy random -n 3 " +
          DemoArgs() + " --out-dir " + dir + "/ex --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report["configurations"].size(), 2u);
  r = Icv("compare " + dir + "/ex/baseline-random.json " + dir +
          "/ex/automatic-threshold-random.json --gold " + Data("demo_gold.json") +
          " --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out), report);
  r = Icv("compare " + dir + "/ex/baseline-random.json --gold " + Data("demo_gold.json") +
          " --format csv");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "metric,baseline");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(Icv("").code, 2);
  EXPECT_EQ(Icv("frobnicate").code, 2);
  EXPECT_EQ(Icv("sweep --corpus x").code, 2);
  Result r = Icv("sweep " + DemoArgs() + " --step 0");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("step must be positive"), std::string::npos);
  EXPECT_EQ(Icv("simulate --config loa2 " + DemoArgs()).code, 2);
  EXPECT_EQ(Icv("sweep --corpus /nonexistent.json --gold /nonexistent.json --lexicon " +
                Data("demo.tsv"))
                .code,
            3);
  // A gold file for another corpus fails validation.
  const std::string dir = testing::TempDir("cli-codes");
  const testing::FixtureFiles other =
      testing::WriteFixture(testing::HighConfidenceFixture(), dir);
  EXPECT_EQ(Icv("sweep --corpus " + Data("ideas.json") + " --gold " + other.gold +
                " --lexicon " + Data("demo.tsv"))
                .code,
            4);
  // An unreachable remote backend is an I/O failure.
  r = Icv("sweep --corpus " + Data("ideas.json") + " --gold " + Data("demo_gold.json") +
          " --endpoint http://127.0.0.1:1/rest/candidates --timeout-ms 200");
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, ServeReportsItsPort) {
  const std::string dir = testing::TempDir("cli-serve");
  const std::string log = dir + "/serve.log";
  const std::string command = std::string(ICV_BINARY) + " serve --port 0 --data-dir " + dir +
                              "/data > " + log + " 2>&1 & echo $!";
  FILE *pipe = ::popen(command.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  int pid = 0;
  ASSERT_EQ(std::fscanf(pipe, "%d", &pid), 1);
  ::pclose(pipe);
  std::string out;
  for (int i = 0; i < 100 && out.find("port ") == std::string::npos; ++i) {
    ::usleep(50'000);
    out = testing::ReadFile(log);
  }
  ::kill(pid, SIGTERM);
  for (int i = 0; i < 100 && ::kill(pid, 0) == 0; ++i) ::usleep(50'000);
  EXPECT_NE(out.find("listening on http://127.0.0.1:"), std::string::npos) << out;
  const size_t at = out.find("port ");
  ASSERT_NE(at, std::string::npos);
  EXPECT_GT(std::stoi(out.substr(at + 5)), 0);
}

}  // namespace
}  // namespace icv
