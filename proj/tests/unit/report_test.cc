#include <gtest/gtest.h>

#include "fixtures.h"
#include "icv/error.h"
#include "icv/report.h"
#include "icv/simulator.h"

namespace icv {
namespace {

ConfigRun MakeRun(const std::string &preset, std::vector<SessionMetrics> sessions) {
  ConfigRun run;
  run.config = PresetConfiguration(preset);
  run.idea_order = {"a", "b"};
  run.sessions = std::move(sessions);
  return run;
}

SessionMetrics M(double clicks, double time_s, double f) {
  SessionMetrics m;
  m.clicks = clicks;
  m.time_s = time_s;
  m.f = f;
  m.precision = f;
  m.recall = f;
  return m;
}

const ConfigSummary &Row(const SweetSpotReport &r, const std::string &name) {
  for (const ConfigSummary &row : r.rows) {
    if (row.name == name) return row;
  }
  throw std::runtime_error("no row " + name);
}

TEST(Frontier, CheaperButWorseAndDearerButBetterBothSurvive) {
  const SweetSpotReport r = BuildSweetSpotReport(
      {MakeRun("baseline", {M(230, 600, 0.46)}), MakeRun("ranking", {M(314, 600, 0.48)})});
  EXPECT_EQ(r.frontier, (std::vector<std::string>{"baseline", "ranking"}));
  EXPECT_TRUE(Row(r, "baseline").dominated_by.empty());
  EXPECT_TRUE(Row(r, "ranking").dominated_by.empty());
}

TEST(Frontier, DominatedRowsListTheirDominators) {
  const SweetSpotReport r = BuildSweetSpotReport(
      {MakeRun("baseline", {M(300, 700, 0.40)}), MakeRun("ranking", {M(250, 650, 0.50)}),
       MakeRun("automatic-threshold", {M(100, 300, 0.45)})});
  EXPECT_EQ(r.frontier,
            (std::vector<std::string>{"ranking", "automatic-threshold"}));
  EXPECT_EQ(Row(r, "baseline").dominated_by,
            (std::vector<std::string>{"ranking", "automatic-threshold"}));
  EXPECT_FALSE(Row(r, "baseline").on_frontier);
}

TEST(Frontier, TiesDoNotDominate) {
  const SweetSpotReport r = BuildSweetSpotReport(
      {MakeRun("baseline", {M(10, 10, 0.5)}), MakeRun("ranking", {M(10, 10, 0.5)})});
  EXPECT_EQ(r.frontier.size(), 2u);
}

TEST(Frontier, SingleConfiguration) {
  const SweetSpotReport r = BuildSweetSpotReport({MakeRun("baseline", {M(1, 2, 0.3)})});
  EXPECT_EQ(r.frontier, std::vector<std::string>{"baseline"});
  EXPECT_TRUE(r.tests.empty());
}

TEST(Summary, MeansAndSdsOfTwoByTwo) {
  const SweetSpotReport r = BuildSweetSpotReport(
      {MakeRun("baseline", {M(10, 100, 0.2), M(20, 300, 0.4)}),
       MakeRun("ranking", {M(30, 200, 0.6), M(50, 200, 0.8)})});
  const ConfigSummary &b = Row(r, "baseline");
  EXPECT_EQ(b.participants, 2u);
  EXPECT_DOUBLE_EQ(b.clicks.mean, 15.0);
  EXPECT_NEAR(b.clicks.sd, std::sqrt(50.0), 1e-12);
  EXPECT_DOUBLE_EQ(b.time_s.mean, 200.0);
  EXPECT_NEAR(b.f.mean, 0.3, 1e-12);
  EXPECT_EQ(b.tlx.n, 0u);
  const ConfigSummary &k = Row(r, "ranking");
  EXPECT_DOUBLE_EQ(k.clicks.mean, 40.0);
  EXPECT_NEAR(k.f.mean, 0.7, 1e-12);
  EXPECT_DOUBLE_EQ(k.time_s.sd, 0.0);
  ASSERT_EQ(r.tests.size(), 3u);
  EXPECT_EQ(r.tests[0].metric, "clicks");
  ASSERT_TRUE(r.tests[0].anova.has_value());
  EXPECT_EQ(r.tests[0].tukey.size(), 1u);

  const nlohmann::json doc = ReportToJson(r);
  EXPECT_EQ(doc["configurations"].size(), 2u);
  EXPECT_TRUE(doc["configurations"][0]["tlx"].is_null());
  const std::string csv = ReportToCsv(r);
  // One line per metric, one column per configuration.
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "metric,baseline,ranking");
  EXPECT_NE(csv.find("\nF-measure,"), std::string::npos);
  const std::string text = ReportToText(r);
  EXPECT_NE(text.find("n/a"), std::string::npos);
  EXPECT_NE(text.find("ranking"), std::string::npos);
}

TEST(Summary, UnavailableTestsCarryANote) {
  const SweetSpotReport r = BuildSweetSpotReport(
      {MakeRun("baseline", {M(10, 1, 0.2), M(10, 1, 0.2)}),
       MakeRun("ranking", {M(10, 1, 0.2), M(10, 1, 0.2)})});
  for (const MetricTest &t : r.tests) {
    EXPECT_FALSE(t.anova.has_value());
    EXPECT_FALSE(t.note.empty());
  }
}

TEST(Summary, Errors) {
  EXPECT_THROW(BuildSweetSpotReport({}), Error);
  EXPECT_THROW(BuildSweetSpotReport({MakeRun("baseline", {})}), Error);
  ConfigRun other = MakeRun("ranking", {M(1, 1, 1)});
  other.idea_order = {"b", "a"};
  try {
    BuildSweetSpotReport({MakeRun("baseline", {M(1, 1, 1)}), other});
    ADD_FAILURE();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
}

TEST(Runs, FromExportsGroupAndFilter) {
  const testing::Fixture f = testing::HighConfidenceFixture();
  auto make = [&](const std::string &preset, PolicyKind policy) {
    const Configuration c = PresetConfiguration(preset);
    return BatchExport(c, policy, f.corpus, {"c", "l", "g", {}},
                       RunConditionBatch(c, f.corpus, f.candidates, f.gold, policy, 3, 2), 2);
  };
  // Random sessions at ranking are kept; lazy baseline ones are all_rejected.
  const std::vector<StudyExport> exports = {make("ranking", PolicyKind::kRandom),
                                            make("baseline", PolicyKind::kLazy),
                                            make("ranking", PolicyKind::kRandom)};
  const auto runs = RunsFromExports(exports, f.gold);
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_EQ(runs[0].config.name, "ranking");
  EXPECT_EQ(runs[0].sessions.size(), 6u);
  const auto all = RunsFromExports(exports, f.gold, {false, true});
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[1].config.name, "baseline");

  const SessionMetrics m = MeasureSession(exports[0].sessions[0], f.gold);
  EXPECT_GT(m.clicks, 0.0);
  EXPECT_DOUBLE_EQ(m.time_s, m.clicks * kSimulatedStepMs / 1000.0);

  const nlohmann::json eval = EvaluateExport(exports[1], f.gold);
  EXPECT_EQ(eval["sessions"].size(), 3u);
  EXPECT_EQ(eval["sessions"][0]["exclusionReason"], "all_rejected");
  const std::string csv = EvaluationToCsv(eval);
  EXPECT_EQ(csv.substr(0, csv.find(',')), "session_id");
}

TEST(Runs, PartialSessionsOnlyWhenAsked) {
  const testing::Fixture f = testing::HighConfidenceFixture();
  Session s = Session::Create("p-1", "p", f.idea_ids(), f.candidates,
                              PresetConfiguration("baseline"), 0);
  s.NothingFits(1000);
  StudyExport doc;
  doc.sessions.push_back({"baseline", s.state(), {}});
  EXPECT_TRUE(RunsFromExports({doc}, f.gold).empty());
  const auto runs = RunsFromExports({doc}, f.gold, {true, false});
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_DOUBLE_EQ(runs[0].sessions[0].clicks, 1.0);
  EXPECT_DOUBLE_EQ(runs[0].sessions[0].time_s, 1.0);
}

}  // namespace
}  // namespace icv
