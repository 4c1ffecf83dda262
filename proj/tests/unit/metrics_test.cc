#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "oracles.h"
#include "icv/error.h"
#include "icv/kg_client.h"
#include "icv/metrics.h"
#include "icv/session.h"

namespace icv {
namespace {

Span S(size_t start, size_t end) { return {start, end, std::string(end - start, 'x')}; }

GoldEntry G(size_t start, size_t end, std::vector<std::string> concepts) {
  std::sort(concepts.begin(), concepts.end());
  return {S(start, end), concepts};
}

GoldStandard OneIdeaGold(std::vector<GoldEntry> entries) {
  GoldStandard g;
  g.entries["i"] = std::move(entries);
  return g;
}

TEST(Score, WorkedExampleThreeSelectedTwoCorrectFourGold) {
  const GoldStandard gold = OneIdeaGold({G(0, 3, {"a"}), G(4, 7, {"b"}),
                                         G(8, 11, {"c"}), G(12, 15, {"d"})});
  const Annotations ann = {{"i", {{S(0, 3), "a"}, {S(4, 7), "b"}, {S(8, 11), "x"}}}};
  const QualityReport q = ScoreAnnotations(ann, gold);
  EXPECT_NEAR(q.macro_precision, 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(q.macro_recall, 0.5, 1e-9);
  EXPECT_NEAR(q.macro_f, 4.0 / 7.0, 1e-9);
  EXPECT_EQ(q.selected, 3u);
  EXPECT_EQ(q.correct, 2u);
  EXPECT_EQ(q.gold, 4u);
  EXPECT_EQ(q.matched, 2u);
}

TEST(Score, IdentityIsPerfect) {
  const GoldStandard gold = OneIdeaGold({G(0, 3, {"a"}), G(4, 7, {"b", "c"})});
  const QualityReport q =
      ScoreAnnotations({{"i", {{S(0, 3), "a"}, {S(4, 7), "c"}}}}, gold);
  EXPECT_DOUBLE_EQ(q.macro_precision, 1.0);
  EXPECT_DOUBLE_EQ(q.macro_recall, 1.0);
  EXPECT_DOUBLE_EQ(q.macro_f, 1.0);
}

TEST(Score, UndefinedValuesFollowTheDocumentedRules) {
  GoldStandard gold;
  gold.entries["with-gold"] = {G(0, 3, {"a"})};
  gold.entries["no-gold"] = {};
  gold.entries["empty"] = {};
  const QualityReport q = ScoreAnnotations(
      {{"with-gold", {}}, {"no-gold", {{S(0, 3), "z"}}}, {"empty", {}}}, gold);
  // Nothing selected against gold: precision 0, recall 0.
  EXPECT_EQ(q.ideas[0].precision, 0.0);
  EXPECT_EQ(q.ideas[0].recall, 0.0);
  EXPECT_EQ(q.ideas[0].f, 0.0);
  // Selections without gold: precision only.
  EXPECT_EQ(q.ideas[1].precision, 0.0);
  EXPECT_FALSE(q.ideas[1].recall.has_value());
  // Neither: nothing is defined and the idea drops out of the means.
  EXPECT_FALSE(q.ideas[2].precision.has_value());
  EXPECT_DOUBLE_EQ(q.macro_recall, 0.0);
  EXPECT_THROW(ScoreAnnotations({{"missing", {}}}, gold), Error);
}

TEST(Score, MacroAndMicroDiffer) {
  GoldStandard gold;
  gold.entries["a"] = {G(0, 1, {"u"})};
  gold.entries["b"] = {G(0, 1, {"v"}), G(2, 3, {"w"}), G(4, 5, {"x"})};
  const QualityReport q = ScoreAnnotations(
      {{"a", {{S(0, 1), "u"}}}, {"b", {{S(0, 1), "v"}, {S(2, 3), "n"}, {S(4, 5), "n"}}}},
      gold);
  EXPECT_NEAR(q.macro_precision, (1.0 + 1.0 / 3.0) / 2.0, 1e-12);
  EXPECT_NEAR(q.micro_precision, 2.0 / 4.0, 1e-12);
  const nlohmann::json doc = QualityToJson(q);
  EXPECT_NEAR(doc["macro"]["precision"].get<double>(), q.macro_precision, 0);
  EXPECT_EQ(doc["counts"]["gold"], 4);
  EXPECT_EQ(doc["ideas"].size(), 2u);
}

TEST(Score, MatchesPairEnumerationOracleOn1000Sessions) {
  EXPECT_EQ(testing::CheckScoringOracle(1000, 7), "");
}

TEST(Score, SessionMustBeComplete) {
  const testing::Fixture f = testing::HighConfidenceFixture();
  const Session s = Session::Create("s", "p", f.idea_ids(), f.candidates,
                                    PresetConfiguration("baseline"), 0);
  EXPECT_THROW(ScoreSession(s.state(), f.gold), Error);
  const Session done = Session::Create("s", "p", f.idea_ids(), f.candidates,
                                       PresetConfiguration("all-computer"), 0);
  const QualityReport q = ScoreSession(done.state(), f.gold);
  EXPECT_DOUBLE_EQ(q.macro_f, 1.0);
}

Event Ev(EventKind kind, int64_t ts, size_t idea = 0) {
  Event e;
  e.kind = kind;
  e.timestamp_ms = ts;
  e.payload = {{"idea", idea}};
  return e;
}

TEST(Effort, CountsClicksAndDuration) {
  EventLog log = {Ev(EventKind::kSessionStart, 0)};
  for (int i = 0; i < 5; ++i) log.push_back(Ev(EventKind::kConceptClick, 10));
  for (int i = 0; i < 3; ++i) log.push_back(Ev(EventKind::kAcceptContinue, 20, 1));
  log.push_back(Ev(EventKind::kNothingFits, 30, 1));
  log.push_back(Ev(EventKind::kIdeaSubmit, 40));
  log.push_back(Ev(EventKind::kSessionEnd, 1528420));
  const EffortReport r = EffortFromLog(log);
  EXPECT_EQ(r.clicks, 9u);
  EXPECT_DOUBLE_EQ(r.duration_s, 1528.42);
  EXPECT_EQ(r.clicks_per_idea.at(0), 5u);
  EXPECT_EQ(r.clicks_per_idea.at(1), 4u);
  EXPECT_EQ(EffortToJson(r)["clicks"], 9);

  const EffortReport empty =
      EffortFromLog({Ev(EventKind::kSessionStart, 5), Ev(EventKind::kSessionEnd, 5)});
  EXPECT_EQ(empty.clicks, 0u);
  EXPECT_THROW(EffortFromLog({Ev(EventKind::kSessionStart, 0)}), Error);
}

TEST(Questionnaires, RawTlxAndResQue) {
  EXPECT_EQ(RawTlx({4, 4, 4, 4, 4}), 20);
  EXPECT_EQ(RawTlx({1, 1, 1, 1, 1}), 5);
  EXPECT_EQ(RawTlx({7, 7, 7, 7, 7}), 35);
  EXPECT_THROW(RawTlx({0, 4, 4, 4, 4}), Error);
  EXPECT_THROW(RawTlx({4, 4, 4, 4, 8}), Error);

  EXPECT_DOUBLE_EQ(AggregateResQue({}).overall, 0.0);
  ResQueResponse r;
  r.items = {1, -1, 1, 0, 1, 1, 1, 1, 1, 1, 1};
  const ResQueAggregate a = AggregateResQue(r);
  EXPECT_NEAR(a.overall, 8.0 / 11.0, 1e-12);
  EXPECT_DOUBLE_EQ(RoundTo(a.overall, 2), 0.73);
  EXPECT_DOUBLE_EQ(a.perceived_qualities, (-1 + 1 + 0 + 1 + 1) / 5.0);
  EXPECT_DOUBLE_EQ(a.beliefs, 1.0);
  EXPECT_DOUBLE_EQ(a.attitudes, 1.0);
  r.items[3] = 3;
  EXPECT_THROW(AggregateResQue(r), Error);
  EXPECT_EQ(ResQueTopics().size(), 11u);

  EXPECT_EQ(TlxFromJson(TlxToJson({1, 2, 3, 4, 5})).effort, 4);
  EXPECT_THROW(TlxFromJson(nlohmann::json::object()), Error);
  EXPECT_THROW(ResQueFromJson(nlohmann::json::array({1, 2})), Error);
  EXPECT_EQ(ResQueFromJson(ResQueToJson(ResQueResponse{})).items[10], 0);
}

std::map<std::string, std::string> Labels(const std::string &s) {
  std::map<std::string, std::string> m;
  for (size_t i = 0; i < s.size(); ++i) {
    m["item-" + std::to_string(i)] = std::string(1, s[i]);
  }
  return m;
}

TEST(Kappa, TenItemExampleIsExactlyPointFour) {
  // A: 6 positive, B: 5 positive, 7 of 10 agree.
  const auto a = Labels("++++++----");
  const auto b = Labels("++++--+---");
  int agree = 0;
  for (const auto &[k, v] : a) agree += b.at(k) == v;
  ASSERT_EQ(agree, 7);
  EXPECT_EQ(CohensKappa(a, b), 0.4);
  EXPECT_EQ(CohensKappa(b, a), CohensKappa(a, b));
}

TEST(Kappa, EdgeCases) {
  const auto a = Labels("++--+");
  EXPECT_EQ(CohensKappa(a, a), 1.0);
  // Chance-level agreement.
  EXPECT_EQ(CohensKappa(Labels("++--"), Labels("+-+-")), 0.0);
  // Everyone uses one label: p_e = 1.
  EXPECT_EQ(CohensKappa(Labels("+++"), Labels("+++")), 1.0);
  EXPECT_NO_THROW(CohensKappa(Labels("+++"), Labels("++-")));
  EXPECT_THROW(CohensKappa(Labels("+++"), Labels("++")), Error);
  auto other = Labels("+++");
  other.erase("item-0");
  other["zzz"] = "+";
  EXPECT_THROW(CohensKappa(Labels("+++"), other), Error);
}

TEST(Kappa, SymmetricOnRandomLabelings) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::string x, y;
    for (int i = 0; i < 12; ++i) {
      x += "abc"[rng() % 3];
      y += "abc"[rng() % 3];
    }
    try {
      EXPECT_DOUBLE_EQ(CohensKappa(Labels(x), Labels(y)),
                       CohensKappa(Labels(y), Labels(x)));
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::kUndefined);
    }
  }
}

// ---------------------------------------------------------------------------

class FailingBackend : public ConceptBackend {
 public:
  std::string Describe() const override { return "failing"; }

 protected:
  std::vector<AnnotationCandidate> Fetch(const std::string &, double) const override {
    throw BackendError("http://down/", "timeout");
  }
};

TEST(Sweep, DemoHas101RowsAtStepOneHundredth) {
  const Corpus corpus = LoadCorpus(testing::DataPath("ideas.json"));
  const GoldStandard gold = LoadGold(testing::DataPath("demo_gold.json"), corpus);
  const LocalBackend backend(
      std::make_shared<Lexicon>(LoadLexicon(testing::DataPath("demo.tsv"))));
  const SweepResult sweep = ThresholdSweep(corpus, gold, backend, 0.0, 1.0, 0.01);
  ASSERT_EQ(sweep.rows.size(), 101u);
  for (size_t i = 1; i < sweep.rows.size(); ++i) {
    EXPECT_GT(sweep.rows[i].gamma, sweep.rows[i - 1].gamma);
    EXPECT_NEAR(sweep.rows[i].gamma - sweep.rows[i - 1].gamma, 0.01, 1e-9);
    EXPECT_LE(sweep.rows[i].recall, sweep.rows[i - 1].recall + 1e-12);
  }
  EXPECT_DOUBLE_EQ(sweep.rows.back().gamma, 1.0);
  EXPECT_DOUBLE_EQ(sweep.rows.back().recall, 0.0);

  // The best row equals a manual all-computer run at that gamma.
  const SweepRow &best = BestSweepRow(sweep);
  std::vector<AutoAnnotation> manual;
  for (const Idea &idea : corpus) {
    manual.push_back(AnnotateAllComputer(backend, idea, best.gamma));
  }
  const QualityReport q = ScoreAnnotations(ToAnnotations(manual), gold);
  EXPECT_EQ(q.macro_f, best.f);
  EXPECT_EQ(q.macro_precision, best.precision);
  EXPECT_EQ(q.micro_recall, best.micro_recall);
  for (const SweepRow &row : sweep.rows) EXPECT_LE(row.f, best.f);

  const std::string csv = SweepToCsv(sweep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "gamma,macro_precision,macro_recall,macro_f,micro_precision,"
            "micro_recall,micro_f");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 102);
  EXPECT_NE(csv.find("\n0.07,"), std::string::npos);
}

TEST(Sweep, TwoBandRecallShape) {
  const testing::Fixture f = testing::TwoBandFixture();
  const LocalBackend backend(std::make_shared<Lexicon>(f.lexicon));
  const SweepResult sweep = ThresholdSweep(f.corpus, f.gold, backend, 0.0, 1.0, 0.01);
  ASSERT_EQ(sweep.rows.size(), 101u);
  const double plateau = sweep.rows.front().recall;
  for (const SweepRow &row : sweep.rows) {
    if (row.gamma < testing::kIncorrectBandCeiling) {
      EXPECT_DOUBLE_EQ(row.recall, plateau) << row.gamma;
    }
    if (row.gamma > testing::kCorrectBandFloor) {
      EXPECT_LT(row.recall, plateau) << row.gamma;
    }
  }
  // A perfect backend at gamma 0.
  Lexicon perfect;
  perfect.Add({"apple", {"http://kg.test/resource/Apple", "Apple", "", {}}, 0.5});
  GoldStandard gold;
  const Corpus corpus = {{"p", "apple"}};
  gold.entries["p"] = {testing::GoldFor("apple", "apple", {"http://kg.test/resource/Apple"})};
  const SweepResult one = ThresholdSweep(
      corpus, gold, LocalBackend(std::make_shared<Lexicon>(perfect)), 0.0, 0.0, 0.01);
  ASSERT_EQ(one.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(one.rows[0].f, 1.0);
}

TEST(Sweep, RejectsBadRangesAndReportsFailingGamma) {
  const testing::Fixture f = testing::TwoBandFixture();
  const LocalBackend backend(std::make_shared<Lexicon>(f.lexicon));
  try {
    ThresholdSweep(f.corpus, f.gold, backend, 0.0, 1.0, 0.0);
    ADD_FAILURE();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_EQ(std::string(e.what()), "step must be positive");
  }
  EXPECT_THROW(ThresholdSweep(f.corpus, f.gold, backend, 0.5, 0.2, 0.1), Error);
  EXPECT_THROW(ThresholdSweep(f.corpus, f.gold, backend, 0.0, 1.5, 0.1), Error);
  try {
    ThresholdSweep(f.corpus, f.gold, FailingBackend(), 0.25, 1.0, 0.25);
    ADD_FAILURE();
  } catch (const BackendError &e) {
    EXPECT_EQ(e.cause(), "timeout (at gamma 0.25)");
  }
}

}  // namespace
}  // namespace icv
