#include "icv/metrics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "icv/error.h"

namespace icv {

using nlohmann::json;

double HarmonicMean(double p, double r) {
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

namespace {

IdeaQuality ScoreIdea(const IdeaAnnotations &idea,
                      const std::vector<GoldEntry> &gold) {
  IdeaQuality q;
  q.idea_id = idea.idea_id;
  q.selected = idea.selections.size();
  q.gold = gold.size();
  std::vector<bool> hit(gold.size(), false);
  for (const Selection &s : idea.selections) {
    bool correct = false;
    for (size_t g = 0; g < gold.size(); ++g) {
      if (!gold[g].span.Overlaps(s.span)) continue;
      if (std::binary_search(gold[g].concepts.begin(), gold[g].concepts.end(),
                             s.uri)) {
        correct = true;
        hit[g] = true;
      }
    }
    if (correct) ++q.correct;
  }
  for (bool h : hit) q.matched += h ? 1 : 0;

  if (q.selected == 0 && q.gold == 0) return q;
  q.precision = q.selected == 0
                    ? 0.0
                    : static_cast<double>(q.correct) / q.selected;
  if (q.gold > 0) {
    q.recall = static_cast<double>(q.matched) / q.gold;
    q.f = HarmonicMean(*q.precision, *q.recall);
  }
  return q;
}

double MeanOf(const std::vector<IdeaQuality> &ideas,
              std::optional<double> IdeaQuality::*field) {
  double sum = 0.0;
  size_t n = 0;
  for (const IdeaQuality &q : ideas) {
    if (q.*field) {
      sum += *(q.*field);
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / n;
}

std::string Shortest(double value) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string Fixed6(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

json Optional(const std::optional<double> &v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

QualityReport ScoreAnnotations(const Annotations &annotations,
                               const GoldStandard &gold) {
  QualityReport report;
  for (const IdeaAnnotations &idea : annotations) {
    const std::vector<GoldEntry> *entries = gold.Find(idea.idea_id);
    if (entries == nullptr) {
      throw Error(ErrorCode::kValidation,
                  "gold standard has no entry for idea " + idea.idea_id,
                  {{"idea", idea.idea_id}});
    }
    IdeaQuality q = ScoreIdea(idea, *entries);
    report.selected += q.selected;
    report.correct += q.correct;
    report.gold += q.gold;
    report.matched += q.matched;
    report.ideas.push_back(std::move(q));
  }
  report.macro_precision = MeanOf(report.ideas, &IdeaQuality::precision);
  report.macro_recall = MeanOf(report.ideas, &IdeaQuality::recall);
  report.macro_f = MeanOf(report.ideas, &IdeaQuality::f);
  report.micro_precision =
      report.selected == 0
          ? 0.0
          : static_cast<double>(report.correct) / report.selected;
  report.micro_recall =
      report.gold == 0 ? 0.0 : static_cast<double>(report.matched) / report.gold;
  report.micro_f = HarmonicMean(report.micro_precision, report.micro_recall);
  return report;
}

Annotations SessionAnnotations(const SessionState &session,
                               bool submitted_only) {
  Annotations out;
  for (const IdeaState &idea : session.ideas) {
    if (submitted_only && !idea.submitted) continue;
    IdeaAnnotations a;
    a.idea_id = idea.idea_id;
    for (const TermState &t : idea.terms) {
      if (t.status != TermStatus::kAccepted &&
          t.status != TermStatus::kAutoSelected) {
        continue;
      }
      for (const std::string &uri : t.chosen) {
        a.selections.push_back({t.candidate.span, uri});
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

QualityReport ScoreSession(const SessionState &session,
                           const GoldStandard &gold) {
  if (session.phase == Phase::kAnnotating) {
    throw Error(ErrorCode::kFailedPrecondition,
                "session " + session.session_id + " is not complete");
  }
  return ScoreAnnotations(SessionAnnotations(session), gold);
}

Annotations ToAnnotations(const std::vector<AutoAnnotation> &auto_annotations) {
  Annotations out;
  for (const AutoAnnotation &a : auto_annotations) {
    IdeaAnnotations idea;
    idea.idea_id = a.idea_id;
    for (const AutoSelection &s : a.selections) {
      idea.selections.push_back({s.span, s.entity.uri});
    }
    out.push_back(std::move(idea));
  }
  return out;
}

json QualityToJson(const QualityReport &report) {
  json ideas = json::array();
  for (const IdeaQuality &q : report.ideas) {
    ideas.push_back({{"ideaId", q.idea_id},
                     {"selected", q.selected},
                     {"correct", q.correct},
                     {"gold", q.gold},
                     {"matched", q.matched},
                     {"precision", Optional(q.precision)},
                     {"recall", Optional(q.recall)},
                     {"f", Optional(q.f)}});
  }
  return {{"macro",
           {{"precision", report.macro_precision},
            {"recall", report.macro_recall},
            {"f", report.macro_f}}},
          {"micro",
           {{"precision", report.micro_precision},
            {"recall", report.micro_recall},
            {"f", report.micro_f}}},
          {"counts",
           {{"selected", report.selected},
            {"correct", report.correct},
            {"gold", report.gold},
            {"matched", report.matched}}},
          {"ideas", ideas}};
}

EffortReport EffortFromLog(const EventLog &log) {
  const Event *start = nullptr;
  const Event *end = nullptr;
  EffortReport report;
  for (const Event &e : log) {
    if (e.kind == EventKind::kSessionStart && start == nullptr) start = &e;
    if (e.kind == EventKind::kSessionEnd) end = &e;
    if (IsHumanEvent(e.kind)) {
      ++report.clicks;
      size_t idea = 0;
      if (e.payload.is_object() && e.payload.contains("idea")) {
        idea = e.payload["idea"].get<size_t>();
      }
      ++report.clicks_per_idea[idea];
    }
  }
  if (start == nullptr || end == nullptr) {
    throw Error(ErrorCode::kValidation,
                "event log lacks session_start or session_end");
  }
  report.duration_s =
      static_cast<double>(end->timestamp_ms - start->timestamp_ms) / 1000.0;
  return report;
}

json EffortToJson(const EffortReport &report) {
  json per_idea = json::object();
  for (const auto &[idea, clicks] : report.clicks_per_idea) {
    per_idea[std::to_string(idea)] = clicks;
  }
  return {{"clicks", report.clicks},
          {"durationS", report.duration_s},
          {"clicksPerIdea", per_idea}};
}

void TlxResponse::Validate() const {
  for (int v : {mental, temporal, performance, effort, frustration}) {
    if (v < kTlxMin || v > kTlxMax) {
      throw Error(ErrorCode::kValidation,
                  "TLX rating " + std::to_string(v) + " outside 1..7");
    }
  }
}

int RawTlx(const TlxResponse &r) {
  r.Validate();
  return r.mental + r.temporal + r.performance + r.effort + r.frustration;
}

void ResQueResponse::Validate() const {
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i] < -2 || items[i] > 2) {
      throw Error(ErrorCode::kValidation,
                  "ResQue Q" + std::to_string(i + 1) + " rating " +
                      std::to_string(items[i]) + " outside -2..2");
    }
  }
}

const std::array<const char *, 11> &ResQueTopics() {
  static const std::array<const char *, 11> topics = {
      "Expectations", "Diversity",     "Layout",        "Explanation",
      "Information",  "Interaction",   "Familiarization", "Understanding",
      "Ideal Item",   "Satisfaction",  "Trust"};
  return topics;
}

ResQueAggregate AggregateResQue(const ResQueResponse &r) {
  r.Validate();
  auto mean = [&](std::initializer_list<int> questions) {
    double sum = 0.0;
    for (int q : questions) sum += r.items[q - 1];
    return sum / questions.size();
  };
  ResQueAggregate a;
  a.overall = mean({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  a.perceived_qualities = mean({2, 3, 4, 5, 7});
  a.beliefs = mean({1, 6, 8, 9});
  a.attitudes = mean({10, 11});
  return a;
}

double RoundTo(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

json TlxToJson(const TlxResponse &r) {
  return {{"mental", r.mental},
          {"temporal", r.temporal},
          {"performance", r.performance},
          {"effort", r.effort},
          {"frustration", r.frustration}};
}

TlxResponse TlxFromJson(const json &doc) {
  try {
    TlxResponse r;
    r.mental = doc.at("mental").get<int>();
    r.temporal = doc.at("temporal").get<int>();
    r.performance = doc.at("performance").get<int>();
    r.effort = doc.at("effort").get<int>();
    r.frustration = doc.at("frustration").get<int>();
    r.Validate();
    return r;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("tlx: ") + e.what());
  }
}

json ResQueToJson(const ResQueResponse &r) { return r.items; }

ResQueResponse ResQueFromJson(const json &doc) {
  if (!doc.is_array() || doc.size() != 11) {
    throw Error(ErrorCode::kValidation, "resque needs exactly 11 ratings");
  }
  try {
    ResQueResponse r;
    for (size_t i = 0; i < 11; ++i) r.items[i] = doc[i].get<int>();
    r.Validate();
    return r;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("resque: ") + e.what());
  }
}

SweepResult ThresholdSweep(const Corpus &corpus, const GoldStandard &gold,
                           const ConceptBackend &backend, double from,
                           double to, double step) {
  if (!(step > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "step must be positive");
  }
  if (!(from >= 0.0 && to <= 1.0 && from <= to)) {
    throw Error(ErrorCode::kInvalidArgument,
                "sweep range must satisfy 0 <= from <= to <= 1");
  }
  const size_t points =
      static_cast<size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  SweepResult result;
  result.step = step;
  for (size_t i = 0; i < points; ++i) {
    // Rounded so that 0.07 prints as 0.07 rather than 0.07000000000000001.
    const double gamma =
        std::min(1.0, std::round((from + i * step) * 1e10) / 1e10);
    std::vector<AutoAnnotation> annotated;
    try {
      for (const Idea &idea : corpus) {
        annotated.push_back(AnnotateAllComputer(backend, idea, gamma));
      }
    } catch (const BackendError &e) {
      throw BackendError(e.endpoint(),
                         e.cause() + " (at gamma " + Shortest(gamma) + ")");
    }
    const QualityReport q = ScoreAnnotations(ToAnnotations(annotated), gold);
    result.rows.push_back({gamma, q.macro_precision, q.macro_recall, q.macro_f,
                           q.micro_precision, q.micro_recall, q.micro_f});
  }
  return result;
}

const SweepRow &BestSweepRow(const SweepResult &sweep) {
  if (sweep.rows.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty sweep");
  }
  const SweepRow *best = &sweep.rows.front();
  for (const SweepRow &row : sweep.rows) {
    if (row.f > best->f) best = &row;
  }
  return *best;
}

std::string SweepRowToCsv(const SweepRow &row) {
  return Shortest(row.gamma) + "," + Fixed6(row.precision) + "," +
         Fixed6(row.recall) + "," + Fixed6(row.f) + "," +
         Fixed6(row.micro_precision) + "," + Fixed6(row.micro_recall) + "," +
         Fixed6(row.micro_f);
}

std::string SweepToCsv(const SweepResult &sweep) {
  std::string out =
      "gamma,macro_precision,macro_recall,macro_f,micro_precision,"
      "micro_recall,micro_f\n";
  for (const SweepRow &row : sweep.rows) out += SweepRowToCsv(row) + "\n";
  return out;
}

double CohensKappa(const std::map<std::string, std::string> &a,
                   const std::map<std::string, std::string> &b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kValidation, "labelings cover different items");
  }
  if (a.empty()) {
    throw Error(ErrorCode::kValidation, "labelings are empty");
  }
  // Integer counts keep the arithmetic exact until the final division:
  // kappa = (n * agree - sum) / (n^2 - sum), sum = sum_l count_a(l) count_b(l).
  std::map<std::string, int64_t> count_a;
  std::map<std::string, int64_t> count_b;
  int64_t agree = 0;
  for (const auto &[item, label] : a) {
    auto it = b.find(item);
    if (it == b.end()) {
      throw Error(ErrorCode::kValidation,
                  "item " + item + " missing from second labeling");
    }
    if (label == it->second) ++agree;
    ++count_a[label];
    ++count_b[it->second];
  }
  const int64_t n = static_cast<int64_t>(a.size());
  int64_t sum = 0;
  for (const auto &[label, ca] : count_a) {
    auto it = count_b.find(label);
    if (it != count_b.end()) sum += ca * it->second;
  }
  if (sum == n * n) {
    if (agree == n) return 1.0;
    throw Error(ErrorCode::kUndefined, "kappa undefined: chance agreement is 1");
  }
  return static_cast<double>(n * agree - sum) /
         static_cast<double>(n * n - sum);
}

std::map<std::string, std::string> LoadLabels(const std::string &path) {
  const json doc = ReadJsonFile(path);
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, path + ": label file must be a JSON object");
  }
  std::map<std::string, std::string> labels;
  for (const auto &[item, label] : doc.items()) {
    if (!label.is_string()) {
      throw Error(ErrorCode::kParse,
                  path + ": label for " + item + " must be a string");
    }
    labels[item] = label.get<std::string>();
  }
  return labels;
}

}  // namespace icv
