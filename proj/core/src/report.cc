#include "icv/report.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "icv/error.h"
#include "icv/metrics.h"

namespace icv {

using nlohmann::json;

namespace {

std::string Fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string Cell(const MeanSd &m) {
  if (m.n == 0) return "n/a";
  return Fixed(m.mean, 2) + " (" + Fixed(m.sd, 2) + ")";
}

std::string CsvField(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json MeanSdToJson(const MeanSd &m) {
  if (m.n == 0) return nullptr;
  return {{"n", m.n}, {"mean", m.mean}, {"sd", m.sd}};
}

// a dominates b: no worse on every axis and better on one.
bool Dominates(const ConfigSummary &a, const ConfigSummary &b) {
  const bool no_worse = a.clicks.mean <= b.clicks.mean &&
                        a.time_s.mean <= b.time_s.mean && a.f.mean >= b.f.mean;
  const bool better = a.clicks.mean < b.clicks.mean ||
                      a.time_s.mean < b.time_s.mean || a.f.mean > b.f.mean;
  return no_worse && better;
}

MetricTest TestMetric(const std::string &metric,
                      const std::vector<ConfigRun> &runs,
                      double SessionMetrics::*field) {
  MetricTest t;
  t.metric = metric;
  std::vector<std::vector<double>> groups;
  for (const ConfigRun &run : runs) {
    std::vector<double> g;
    for (const SessionMetrics &s : run.sessions) g.push_back(s.*field);
    groups.push_back(std::move(g));
  }
  try {
    t.anova = stats::OneWayAnova(groups);
    t.tukey = stats::TukeyHsd(groups);
  } catch (const Error &e) {
    t.anova.reset();
    t.tukey.clear();
    t.note = e.what();
  }
  return t;
}

}  // namespace

SessionMetrics MeasureSession(const SessionRecord &record,
                              const GoldStandard &gold) {
  const SessionState &s = record.session;
  SessionMetrics m;
  m.session_id = s.session_id;
  QualityReport quality;
  if (IsPartial(s)) {
    quality = ScoreAnnotations(SessionAnnotations(s, true), gold);
    size_t clicks = 0;
    for (const Event &e : s.events) clicks += IsHumanEvent(e.kind) ? 1 : 0;
    m.clicks = static_cast<double>(clicks);
    if (!s.events.empty()) {
      m.time_s =
          (s.events.back().timestamp_ms - s.events.front().timestamp_ms) /
          1000.0;
    }
  } else {
    quality = ScoreSession(s, gold);
    const EffortReport effort = EffortFromLog(s.events);
    m.clicks = static_cast<double>(effort.clicks);
    m.time_s = effort.duration_s;
  }
  m.precision = quality.macro_precision;
  m.recall = quality.macro_recall;
  m.f = quality.macro_f;
  if (record.survey) {
    m.tlx = RawTlx(record.survey->tlx);
    m.resque = AggregateResQue(record.survey->resque).overall;
  }
  return m;
}

std::vector<ConfigRun> RunsFromExports(const std::vector<StudyExport> &exports,
                                       const GoldStandard &gold,
                                       const RunOptions &options) {
  std::vector<ConfigRun> runs;
  std::map<std::string, size_t> index;
  for (const StudyExport &doc : exports) {
    for (const SessionRecord &r : doc.sessions) {
      if (IsPartial(r.session) && !options.include_partial) continue;
      if (ExclusionReason(r.session) && !options.include_excluded) continue;
      auto it = index.find(r.condition);
      if (it == index.end()) {
        ConfigRun run;
        run.config = r.session.configuration;
        run.idea_order = r.session.idea_queue;
        it = index.emplace(r.condition, runs.size()).first;
        runs.push_back(std::move(run));
      }
      ConfigRun &run = runs[it->second];
      if (r.session.idea_queue != run.idea_order) {
        throw Error(ErrorCode::kValidation,
                    "session " + r.session.session_id +
                        " uses a different idea order than condition " +
                        r.condition);
      }
      run.sessions.push_back(MeasureSession(r, gold));
    }
  }
  return runs;
}

MeanSd Summarize(const std::vector<double> &values) {
  MeanSd m;
  m.n = values.size();
  m.mean = stats::Mean(values);
  m.sd = stats::SampleStdDev(values);
  return m;
}

SweetSpotReport BuildSweetSpotReport(const std::vector<ConfigRun> &runs) {
  if (runs.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "report needs at least one configuration");
  }
  SweetSpotReport report;
  for (const ConfigRun &run : runs) {
    if (run.sessions.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "configuration " + run.config.name + " has no sessions");
    }
    if (run.idea_order != runs.front().idea_order) {
      throw Error(ErrorCode::kValidation,
                  "configurations " + runs.front().config.name + " and " +
                      run.config.name + " were run on different corpora",
                  {{"configurations",
                    {runs.front().config.name, run.config.name}}});
    }
    ConfigSummary row;
    row.name = run.config.name;
    row.loa_level = run.config.loa_level;
    row.participants = run.sessions.size();
    std::vector<double> clicks, time_s, tlx, precision, recall, f, resque;
    for (const SessionMetrics &s : run.sessions) {
      clicks.push_back(s.clicks);
      time_s.push_back(s.time_s);
      precision.push_back(s.precision);
      recall.push_back(s.recall);
      f.push_back(s.f);
      if (s.tlx) tlx.push_back(*s.tlx);
      if (s.resque) resque.push_back(*s.resque);
    }
    row.clicks = Summarize(clicks);
    row.time_s = Summarize(time_s);
    row.tlx = Summarize(tlx);
    row.precision = Summarize(precision);
    row.recall = Summarize(recall);
    row.f = Summarize(f);
    row.resque = Summarize(resque);
    report.rows.push_back(std::move(row));
  }
  for (ConfigSummary &row : report.rows) {
    for (const ConfigSummary &other : report.rows) {
      if (&other != &row && Dominates(other, row)) {
        row.dominated_by.push_back(other.name);
      }
    }
    row.on_frontier = row.dominated_by.empty();
    if (row.on_frontier) report.frontier.push_back(row.name);
  }
  if (runs.size() >= 2) {
    report.tests.push_back(TestMetric("clicks", runs, &SessionMetrics::clicks));
    report.tests.push_back(TestMetric("time_s", runs, &SessionMetrics::time_s));
    report.tests.push_back(TestMetric("f", runs, &SessionMetrics::f));
  }
  return report;
}

json EvaluateExport(const StudyExport &doc, const GoldStandard &gold) {
  json sessions = json::array();
  for (const SessionRecord &r : doc.sessions) {
    const bool partial = IsPartial(r.session);
    const auto reason = ExclusionReason(r.session);
    const SessionMetrics m = MeasureSession(r, gold);
    const QualityReport quality =
        partial ? ScoreAnnotations(SessionAnnotations(r.session, true), gold)
                : ScoreSession(r.session, gold);
    sessions.push_back({{"sessionId", r.session.session_id},
                        {"participantId", r.session.participant_id},
                        {"condition", r.condition},
                        {"partial", partial},
                        {"excluded", reason.has_value()},
                        {"exclusionReason", reason ? json(*reason) : json()},
                        {"clicks", m.clicks},
                        {"timeS", m.time_s},
                        {"quality", QualityToJson(quality)}});
  }
  return {{"studyId", doc.study.id}, {"sessions", sessions}};
}

std::string EvaluationToCsv(const json &evaluation) {
  std::ostringstream out;
  out << "session_id,condition,partial,excluded,clicks,time_s,"
         "macro_precision,macro_recall,macro_f,micro_precision,micro_recall,"
         "micro_f\n";
  for (const json &s : evaluation.at("sessions")) {
    const json &q = s.at("quality");
    out << CsvField(s.at("sessionId").get<std::string>()) << ','
        << CsvField(s.at("condition").get<std::string>()) << ','
        << (s.at("partial").get<bool>() ? "true" : "false") << ','
        << (s.at("excluded").get<bool>() ? "true" : "false") << ','
        << Fixed(s.at("clicks").get<double>(), 0) << ','
        << Fixed(s.at("timeS").get<double>(), 3);
    for (const char *view : {"macro", "micro"}) {
      for (const char *key : {"precision", "recall", "f"}) {
        out << ',' << Fixed(q.at(view).at(key).get<double>(), 6);
      }
    }
    out << '\n';
  }
  return out.str();
}

json ReportToJson(const SweetSpotReport &report) {
  json rows = json::array();
  for (const ConfigSummary &r : report.rows) {
    rows.push_back({{"name", r.name},
                    {"loa", r.loa_level},
                    {"participants", r.participants},
                    {"clicks", MeanSdToJson(r.clicks)},
                    {"timeS", MeanSdToJson(r.time_s)},
                    {"tlx", MeanSdToJson(r.tlx)},
                    {"precision", MeanSdToJson(r.precision)},
                    {"recall", MeanSdToJson(r.recall)},
                    {"f", MeanSdToJson(r.f)},
                    {"resque", MeanSdToJson(r.resque)},
                    {"onFrontier", r.on_frontier},
                    {"dominatedBy", r.dominated_by}});
  }
  json tests = json::array();
  for (const MetricTest &t : report.tests) {
    json item = {{"metric", t.metric}};
    if (t.anova) {
      item["anova"] = {{"f", t.anova->f},
                       {"p", t.anova->p},
                       {"dfBetween", t.anova->df_between},
                       {"dfWithin", t.anova->df_within}};
      json pairs = json::array();
      for (const stats::TukeyComparison &c : t.tukey) {
        pairs.push_back({{"a", report.rows[c.a].name},
                         {"b", report.rows[c.b].name},
                         {"diff", c.diff},
                         {"q", c.q},
                         {"p", c.p}});
      }
      item["tukey"] = pairs;
    } else {
      item["anova"] = nullptr;
      item["note"] = t.note;
    }
    tests.push_back(std::move(item));
  }
  return {{"configurations", rows},
          {"frontier", report.frontier},
          {"tests", tests}};
}

std::string ReportToCsv(const SweetSpotReport &report) {
  std::ostringstream out;
  auto line = [&](const std::string &label, auto &&cell) {
    out << CsvField(label);
    for (const ConfigSummary &r : report.rows) out << ',' << CsvField(cell(r));
    out << '\n';
  };
  line("metric", [](const ConfigSummary &r) { return r.name; });
  line("LoA", [](const ConfigSummary &r) { return std::to_string(r.loa_level); });
  line("Participants",
       [](const ConfigSummary &r) { return std::to_string(r.participants); });
  line("Clicks", [](const ConfigSummary &r) { return Cell(r.clicks); });
  line("Time (s)", [](const ConfigSummary &r) { return Cell(r.time_s); });
  line("TLX", [](const ConfigSummary &r) { return Cell(r.tlx); });
  line("Precision", [](const ConfigSummary &r) { return Cell(r.precision); });
  line("Recall", [](const ConfigSummary &r) { return Cell(r.recall); });
  line("F-measure", [](const ConfigSummary &r) { return Cell(r.f); });
  line("ResQue", [](const ConfigSummary &r) { return Cell(r.resque); });
  line("Pareto frontier", [](const ConfigSummary &r) {
    return std::string(r.on_frontier ? "yes" : "no");
  });
  line("Dominated by", [](const ConfigSummary &r) {
    std::string s;
    for (const std::string &d : r.dominated_by) s += (s.empty() ? "" : ";") + d;
    return s;
  });
  return out.str();
}

std::string ReportToText(const SweetSpotReport &report) {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header = {""};
  for (const ConfigSummary &r : report.rows) header.push_back(r.name);
  table.push_back(header);
  auto add = [&](const std::string &label, auto &&cell) {
    std::vector<std::string> row = {label};
    for (const ConfigSummary &r : report.rows) row.push_back(cell(r));
    table.push_back(std::move(row));
  };
  add("LoA", [](const ConfigSummary &r) { return std::to_string(r.loa_level); });
  add("Participants",
      [](const ConfigSummary &r) { return std::to_string(r.participants); });
  add("Clicks", [](const ConfigSummary &r) { return Cell(r.clicks); });
  add("Time (s)", [](const ConfigSummary &r) { return Cell(r.time_s); });
  add("TLX", [](const ConfigSummary &r) { return Cell(r.tlx); });
  add("Precision", [](const ConfigSummary &r) { return Cell(r.precision); });
  add("Recall", [](const ConfigSummary &r) { return Cell(r.recall); });
  add("F-measure", [](const ConfigSummary &r) { return Cell(r.f); });
  add("ResQue", [](const ConfigSummary &r) { return Cell(r.resque); });

  std::vector<size_t> width(header.size(), 0);
  for (const auto &row : table) {
    for (size_t i = 0; i < row.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  std::ostringstream out;
  for (const auto &row : table) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << "  ";
      out << row[i] << std::string(width[i] - row[i].size(), ' ');
    }
    out << '\n';
  }
  out << "\nPareto frontier (min clicks, min time, max F):";
  for (const std::string &name : report.frontier) out << ' ' << name;
  out << '\n';
  for (const ConfigSummary &r : report.rows) {
    if (r.dominated_by.empty()) continue;
    out << "  " << r.name << " dominated by";
    for (const std::string &d : r.dominated_by) out << ' ' << d;
    out << '\n';
  }
  return out.str();
}

}  // namespace icv
