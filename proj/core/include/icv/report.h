#ifndef ICV_REPORT_H_
#define ICV_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icv/configuration.h"
#include "icv/corpus.h"
#include "icv/stats.h"
#include "icv/study_export.h"

namespace icv {

// Per-participant measurements for one session.
struct SessionMetrics {
  std::string session_id;
  double clicks = 0.0;
  double time_s = 0.0;
  std::optional<double> tlx;     // raw TLX when a survey was submitted
  std::optional<double> resque;  // ResQue overall
  double precision = 0.0;        // macro over ideas
  double recall = 0.0;
  double f = 0.0;
};

// Measurements of every included session of one configuration.
struct ConfigRun {
  Configuration config;
  std::vector<std::string> idea_order;
  std::vector<SessionMetrics> sessions;
};

struct RunOptions {
  bool include_partial = false;   // sessions that never reached the survey
  bool include_excluded = false;  // sessions flagged by exclusion filters
};

// Scores one session. Partial sessions are scored on their submitted ideas
// and timed up to their last event.
SessionMetrics MeasureSession(const SessionRecord &record,
                              const GoldStandard &gold);

// Groups the included sessions of all exports by condition name, in order of
// first appearance. Conditions without included sessions are left out.
std::vector<ConfigRun> RunsFromExports(const std::vector<StudyExport> &exports,
                                       const GoldStandard &gold,
                                       const RunOptions &options = {});

struct MeanSd {
  size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd Summarize(const std::vector<double> &values);

struct ConfigSummary {
  std::string name;
  int loa_level = 0;
  size_t participants = 0;
  MeanSd clicks;
  MeanSd time_s;
  MeanSd tlx;  // n == 0 without surveys
  MeanSd precision;
  MeanSd recall;
  MeanSd f;
  MeanSd resque;
  bool on_frontier = false;
  std::vector<std::string> dominated_by;
};

// One-way ANOVA and Tukey HSD of one metric across configurations.
struct MetricTest {
  std::string metric;
  std::optional<stats::AnovaResult> anova;
  std::vector<stats::TukeyComparison> tukey;
  std::string note;  // why the test is unavailable, if it is
};

struct SweetSpotReport {
  std::vector<ConfigSummary> rows;
  std::vector<std::string> frontier;
  std::vector<MetricTest> tests;
};

// Per-configuration summary table plus the Pareto frontier over (fewer clicks, less
// time, higher mean F). Dominated rows list their dominators; no row is
// picked as the winner. Throws Error(kInvalidArgument) without runs or with
// an empty run, and Error(kValidation) when idea orders differ.
SweetSpotReport BuildSweetSpotReport(const std::vector<ConfigRun> &runs);

// Per-session quality and effort of every session in an export, partial
// and excluded ones included and marked.
nlohmann::json EvaluateExport(const StudyExport &doc, const GoldStandard &gold);
std::string EvaluationToCsv(const nlohmann::json &evaluation);

nlohmann::json ReportToJson(const SweetSpotReport &report);
std::string ReportToCsv(const SweetSpotReport &report);
std::string ReportToText(const SweetSpotReport &report);

}  // namespace icv

#endif  // ICV_REPORT_H_
