#ifndef ICV_METRICS_H_
#define ICV_METRICS_H_

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "icv/corpus.h"
#include "icv/kg_client.h"
#include "icv/session.h"

namespace icv {

// ---------------------------------------------------------------------------
// Data quality

// One selected concept for one term span.
struct Selection {
  Span span;
  std::string uri;
};

struct IdeaAnnotations {
  std::string idea_id;
  std::vector<Selection> selections;
};

// Per-idea annotations in idea order.
using Annotations = std::vector<IdeaAnnotations>;

struct IdeaQuality {
  std::string idea_id;
  size_t selected = 0;  // selected uris
  size_t correct = 0;   // selected uris found in an overlapping gold entry
  size_t gold = 0;      // gold entries
  size_t matched = 0;   // gold entries hit by at least one correct selection
  // Undefined values stay empty. An idea with gold entries but no selection
  // has precision 0; an idea without gold entries has no recall.
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f;
};

struct QualityReport {
  std::vector<IdeaQuality> ideas;
  // Unweighted means over ideas where the value is defined.
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f = 0.0;
  // Totals over the whole annotation set.
  size_t selected = 0;
  size_t correct = 0;
  size_t gold = 0;
  size_t matched = 0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f = 0.0;
};

// 2pr/(p+r), 0 when p + r == 0.
double HarmonicMean(double p, double r);

// Throws Error(kValidation) when the gold standard lacks one of the ideas.
QualityReport ScoreAnnotations(const Annotations &annotations,
                               const GoldStandard &gold);

// Accepted and auto-selected terms of a session. With `submitted_only`,
// ideas that were not submitted are left out entirely.
Annotations SessionAnnotations(const SessionState &session,
                               bool submitted_only = false);

// Requires the annotation phase to be over.
QualityReport ScoreSession(const SessionState &session,
                           const GoldStandard &gold);

Annotations ToAnnotations(const std::vector<AutoAnnotation> &auto_annotations);

nlohmann::json QualityToJson(const QualityReport &report);

// ---------------------------------------------------------------------------
// Effort

struct EffortReport {
  size_t clicks = 0;
  double duration_s = 0.0;
  std::map<size_t, size_t> clicks_per_idea;
};

// Clicks are concept clicks, accept/continue, nothing-fits and reopens.
// Duration runs from session_start to session_end. Throws Error(kValidation)
// if either boundary event is missing.
EffortReport EffortFromLog(const EventLog &log);

nlohmann::json EffortToJson(const EffortReport &report);

// ---------------------------------------------------------------------------
// Questionnaires

// Raw TLX without the physical-demand scale. Each rating is 1..7.
struct TlxResponse {
  int mental = 1;
  int temporal = 1;
  int performance = 1;
  int effort = 1;
  int frustration = 1;

  void Validate() const;
};

inline constexpr int kTlxMin = 1;
inline constexpr int kTlxMax = 7;

int RawTlx(const TlxResponse &response);

// Eleven ResQue items Q01..Q11 on a -2..2 scale.
struct ResQueResponse {
  std::array<int, 11> items{};

  void Validate() const;
};

struct ResQueAggregate {
  double overall = 0.0;
  double perceived_qualities = 0.0;  // Q02 Q03 Q04 Q05 Q07
  double beliefs = 0.0;              // Q01 Q06 Q08 Q09
  double attitudes = 0.0;            // Q10 Q11
};

ResQueAggregate AggregateResQue(const ResQueResponse &response);

// Topic of each ResQue item, Q01 first.
const std::array<const char *, 11> &ResQueTopics();

double RoundTo(double value, int decimals);

nlohmann::json TlxToJson(const TlxResponse &r);
TlxResponse TlxFromJson(const nlohmann::json &doc);
nlohmann::json ResQueToJson(const ResQueResponse &r);
ResQueResponse ResQueFromJson(const nlohmann::json &doc);

// ---------------------------------------------------------------------------
// Threshold sweep over the all-computer configuration

struct SweepRow {
  double gamma = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f = 0.0;
};

struct SweepResult {
  double step = 0.0;
  std::vector<SweepRow> rows;
};

// gamma_i = from + i * step for every gamma <= to (with a 1e-9 slack).
// Throws Error(kInvalidArgument) unless step > 0 and 0 <= from <= to <= 1.
// Backend errors propagate with the failing gamma appended to the cause.
SweepResult ThresholdSweep(const Corpus &corpus, const GoldStandard &gold,
                           const ConceptBackend &backend, double from,
                           double to, double step);

// Row with the highest macro F; the smallest gamma wins ties.
const SweepRow &BestSweepRow(const SweepResult &sweep);

std::string SweepToCsv(const SweepResult &sweep);
std::string SweepRowToCsv(const SweepRow &row);

// ---------------------------------------------------------------------------
// Agreement

// Cohen's kappa over two categorical labelings of the same items.
// Returns 1 when both agreement and chance agreement are 1; throws
// Error(kUndefined) when chance agreement is 1 but observed agreement is not,
// and Error(kValidation) when the item sets differ.
double CohensKappa(const std::map<std::string, std::string> &a,
                   const std::map<std::string, std::string> &b);

// {"<item>": "<label>", ...}
std::map<std::string, std::string> LoadLabels(const std::string &path);

}  // namespace icv

#endif  // ICV_METRICS_H_
