#ifndef ICV_STUDY_EXPORT_H_
#define ICV_STUDY_EXPORT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icv/configuration.h"
#include "icv/metrics.h"
#include "icv/session.h"

namespace icv {

inline constexpr const char *kExportFormat = "icv-study-export";
inline constexpr int kExportVersion = 1;

struct Demographics {
  std::optional<std::string> age_group;
  std::optional<std::string> gender;
};

struct SurveySubmission {
  TlxResponse tlx;
  ResQueResponse resque;
  Demographics demographics;
  std::optional<std::string> feedback;
};

nlohmann::json SurveyToJson(const SurveySubmission &survey);
// Validates scale bounds.
SurveySubmission SurveyFromJson(const nlohmann::json &doc);

enum class AssignmentPolicy { kRoundRobin, kRandom };

struct Assignment {
  AssignmentPolicy policy = AssignmentPolicy::kRoundRobin;
  uint64_t seed = 0;
};

nlohmann::json AssignmentToJson(const Assignment &assignment);
Assignment AssignmentFromJson(const nlohmann::json &doc);

// Exclusion reasons for sessions past the annotation phase:
//   all_rejected   every term the participant handled was rejected
//   none_rejected  not a single term was rejected
// Auto-selected terms are not the participant's decision and are ignored
// by both filters; sessions without a single human decision (LoA 10) and
// sessions still annotating are never flagged.
std::optional<std::string> ExclusionReason(const SessionState &session);

// The participant never reached the survey.
inline bool IsPartial(const SessionState &session) {
  return session.phase == Phase::kAnnotating;
}

struct SessionRecord {
  std::string condition;  // configuration name
  SessionState session;
  std::optional<SurveySubmission> survey;
};

struct StudyInfo {
  std::string id;
  std::string name;
  std::vector<Configuration> conditions;
  Assignment assignment;
  std::string corpus_path;
  std::string lexicon_path;
  std::optional<std::string> gold_path;
  std::optional<std::string> candidates_path;
  std::vector<std::string> idea_order;
};

nlohmann::json StudyInfoToJson(const StudyInfo &info);
StudyInfo StudyInfoFromJson(const nlohmann::json &doc);

struct StudyExport {
  StudyInfo study;
  std::vector<SessionRecord> sessions;
};

// Exclusion and partial flags are derived from the session and written for
// readers; they are recomputed, not trusted, on import.
nlohmann::json ExportToJson(const StudyExport &doc);
StudyExport ExportFromJson(const nlohmann::json &doc);
StudyExport LoadExport(const std::string &path);

// Pretty-printed with sorted keys and a trailing newline.
std::string DumpJson(const nlohmann::json &doc);

struct ExclusionEntry {
  std::string session_id;
  std::string participant_id;
  std::string condition;
  std::string reason;
};

struct ExclusionReport {
  size_t sessions = 0;   // sessions past annotation
  std::vector<ExclusionEntry> excluded;
};

ExclusionReport ApplyExclusionFilters(const StudyExport &doc);
nlohmann::json ExclusionReportToJson(const ExclusionReport &report);

}  // namespace icv

#endif  // ICV_STUDY_EXPORT_H_
