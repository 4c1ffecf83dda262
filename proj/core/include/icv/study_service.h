#ifndef ICV_STUDY_SERVICE_H_
#define ICV_STUDY_SERVICE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icv/configuration.h"
#include "icv/report.h"
#include "icv/session.h"
#include "icv/study_export.h"

namespace icv {

// Body of a study creation request. Conditions are preset names or full
// configuration objects.
struct StudySpec {
  std::string name;
  std::vector<Configuration> conditions;
  std::string corpus_path;
  std::string lexicon_path;
  std::optional<std::string> gold_path;
  // Human-supplied candidate lists; replaces spotting when present.
  std::optional<std::string> candidates_path;
  Assignment assignment;
};

StudySpec StudySpecFromJson(const nlohmann::json &doc);

// A participant action posted by a client.
struct EventRequest {
  std::string event_id;
  EventKind kind = EventKind::kConceptClick;
  std::optional<size_t> term;
  std::optional<std::string> uri;
  int64_t timestamp_ms = 0;
};

EventRequest EventRequestFromJson(const nlohmann::json &doc);

struct ServiceOptions {
  // Root for persisted studies; empty keeps everything in memory.
  std::string data_dir;
  // A snapshot is written after this many log records.
  size_t snapshot_every = 100;
  // Milliseconds since the epoch; defaults to the system clock.
  std::function<int64_t()> clock;
  // Client timestamps may run ahead of the server clock by this much.
  int64_t future_slack_ms = 5000;
};

// Hosts studies: assignment, command ingestion, surveys, persistence and
// export. Thread-safe. Commands for one session are applied one at a time
// in arrival order; different sessions proceed independently.
//
// Every acknowledged write is appended to <data_dir>/<study>/log.jsonl and
// flushed to disk before the call returns. snapshot.json holds the export
// document plus the last log sequence number it covers; recovery loads the
// snapshot and replays the log tail.
class StudyService {
 public:
  explicit StudyService(ServiceOptions options = {});
  ~StudyService();

  StudyService(const StudyService &) = delete;
  StudyService &operator=(const StudyService &) = delete;

  std::string CreateStudy(const StudySpec &spec);

  // Recreates a study from an export document under its original id.
  std::string ImportStudy(const StudyExport &doc);

  std::vector<std::string> StudyIds() const;

  // {sessionId, condition, firstIdea, terms}. A repeated participant raises
  // Error(kConflict) with the original session in the details.
  nlohmann::json AssignParticipant(const std::string &study_id,
                                   const std::string &participant_id);

  SessionRecord GetSession(const std::string &session_id) const;

  // Session state plus idea texts, condition and study id.
  nlohmann::json SessionView(const std::string &session_id) const;

  // Applies one participant command. Repeated event ids are ignored.
  void PostEvent(const std::string &session_id, const EventRequest &event);

  // Submits the current idea. Returns the next idea view or {phase:survey}.
  nlohmann::json SubmitIdea(const std::string &session_id, size_t idea_index,
                            std::optional<int64_t> timestamp_ms = {});

  void SubmitSurvey(const std::string &session_id,
                    const SurveySubmission &survey);
  void CompleteTutorial(const std::string &session_id);

  StudyExport Export(const std::string &study_id) const;
  ExclusionReport Exclusions(const std::string &study_id) const;

  // Throws Error(kFailedPrecondition) without a gold standard or without any
  // session to report.
  SweetSpotReport Report(const std::string &study_id,
                         const RunOptions &options = {}) const;

  // Writes a snapshot now. No-op for in-memory services.
  void Snapshot(const std::string &study_id);

 private:
  struct Slot;
  struct Study;

  Study &FindStudy(const std::string &id) const;
  std::pair<Study *, Slot *> FindSession(const std::string &id) const;
  Study &AddStudy(std::unique_ptr<Study> study);
  void Recover();
  void RecoverStudy(const std::string &dir);
  void Replay(Study &study, const nlohmann::json &record);
  void Persist(Study &study, nlohmann::json record);
  void MaybeSnapshot(Study &study);
  void WriteSnapshot(Study &study);
  void WriteStudyFiles(const Study &study);
  nlohmann::json IdeaView(const Study &study, const SessionState &s) const;
  int64_t Now() const;

  Slot &CreateSession(Study &study, const std::string &participant_id,
                      size_t condition, std::string session_id,
                      int64_t start_ms);
  void CheckClientTimestamp(const SessionState &s, int64_t ts) const;

  ServiceOptions options_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::unique_ptr<Study>> studies_;
  std::map<std::string, std::pair<Study *, Slot *>> sessions_;
  uint64_t next_study_ = 1;
};

}  // namespace icv

#endif  // ICV_STUDY_SERVICE_H_
