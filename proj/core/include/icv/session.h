#ifndef ICV_SESSION_H_
#define ICV_SESSION_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "icv/configuration.h"
#include "icv/lexicon.h"

namespace icv {

enum class TermStatus { kUnhandled, kActive, kAccepted, kRejected, kAutoSelected };

const char *TermStatusName(TermStatus status);
TermStatus ParseTermStatus(std::string_view name);

inline bool IsTerminal(TermStatus s) {
  return s == TermStatus::kAccepted || s == TermStatus::kRejected ||
         s == TermStatus::kAutoSelected;
}

struct TermState {
  AnnotationCandidate candidate;
  TermStatus status = TermStatus::kUnhandled;
  std::set<std::string> chosen;
  // Candidate uris in display order; a permutation of the candidate list.
  std::vector<std::string> presented_order;
  // Chosen was pre-filled by the computer and awaits verification.
  bool preselected = false;

  bool HasCandidate(const std::string &uri) const;
};

struct IdeaState {
  std::string idea_id;
  std::vector<TermState> terms;
  bool submitted = false;
};

enum class EventKind {
  kConceptClick,
  kAcceptContinue,
  kNothingFits,
  kReopenTerm,
  kIdeaSubmit,
  kSessionStart,
  kSessionEnd,
};

const char *EventKindName(EventKind kind);
EventKind ParseEventKind(std::string_view name);

// Events a participant causes directly. Each one is one click.
inline bool IsHumanEvent(EventKind kind) {
  return kind == EventKind::kConceptClick ||
         kind == EventKind::kAcceptContinue ||
         kind == EventKind::kNothingFits || kind == EventKind::kReopenTerm;
}

struct Event {
  int64_t timestamp_ms = 0;
  std::string session_id;
  EventKind kind = EventKind::kSessionStart;
  nlohmann::json payload = nlohmann::json::object();
  // Client-generated id used for idempotent ingestion; may be empty.
  std::string event_id;
};

using EventLog = std::vector<Event>;

enum class Phase { kAnnotating, kSurvey, kComplete };

const char *PhaseName(Phase phase);
Phase ParsePhase(std::string_view name);

struct SessionState {
  std::string session_id;
  std::string participant_id;
  Configuration configuration;
  std::vector<std::string> idea_queue;
  std::vector<IdeaState> ideas;  // parallel to idea_queue
  size_t current_idea = 0;
  std::optional<size_t> current_term;
  Phase phase = Phase::kAnnotating;
  bool tutorial_completed = false;
  EventLog events;
};

// A participant action as received from a client or a simulated policy.
struct Command {
  EventKind kind = EventKind::kAcceptContinue;
  std::optional<size_t> term;
  std::optional<std::string> uri;

  static Command Click(size_t term, std::string uri) {
    return {EventKind::kConceptClick, term, std::move(uri)};
  }
  static Command Accept() { return {EventKind::kAcceptContinue, {}, {}}; }
  static Command Reject() { return {EventKind::kNothingFits, {}, {}}; }
  static Command Reopen(size_t term) {
    return {EventKind::kReopenTerm, term, {}};
  }
};

// Presentation order for a candidate list under `ordering`: alphabetical by
// case-insensitive label (uri breaks ties) or confidence descending (label,
// then uri, break ties).
std::vector<std::string> PresentationOrder(const AnnotationCandidate &candidate,
                                           Ordering ordering);

// The annotation state machine for one participant. Every mutating call
// either succeeds and appends its events, or throws and leaves the state
// untouched. Not thread-safe; callers serialize commands per session.
class Session {
 public:
  // Builds term states for `idea_ids` (order is kept) and applies the
  // configuration's automation. Throws on an invalid configuration, an empty
  // idea list, or an idea without precomputed candidates.
  static Session Create(std::string session_id, std::string participant_id,
                        const std::vector<std::string> &idea_ids,
                        const CandidateMap &candidates,
                        const Configuration &config, int64_t start_ms);

  explicit Session(SessionState state) : state_(std::move(state)) {}

  const SessionState &state() const { return state_; }

  void SelectConcept(size_t term, const std::string &uri, int64_t ts,
                     std::string event_id = {});
  void AcceptContinue(int64_t ts, std::string event_id = {});
  void NothingFits(int64_t ts, std::string event_id = {});
  void ReopenTerm(size_t term, int64_t ts, std::string event_id = {});

  // Submits the current idea without a click; `idea_index` must be the
  // current idea and all its terms handled.
  void SubmitIdea(size_t idea_index, int64_t ts);

  void Apply(const Command &command, int64_t ts, std::string event_id = {});

  // survey -> complete.
  void CompleteSurvey();
  void MarkTutorialCompleted() { state_.tutorial_completed = true; }

 private:
  void RequireAnnotating() const;
  void CheckTimestamp(int64_t ts) const;
  TermState *CurrentTerm();
  void Append(EventKind kind, int64_t ts, nlohmann::json payload,
              std::string event_id);
  void Focus(size_t term);
  void Advance();
  void Submit(int64_t ts);

  SessionState state_;
};

}  // namespace icv

#endif  // ICV_SESSION_H_
