#include "icv/session.h"

#include <algorithm>
#include <cctype>

#include "icv/error.h"
#include "icv/kg_client.h"

namespace icv {

using nlohmann::json;

namespace {

std::string Lowercase(const std::string &s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

Error Precondition(const std::string &message) {
  return Error(ErrorCode::kFailedPrecondition, message);
}

}  // namespace

const char *TermStatusName(TermStatus status) {
  switch (status) {
    case TermStatus::kUnhandled: return "unhandled";
    case TermStatus::kActive: return "active";
    case TermStatus::kAccepted: return "accepted";
    case TermStatus::kRejected: return "rejected";
    case TermStatus::kAutoSelected: return "auto_selected";
  }
  return "unhandled";
}

TermStatus ParseTermStatus(std::string_view name) {
  for (TermStatus s : {TermStatus::kUnhandled, TermStatus::kActive,
                       TermStatus::kAccepted, TermStatus::kRejected,
                       TermStatus::kAutoSelected}) {
    if (name == TermStatusName(s)) return s;
  }
  throw Error(ErrorCode::kParse, "unknown term status " + std::string(name));
}

const char *EventKindName(EventKind kind) {
  switch (kind) {
    case EventKind::kConceptClick: return "concept_click";
    case EventKind::kAcceptContinue: return "accept_continue";
    case EventKind::kNothingFits: return "nothing_fits";
    case EventKind::kReopenTerm: return "reopen_term";
    case EventKind::kIdeaSubmit: return "idea_submit";
    case EventKind::kSessionStart: return "session_start";
    case EventKind::kSessionEnd: return "session_end";
  }
  return "session_start";
}

EventKind ParseEventKind(std::string_view name) {
  for (EventKind k :
       {EventKind::kConceptClick, EventKind::kAcceptContinue,
        EventKind::kNothingFits, EventKind::kReopenTerm, EventKind::kIdeaSubmit,
        EventKind::kSessionStart, EventKind::kSessionEnd}) {
    if (name == EventKindName(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown event kind " + std::string(name));
}

const char *PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kAnnotating: return "annotating";
    case Phase::kSurvey: return "survey";
    case Phase::kComplete: return "complete";
  }
  return "annotating";
}

Phase ParsePhase(std::string_view name) {
  for (Phase p : {Phase::kAnnotating, Phase::kSurvey, Phase::kComplete}) {
    if (name == PhaseName(p)) return p;
  }
  throw Error(ErrorCode::kParse, "unknown phase " + std::string(name));
}

bool TermState::HasCandidate(const std::string &uri) const {
  return std::any_of(
      candidate.candidates.begin(), candidate.candidates.end(),
      [&](const ScoredConcept &c) { return c.entity.uri == uri; });
}

std::vector<std::string> PresentationOrder(const AnnotationCandidate &candidate,
                                           Ordering ordering) {
  std::vector<const ScoredConcept *> items;
  for (const ScoredConcept &c : candidate.candidates) items.push_back(&c);
  if (ordering == Ordering::kAlphabetical) {
    std::sort(items.begin(), items.end(),
              [](const ScoredConcept *a, const ScoredConcept *b) {
                const std::string la = Lowercase(a->entity.label);
                const std::string lb = Lowercase(b->entity.label);
                if (la != lb) return la < lb;
                return a->entity.uri < b->entity.uri;
              });
  } else {
    std::sort(items.begin(), items.end(),
              [](const ScoredConcept *a, const ScoredConcept *b) {
                if (a->confidence != b->confidence) {
                  return a->confidence > b->confidence;
                }
                const std::string la = Lowercase(a->entity.label);
                const std::string lb = Lowercase(b->entity.label);
                if (la != lb) return la < lb;
                return a->entity.uri < b->entity.uri;
              });
  }
  std::vector<std::string> order;
  for (const ScoredConcept *c : items) order.push_back(c->entity.uri);
  return order;
}

Session Session::Create(std::string session_id, std::string participant_id,
                        const std::vector<std::string> &idea_ids,
                        const CandidateMap &candidates,
                        const Configuration &config, int64_t start_ms) {
  config.Validate();
  if (idea_ids.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "session needs at least one idea");
  }
  SessionState s;
  s.session_id = std::move(session_id);
  s.participant_id = std::move(participant_id);
  s.configuration = config;
  s.idea_queue = idea_ids;

  const bool all_computer = config.loa_level == 10;
  json auto_selected = json::array();
  json preselected = json::array();
  for (size_t k = 0; k < idea_ids.size(); ++k) {
    auto it = candidates.find(idea_ids[k]);
    if (it == candidates.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no candidates computed for idea " + idea_ids[k]);
    }
    IdeaState idea;
    idea.idea_id = idea_ids[k];
    for (const AnnotationCandidate &candidate : it->second) {
      TermState term;
      term.candidate = candidate;
      term.presented_order = PresentationOrder(candidate, config.ordering);
      const ScoredConcept &best = BestCandidate(candidate);
      const size_t t = idea.terms.size();
      if (all_computer ||
          (config.autoselect_and_skip && config.Fires(best.confidence))) {
        term.status = TermStatus::kAutoSelected;
        term.chosen = {best.entity.uri};
        auto_selected.push_back({{"idea", k}, {"term", t}});
      } else if (config.preselect && config.Fires(best.confidence)) {
        term.chosen = {best.entity.uri};
        term.preselected = true;
        preselected.push_back({{"idea", k}, {"term", t}});
      }
      idea.terms.push_back(std::move(term));
    }
    s.ideas.push_back(std::move(idea));
  }

  Session session(std::move(s));
  session.Append(EventKind::kSessionStart, start_ms,
                 {{"configuration", config.name},
                  {"autoSelected", auto_selected},
                  {"preselected", preselected}},
                 {});
  if (all_computer) {
    for (size_t k = 0; k < session.state_.ideas.size(); ++k) {
      session.state_.ideas[k].submitted = true;
      session.Append(EventKind::kIdeaSubmit, start_ms, {{"idea", k}}, {});
    }
    session.state_.current_idea = session.state_.ideas.size() - 1;
    session.Append(EventKind::kSessionEnd, start_ms, json::object(), {});
    session.state_.phase = Phase::kComplete;
  } else {
    session.Advance();
  }
  return session;
}

void Session::RequireAnnotating() const {
  if (state_.phase != Phase::kAnnotating) {
    throw Precondition(std::string("session is in phase ") +
                       PhaseName(state_.phase));
  }
}

void Session::CheckTimestamp(int64_t ts) const {
  if (!state_.events.empty() && ts < state_.events.back().timestamp_ms) {
    throw Error(ErrorCode::kInvalidArgument,
                "timestamp " + std::to_string(ts) + " precedes last event");
  }
}

TermState *Session::CurrentTerm() {
  if (!state_.current_term) return nullptr;
  return &state_.ideas[state_.current_idea].terms[*state_.current_term];
}

void Session::Append(EventKind kind, int64_t ts, json payload,
                     std::string event_id) {
  Event e;
  e.timestamp_ms = ts;
  e.session_id = state_.session_id;
  e.kind = kind;
  e.payload = std::move(payload);
  e.event_id = std::move(event_id);
  state_.events.push_back(std::move(e));
}

void Session::Focus(size_t term) {
  std::vector<TermState> &terms = state_.ideas[state_.current_idea].terms;
  if (state_.current_term && *state_.current_term != term &&
      terms[*state_.current_term].status == TermStatus::kActive) {
    terms[*state_.current_term].status = TermStatus::kUnhandled;
  }
  terms[term].status = TermStatus::kActive;
  state_.current_term = term;
}

// Moves the cursor to the next unhandled term of the current idea,
// searching forward from the cursor and wrapping around.
void Session::Advance() {
  const std::vector<TermState> &terms = state_.ideas[state_.current_idea].terms;
  const size_t n = terms.size();
  const size_t from = state_.current_term ? *state_.current_term + 1 : 0;
  for (size_t step = 0; step < n; ++step) {
    const size_t t = (from + step) % n;
    if (terms[t].status == TermStatus::kUnhandled) {
      Focus(t);
      return;
    }
  }
  state_.current_term.reset();
}

void Session::Submit(int64_t ts) {
  IdeaState &idea = state_.ideas[state_.current_idea];
  idea.submitted = true;
  Append(EventKind::kIdeaSubmit, ts, {{"idea", state_.current_idea}}, {});
  state_.current_term.reset();
  if (state_.current_idea + 1 < state_.ideas.size()) {
    ++state_.current_idea;
    Advance();
  } else {
    state_.phase = Phase::kSurvey;
    Append(EventKind::kSessionEnd, ts, json::object(), {});
  }
}

void Session::SelectConcept(size_t term, const std::string &uri, int64_t ts,
                            std::string event_id) {
  RequireAnnotating();
  CheckTimestamp(ts);
  std::vector<TermState> &terms = state_.ideas[state_.current_idea].terms;
  if (term >= terms.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no term " + std::to_string(term) + " in current idea");
  }
  TermState &target = terms[term];
  if (IsTerminal(target.status)) {
    throw Precondition("term " + std::to_string(term) +
                       " is already handled; reopen it first");
  }
  if (!target.HasCandidate(uri)) {
    throw Error(ErrorCode::kInvalidArgument,
                "concept " + uri + " is not a candidate for term " +
                    std::to_string(term));
  }
  if (target.status == TermStatus::kUnhandled) Focus(term);
  if (!target.chosen.erase(uri)) target.chosen.insert(uri);
  Append(EventKind::kConceptClick, ts,
         {{"idea", state_.current_idea}, {"term", term}, {"uri", uri}},
         std::move(event_id));
}

void Session::AcceptContinue(int64_t ts, std::string event_id) {
  RequireAnnotating();
  CheckTimestamp(ts);
  TermState *term = CurrentTerm();
  if (term == nullptr) {
    Append(EventKind::kAcceptContinue, ts, {{"idea", state_.current_idea}},
           std::move(event_id));
    Submit(ts);
    return;
  }
  if (term->chosen.empty()) throw Precondition("no concept selected");
  term->status = TermStatus::kAccepted;
  Append(EventKind::kAcceptContinue, ts,
         {{"idea", state_.current_idea}, {"term", *state_.current_term}},
         std::move(event_id));
  Advance();
}

void Session::NothingFits(int64_t ts, std::string event_id) {
  RequireAnnotating();
  CheckTimestamp(ts);
  TermState *term = CurrentTerm();
  if (term == nullptr) throw Precondition("no current term");
  term->status = TermStatus::kRejected;
  term->chosen.clear();
  term->preselected = false;
  Append(EventKind::kNothingFits, ts,
         {{"idea", state_.current_idea}, {"term", *state_.current_term}},
         std::move(event_id));
  Advance();
}

void Session::ReopenTerm(size_t term, int64_t ts, std::string event_id) {
  RequireAnnotating();
  CheckTimestamp(ts);
  IdeaState &idea = state_.ideas[state_.current_idea];
  if (idea.submitted) throw Precondition("idea already submitted");
  if (term >= idea.terms.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no term " + std::to_string(term) + " in current idea");
  }
  if (!IsTerminal(idea.terms[term].status)) {
    throw Precondition("term " + std::to_string(term) + " is not handled yet");
  }
  Focus(term);
  Append(EventKind::kReopenTerm, ts,
         {{"idea", state_.current_idea}, {"term", term}}, std::move(event_id));
}

void Session::SubmitIdea(size_t idea_index, int64_t ts) {
  RequireAnnotating();
  CheckTimestamp(ts);
  if (idea_index != state_.current_idea) {
    throw Precondition("idea " + std::to_string(idea_index) +
                       " is not the current idea");
  }
  if (state_.current_term) throw Precondition("idea has unhandled terms");
  Submit(ts);
}

void Session::Apply(const Command &command, int64_t ts, std::string event_id) {
  switch (command.kind) {
    case EventKind::kConceptClick:
      if (!command.term || !command.uri) {
        throw Error(ErrorCode::kInvalidArgument,
                    "concept_click needs termIndex and conceptUri");
      }
      SelectConcept(*command.term, *command.uri, ts, std::move(event_id));
      return;
    case EventKind::kAcceptContinue:
      AcceptContinue(ts, std::move(event_id));
      return;
    case EventKind::kNothingFits:
      NothingFits(ts, std::move(event_id));
      return;
    case EventKind::kReopenTerm:
      if (!command.term) {
        throw Error(ErrorCode::kInvalidArgument, "reopen_term needs termIndex");
      }
      ReopenTerm(*command.term, ts, std::move(event_id));
      return;
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(EventKindName(command.kind)) +
                      " cannot be sent by a client");
  }
}

void Session::CompleteSurvey() {
  if (state_.phase != Phase::kSurvey) {
    throw Precondition(std::string("session is in phase ") +
                       PhaseName(state_.phase));
  }
  state_.phase = Phase::kComplete;
}

}  // namespace icv
