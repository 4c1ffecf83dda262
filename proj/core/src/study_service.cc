#include "icv/study_service.h"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "icv/corpus.h"
#include "icv/error.h"
#include "icv/lexicon.h"
#include "icv/session_io.h"
#include "icv/simulator.h"

namespace icv {

namespace fs = std::filesystem;
using nlohmann::json;

struct StudyService::Slot {
  std::mutex mu;
  SessionRecord record;
  std::set<std::string> event_ids;
};

struct StudyService::Study {
  StudyInfo info;
  Corpus corpus;
  std::map<std::string, std::string> texts;
  CandidateMap candidates;
  std::optional<GoldStandard> gold;
  fs::path dir;  // empty for in-memory studies

  // Shared by commands, exclusive for registration, export and snapshots.
  mutable std::shared_mutex mu;
  std::vector<std::unique_ptr<Slot>> slots;  // assignment order
  std::map<std::string, size_t> by_participant;

  std::mutex log_mu;
  std::FILE *log = nullptr;
  uint64_t seq = 0;
  size_t since_snapshot = 0;

  ~Study() {
    if (log != nullptr) std::fclose(log);
  }
};

namespace {

json EventRequestToJson(const EventRequest &e) {
  json doc = {{"eventId", e.event_id},
              {"kind", EventKindName(e.kind)},
              {"timestampMs", e.timestamp_ms}};
  if (e.term) doc["termIndex"] = *e.term;
  if (e.uri) doc["conceptUri"] = *e.uri;
  return doc;
}

SessionState AfterEvent(const SessionState &state, const EventRequest &e) {
  Session s(state);
  s.Apply(Command{e.kind, e.term, e.uri}, e.timestamp_ms, e.event_id);
  return s.state();
}

SessionState AfterSubmit(const SessionState &state, size_t idea, int64_t ts) {
  Session s(state);
  s.SubmitIdea(idea, ts);
  return s.state();
}

SessionRecord AfterSurvey(const SessionRecord &record,
                          const SurveySubmission &survey) {
  if (record.survey) {
    throw Error(ErrorCode::kConflict,
                "survey already submitted for session " +
                    record.session.session_id);
  }
  if (record.session.phase != Phase::kSurvey) {
    throw Error(ErrorCode::kFailedPrecondition,
                "session " + record.session.session_id +
                    " is not in the survey phase");
  }
  survey.tlx.Validate();
  survey.resque.Validate();
  SessionRecord next = record;
  next.survey = survey;
  Session s(next.session);
  s.CompleteSurvey();
  next.session = s.state();
  return next;
}

std::string ReadText(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes via a temporary file and rename so readers never see a torn file.
void WriteFileAtomically(const fs::path &path, const std::string &content) {
  const fs::path tmp = path.string() + ".tmp";
  std::FILE *f = std::fopen(tmp.c_str(), "wb");
  if (f == nullptr) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  const bool ok = std::fwrite(content.data(), 1, content.size(), f) ==
                      content.size() &&
                  std::fflush(f) == 0 && ::fsync(fileno(f)) == 0;
  std::fclose(f);
  if (!ok) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace " + path.string());
}

// Loading failures at study creation are the request's fault.
template <typename Fn>
auto Resolving(const std::string &what, Fn &&fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kIo) throw;
    throw Error(ErrorCode::kValidation, what + " not resolvable: " + e.what(),
                {{"what", what}});
  }
}

std::string SessionIdFor(const std::string &study_id, size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "-s%04zu", index + 1);
  return study_id + buf;
}

}  // namespace

StudySpec StudySpecFromJson(const json &doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "study request must be a JSON object");
  }
  try {
    StudySpec spec;
    spec.name = doc.value("name", "");
    for (const json &c : doc.at("conditions")) {
      spec.conditions.push_back(c.is_string()
                                    ? PresetConfiguration(c.get<std::string>())
                                    : ConfigurationFromJson(c));
    }
    spec.corpus_path = doc.at("corpusPath").get<std::string>();
    spec.lexicon_path = doc.value("lexiconPath", "");
    if (doc.contains("goldPath") && !doc["goldPath"].is_null()) {
      spec.gold_path = doc["goldPath"].get<std::string>();
    }
    if (doc.contains("candidatesPath") && !doc["candidatesPath"].is_null()) {
      spec.candidates_path = doc["candidatesPath"].get<std::string>();
    }
    if (doc.contains("assignment")) {
      spec.assignment = AssignmentFromJson(doc["assignment"]);
    }
    return spec;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("study request: ") + e.what());
  }
}

EventRequest EventRequestFromJson(const json &doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "event must be a JSON object");
  }
  try {
    EventRequest e;
    e.event_id = doc.at("eventId").get<std::string>();
    e.kind = ParseEventKind(doc.at("kind").get<std::string>());
    if (doc.contains("termIndex") && !doc["termIndex"].is_null()) {
      e.term = doc["termIndex"].get<size_t>();
    }
    if (doc.contains("conceptUri") && !doc["conceptUri"].is_null()) {
      e.uri = doc["conceptUri"].get<std::string>();
    }
    e.timestamp_ms = doc.at("timestampMs").get<int64_t>();
    if (e.event_id.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "eventId must not be empty");
    }
    if (!IsHumanEvent(e.kind)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("event kind ") + EventKindName(e.kind) +
                      " cannot be posted by a client");
    }
    return e;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("event: ") + e.what());
  }
}

StudyService::StudyService(ServiceOptions options)
    : options_(std::move(options)) {
  if (options_.snapshot_every == 0) options_.snapshot_every = 1;
  if (!options_.data_dir.empty()) Recover();
}

StudyService::~StudyService() = default;

int64_t StudyService::Now() const {
  if (options_.clock) return options_.clock();
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

StudyService::Study &StudyService::FindStudy(const std::string &id) const {
  std::shared_lock lk(mu_);
  auto it = studies_.find(id);
  if (it == studies_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown study " + id, {{"studyId", id}});
  }
  return *it->second;
}

std::pair<StudyService::Study *, StudyService::Slot *> StudyService::FindSession(
    const std::string &id) const {
  std::shared_lock lk(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown session " + id,
                {{"sessionId", id}});
  }
  return it->second;
}

StudyService::Study &StudyService::AddStudy(std::unique_ptr<Study> study) {
  std::unique_lock lk(mu_);
  if (studies_.count(study->info.id)) {
    throw Error(ErrorCode::kConflict, "study " + study->info.id + " exists",
                {{"studyId", study->info.id}});
  }
  for (const auto &slot : study->slots) {
    if (sessions_.count(slot->record.session.session_id)) {
      throw Error(ErrorCode::kConflict,
                  "session " + slot->record.session.session_id + " exists");
    }
  }
  for (const auto &slot : study->slots) {
    sessions_[slot->record.session.session_id] = {study.get(), slot.get()};
  }
  Study &ref = *study;
  studies_[ref.info.id] = std::move(study);
  return ref;
}

std::vector<std::string> StudyService::StudyIds() const {
  std::shared_lock lk(mu_);
  std::vector<std::string> ids;
  for (const auto &[id, _] : studies_) ids.push_back(id);
  return ids;
}

void StudyService::WriteStudyFiles(const Study &study) {
  if (study.dir.empty()) return;
  fs::create_directories(study.dir);
  WriteFileAtomically(study.dir / "study.json",
                      DumpJson(StudyInfoToJson(study.info)));
  WriteFileAtomically(study.dir / "corpus.json",
                      DumpJson(CorpusToJson(study.corpus)));
  WriteFileAtomically(study.dir / "candidates.json",
                      DumpJson(CandidateMapToJson(study.candidates)));
  if (study.gold) {
    WriteFileAtomically(study.dir / "gold.json",
                        DumpJson(GoldToJson(*study.gold)));
  }
}

std::string StudyService::CreateStudy(const StudySpec &spec) {
  if (spec.conditions.empty()) {
    throw Error(ErrorCode::kValidation, "a study needs at least one condition");
  }
  std::set<std::string> names;
  for (const Configuration &c : spec.conditions) {
    c.Validate();
    if (!names.insert(c.name).second) {
      throw Error(ErrorCode::kValidation, "duplicate condition " + c.name,
                  {{"condition", c.name}});
    }
  }
  auto study = std::make_unique<Study>();
  study->corpus = Resolving("corpus", [&] { return LoadCorpus(spec.corpus_path); });
  if (study->corpus.empty()) {
    throw Error(ErrorCode::kValidation, "corpus " + spec.corpus_path +
                                            " has no ideas");
  }
  if (spec.candidates_path) {
    study->candidates = Resolving("candidates", [&] {
      return LoadCandidateMap(*spec.candidates_path, study->corpus);
    });
  } else {
    if (spec.lexicon_path.empty()) {
      throw Error(ErrorCode::kValidation,
                  "a study needs lexiconPath or candidatesPath");
    }
    Lexicon lexicon =
        Resolving("lexicon", [&] { return LoadLexicon(spec.lexicon_path); });
    study->candidates =
        SpotCorpus(study->corpus, lexicon, kDefaultSpotConfidence);
  }
  if (spec.gold_path) {
    study->gold = Resolving(
        "gold", [&] { return LoadGold(*spec.gold_path, study->corpus); });
  }
  for (const Idea &idea : study->corpus) {
    study->info.idea_order.push_back(idea.id);
    study->texts[idea.id] = idea.text;
  }
  study->info.name = spec.name;
  study->info.conditions = spec.conditions;
  study->info.assignment = spec.assignment;
  study->info.corpus_path = spec.corpus_path;
  study->info.lexicon_path = spec.lexicon_path;
  study->info.gold_path = spec.gold_path;
  study->info.candidates_path = spec.candidates_path;
  {
    std::unique_lock lk(mu_);
    do {
      study->info.id = "study-" + std::to_string(next_study_++);
    } while (studies_.count(study->info.id));
  }
  if (!options_.data_dir.empty()) {
    study->dir = fs::path(options_.data_dir) / study->info.id;
    WriteStudyFiles(*study);
    study->log = std::fopen((study->dir / "log.jsonl").c_str(), "ab");
    if (study->log == nullptr) {
      throw Error(ErrorCode::kIo, "cannot open study log");
    }
  }
  return AddStudy(std::move(study)).info.id;
}

std::string StudyService::ImportStudy(const StudyExport &doc) {
  auto study = std::make_unique<Study>();
  study->info = doc.study;
  study->corpus = Resolving("corpus", [&] {
    return LoadCorpus(doc.study.corpus_path);
  });
  std::vector<std::string> ids;
  for (const Idea &idea : study->corpus) {
    ids.push_back(idea.id);
    study->texts[idea.id] = idea.text;
  }
  if (ids != doc.study.idea_order) {
    throw Error(ErrorCode::kValidation,
                "export idea order does not match corpus " +
                    doc.study.corpus_path);
  }
  if (doc.study.candidates_path) {
    study->candidates = Resolving("candidates", [&] {
      return LoadCandidateMap(*doc.study.candidates_path, study->corpus);
    });
  } else {
    Lexicon lexicon = Resolving(
        "lexicon", [&] { return LoadLexicon(doc.study.lexicon_path); });
    study->candidates =
        SpotCorpus(study->corpus, lexicon, kDefaultSpotConfidence);
  }
  if (doc.study.gold_path) {
    study->gold = Resolving(
        "gold", [&] { return LoadGold(*doc.study.gold_path, study->corpus); });
  }
  for (const SessionRecord &r : doc.sessions) {
    auto slot = std::make_unique<Slot>();
    slot->record = r;
    for (const Event &e : r.session.events) {
      if (!e.event_id.empty()) slot->event_ids.insert(e.event_id);
    }
    if (!study->by_participant
             .emplace(r.session.participant_id, study->slots.size())
             .second) {
      throw Error(ErrorCode::kValidation,
                  "participant " + r.session.participant_id +
                      " appears twice in the export");
    }
    study->slots.push_back(std::move(slot));
  }
  if (!options_.data_dir.empty()) {
    study->dir = fs::path(options_.data_dir) / study->info.id;
    if (fs::exists(study->dir / "study.json")) {
      throw Error(ErrorCode::kConflict, "study " + study->info.id + " exists",
                  {{"studyId", study->info.id}});
    }
  }
  Study &ref = AddStudy(std::move(study));
  if (!ref.dir.empty()) {
    WriteStudyFiles(ref);
    ref.log = std::fopen((ref.dir / "log.jsonl").c_str(), "ab");
    if (ref.log == nullptr) throw Error(ErrorCode::kIo, "cannot open study log");
    std::unique_lock lk(ref.mu);
    WriteSnapshot(ref);
  }
  return ref.info.id;
}

StudyService::Slot &StudyService::CreateSession(Study &study,
                                                const std::string &participant,
                                                size_t condition,
                                                std::string session_id,
                                                int64_t start_ms) {
  if (condition >= study.info.conditions.size()) {
    throw Error(ErrorCode::kValidation, "condition index out of range");
  }
  const Configuration &config = study.info.conditions[condition];
  auto slot = std::make_unique<Slot>();
  slot->record.condition = config.name;
  slot->record.session =
      Session::Create(std::move(session_id), participant,
                      study.info.idea_order, study.candidates, config, start_ms)
          .state();
  study.by_participant[participant] = study.slots.size();
  study.slots.push_back(std::move(slot));
  return *study.slots.back();
}

json StudyService::IdeaView(const Study &study, const SessionState &s) const {
  if (s.phase != Phase::kAnnotating) {
    return {{"phase", PhaseName(s.phase)}};
  }
  const IdeaState &idea = s.ideas[s.current_idea];
  json terms = json::array();
  for (const TermState &t : idea.terms) terms.push_back(TermStateToJson(t));
  auto text = study.texts.find(idea.idea_id);
  return {{"phase", PhaseName(s.phase)},
          {"ideaIndex", s.current_idea},
          {"ideaId", idea.idea_id},
          {"text", text == study.texts.end() ? "" : text->second},
          {"currentTerm",
           s.current_term ? json(*s.current_term) : json(nullptr)},
          {"terms", terms}};
}

json StudyService::AssignParticipant(const std::string &study_id,
                                     const std::string &participant_id) {
  if (participant_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "participantId must not be empty");
  }
  Study &study = FindStudy(study_id);
  json result;
  Slot *created = nullptr;
  {
    std::unique_lock lk(study.mu);
    auto existing = study.by_participant.find(participant_id);
    if (existing != study.by_participant.end()) {
      const SessionRecord &r = study.slots[existing->second]->record;
      throw Error(ErrorCode::kConflict,
                  "participant " + participant_id + " is already assigned",
                  {{"sessionId", r.session.session_id},
                   {"condition", r.condition},
                   {"session", SessionToJson(r.session)}});
    }
    const size_t index = study.slots.size();
    const size_t k = study.info.conditions.size();
    const size_t condition =
        study.info.assignment.policy == AssignmentPolicy::kRoundRobin
            ? index % k
            : SessionSeed(study.info.assignment.seed, index) % k;
    const int64_t start = Now();
    const std::string session_id = SessionIdFor(study.info.id, index);
    Slot &slot = CreateSession(study, participant_id, condition, session_id,
                               start);
    try {
      Persist(study, {{"type", "participant"},
                      {"participantId", participant_id},
                      {"sessionId", session_id},
                      {"condition", condition},
                      {"startMs", start}});
    } catch (...) {
      study.slots.pop_back();
      study.by_participant.erase(participant_id);
      throw;
    }
    created = &slot;
    const SessionState &s = slot.record.session;
    json first = IdeaView(study, s);
    result = {{"sessionId", s.session_id},
              {"condition", slot.record.condition},
              {"phase", PhaseName(s.phase)},
              {"firstIdea", first},
              {"terms", first.value("terms", json::array())}};
  }
  {
    std::unique_lock lk(mu_);
    sessions_[created->record.session.session_id] = {&study, created};
  }
  MaybeSnapshot(study);
  return result;
}

SessionRecord StudyService::GetSession(const std::string &session_id) const {
  auto [study, slot] = FindSession(session_id);
  std::shared_lock slk(study->mu);
  std::lock_guard lk(slot->mu);
  return slot->record;
}

json StudyService::SessionView(const std::string &session_id) const {
  auto [study, slot] = FindSession(session_id);
  std::shared_lock slk(study->mu);
  std::lock_guard lk(slot->mu);
  const SessionRecord &r = slot->record;
  json view = SessionToJson(r.session);
  for (size_t i = 0; i < r.session.ideas.size(); ++i) {
    auto text = study->texts.find(r.session.ideas[i].idea_id);
    view["ideas"][i]["text"] =
        text == study->texts.end() ? "" : text->second;
  }
  view["studyId"] = study->info.id;
  view["condition"] = r.condition;
  view["surveySubmitted"] = r.survey.has_value();
  return view;
}

void StudyService::CheckClientTimestamp(const SessionState &s,
                                        int64_t ts) const {
  const int64_t start = s.events.empty() ? 0 : s.events.front().timestamp_ms;
  if (ts < start) {
    throw Error(ErrorCode::kInvalidArgument,
                "timestamp " + std::to_string(ts) + " precedes session start",
                {{"timestampMs", ts}, {"sessionStartMs", start}});
  }
  const int64_t limit = Now() + options_.future_slack_ms;
  if (ts > limit) {
    throw Error(ErrorCode::kInvalidArgument,
                "timestamp " + std::to_string(ts) + " is in the future",
                {{"timestampMs", ts}, {"limitMs", limit}});
  }
}

void StudyService::PostEvent(const std::string &session_id,
                             const EventRequest &event) {
  if (event.event_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "eventId must not be empty");
  }
  if (!IsHumanEvent(event.kind)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("event kind ") + EventKindName(event.kind) +
                    " cannot be posted by a client");
  }
  auto [study, slot] = FindSession(session_id);
  {
    std::shared_lock slk(study->mu);
    std::lock_guard lk(slot->mu);
    if (slot->event_ids.count(event.event_id)) return;
    CheckClientTimestamp(slot->record.session, event.timestamp_ms);
    SessionState next = AfterEvent(slot->record.session, event);
    Persist(*study, {{"type", "event"},
                     {"sessionId", session_id},
                     {"event", EventRequestToJson(event)}});
    slot->record.session = std::move(next);
    slot->event_ids.insert(event.event_id);
  }
  MaybeSnapshot(*study);
}

json StudyService::SubmitIdea(const std::string &session_id, size_t idea_index,
                              std::optional<int64_t> timestamp_ms) {
  auto [study, slot] = FindSession(session_id);
  json result;
  {
    std::shared_lock slk(study->mu);
    std::lock_guard lk(slot->mu);
    const SessionState &s = slot->record.session;
    int64_t ts = 0;
    if (timestamp_ms) {
      CheckClientTimestamp(s, *timestamp_ms);
      ts = *timestamp_ms;
    } else {
      ts = std::max(Now(),
                    s.events.empty() ? int64_t{0} : s.events.back().timestamp_ms);
    }
    SessionState next = AfterSubmit(s, idea_index, ts);
    Persist(*study, {{"type", "submit"},
                     {"sessionId", session_id},
                     {"ideaIndex", idea_index},
                     {"timestampMs", ts}});
    slot->record.session = std::move(next);
    result = IdeaView(*study, slot->record.session);
  }
  MaybeSnapshot(*study);
  return result;
}

void StudyService::SubmitSurvey(const std::string &session_id,
                                const SurveySubmission &survey) {
  auto [study, slot] = FindSession(session_id);
  {
    std::shared_lock slk(study->mu);
    std::lock_guard lk(slot->mu);
    SessionRecord next = AfterSurvey(slot->record, survey);
    Persist(*study, {{"type", "survey"},
                     {"sessionId", session_id},
                     {"survey", SurveyToJson(survey)}});
    slot->record = std::move(next);
  }
  MaybeSnapshot(*study);
}

void StudyService::CompleteTutorial(const std::string &session_id) {
  auto [study, slot] = FindSession(session_id);
  {
    std::shared_lock slk(study->mu);
    std::lock_guard lk(slot->mu);
    if (slot->record.session.tutorial_completed) return;
    Persist(*study, {{"type", "tutorial"}, {"sessionId", session_id}});
    slot->record.session.tutorial_completed = true;
  }
  MaybeSnapshot(*study);
}

StudyExport StudyService::Export(const std::string &study_id) const {
  Study &study = FindStudy(study_id);
  std::unique_lock lk(study.mu);
  StudyExport doc;
  doc.study = study.info;
  for (const auto &slot : study.slots) doc.sessions.push_back(slot->record);
  return doc;
}

ExclusionReport StudyService::Exclusions(const std::string &study_id) const {
  return ApplyExclusionFilters(Export(study_id));
}

SweetSpotReport StudyService::Report(const std::string &study_id,
                                     const RunOptions &options) const {
  Study &study = FindStudy(study_id);
  if (!study.gold) {
    throw Error(ErrorCode::kFailedPrecondition,
                "study " + study_id + " has no gold standard",
                {{"studyId", study_id}});
  }
  const StudyExport doc = Export(study_id);
  std::vector<ConfigRun> runs = RunsFromExports({doc}, *study.gold, options);
  if (runs.empty()) {
    throw Error(ErrorCode::kFailedPrecondition,
                "study " + study_id + " has no sessions to report",
                {{"studyId", study_id}});
  }
  auto rank = [&](const ConfigRun &run) {
    const auto &c = study.info.conditions;
    return std::find_if(c.begin(), c.end(),
                        [&](const Configuration &x) {
                          return x.name == run.config.name;
                        }) -
           c.begin();
  };
  std::stable_sort(runs.begin(), runs.end(),
                   [&](const ConfigRun &a, const ConfigRun &b) {
                     return rank(a) < rank(b);
                   });
  return BuildSweetSpotReport(runs);
}

void StudyService::Persist(Study &study, json record) {
  std::lock_guard lk(study.log_mu);
  record["seq"] = study.seq + 1;
  if (study.log != nullptr) {
    const std::string line = record.dump() + "\n";
    const bool ok =
        std::fwrite(line.data(), 1, line.size(), study.log) == line.size() &&
        std::fflush(study.log) == 0 && ::fsync(fileno(study.log)) == 0;
    if (!ok) {
      throw Error(ErrorCode::kIo, "cannot append to the log of study " +
                                      study.info.id);
    }
  }
  ++study.seq;
  ++study.since_snapshot;
}

void StudyService::MaybeSnapshot(Study &study) {
  if (study.dir.empty()) return;
  {
    std::lock_guard lk(study.log_mu);
    if (study.since_snapshot < options_.snapshot_every) return;
  }
  std::unique_lock lk(study.mu);
  WriteSnapshot(study);
}

void StudyService::Snapshot(const std::string &study_id) {
  Study &study = FindStudy(study_id);
  if (study.dir.empty()) return;
  std::unique_lock lk(study.mu);
  WriteSnapshot(study);
}

// Caller holds the study exclusively.
void StudyService::WriteSnapshot(Study &study) {
  StudyExport doc;
  doc.study = study.info;
  for (const auto &slot : study.slots) doc.sessions.push_back(slot->record);
  std::lock_guard lk(study.log_mu);
  WriteFileAtomically(study.dir / "snapshot.json",
                      DumpJson({{"seq", study.seq},
                                {"export", ExportToJson(doc)}}));
  study.since_snapshot = 0;
}

void StudyService::Replay(Study &study, const json &record) {
  const std::string type = record.at("type").get<std::string>();
  if (type == "participant") {
    CreateSession(study, record.at("participantId").get<std::string>(),
                  record.at("condition").get<size_t>(),
                  record.at("sessionId").get<std::string>(),
                  record.at("startMs").get<int64_t>());
    return;
  }
  const std::string session_id = record.at("sessionId").get<std::string>();
  Slot *slot = nullptr;
  for (const auto &s : study.slots) {
    if (s->record.session.session_id == session_id) slot = s.get();
  }
  if (slot == nullptr) {
    throw Error(ErrorCode::kParse, "log references unknown session " +
                                       session_id);
  }
  if (type == "event") {
    const EventRequest e = EventRequestFromJson(record.at("event"));
    slot->record.session = AfterEvent(slot->record.session, e);
    slot->event_ids.insert(e.event_id);
  } else if (type == "submit") {
    slot->record.session =
        AfterSubmit(slot->record.session, record.at("ideaIndex").get<size_t>(),
                    record.at("timestampMs").get<int64_t>());
  } else if (type == "survey") {
    slot->record = AfterSurvey(slot->record, SurveyFromJson(record.at("survey")));
  } else if (type == "tutorial") {
    slot->record.session.tutorial_completed = true;
  } else {
    throw Error(ErrorCode::kParse, "unknown log record type " + type);
  }
}

void StudyService::RecoverStudy(const std::string &dir_name) {
  auto study = std::make_unique<Study>();
  study->dir = dir_name;
  const fs::path &dir = study->dir;
  study->info = StudyInfoFromJson(ReadJsonFile((dir / "study.json").string()));
  study->corpus = ParseCorpus(ReadJsonFile((dir / "corpus.json").string()));
  for (const Idea &idea : study->corpus) study->texts[idea.id] = idea.text;
  study->candidates = CandidateMapFromJson(
      ReadJsonFile((dir / "candidates.json").string()), study->corpus);
  if (fs::exists(dir / "gold.json")) {
    study->gold =
        ParseGold(ReadJsonFile((dir / "gold.json").string()), study->corpus);
  }
  if (fs::exists(dir / "snapshot.json")) {
    const json snap = ReadJsonFile((dir / "snapshot.json").string());
    study->seq = snap.at("seq").get<uint64_t>();
    for (SessionRecord &r : ExportFromJson(snap.at("export")).sessions) {
      auto slot = std::make_unique<Slot>();
      for (const Event &e : r.session.events) {
        if (!e.event_id.empty()) slot->event_ids.insert(e.event_id);
      }
      study->by_participant[r.session.participant_id] = study->slots.size();
      slot->record = std::move(r);
      study->slots.push_back(std::move(slot));
    }
  }
  if (fs::exists(dir / "log.jsonl")) {
    std::istringstream lines(ReadText(dir / "log.jsonl"));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      json record = json::parse(line, nullptr, false);
      if (record.is_discarded()) {
        // A torn final line is a write that was never acknowledged.
        if (lines.peek() == EOF) break;
        throw Error(ErrorCode::kParse,
                    "corrupt log record in " + (dir / "log.jsonl").string());
      }
      const uint64_t seq = record.at("seq").get<uint64_t>();
      if (seq <= study->seq) continue;
      Replay(*study, record);
      study->seq = seq;
      ++study->since_snapshot;
    }
  }
  study->log = std::fopen((dir / "log.jsonl").c_str(), "ab");
  if (study->log == nullptr) {
    throw Error(ErrorCode::kIo, "cannot open " + (dir / "log.jsonl").string());
  }
  AddStudy(std::move(study));
}

void StudyService::Recover() {
  const fs::path root(options_.data_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create data directory " + root.string());
  }
  std::vector<fs::path> dirs;
  for (const auto &entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "study.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  for (const fs::path &dir : dirs) {
    RecoverStudy(dir.string());
    const std::string name = dir.filename().string();
    if (name.rfind("study-", 0) == 0) {
      try {
        next_study_ = std::max<uint64_t>(next_study_,
                                         std::stoull(name.substr(6)) + 1);
      } catch (const std::exception &) {
      }
    }
  }
}

}  // namespace icv
