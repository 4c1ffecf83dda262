#include "icv/session_io.h"

#include <map>

#include "icv/error.h"

namespace icv {

using nlohmann::json;

namespace {

template <typename Fn>
auto Parsing(const char *what, Fn &&fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

}  // namespace

json SpanToJson(const Span &span) {
  return {{"start", span.start}, {"end", span.end}, {"surface", span.surface}};
}

Span SpanFromJson(const json &doc) {
  return Parsing("span", [&] {
    Span s;
    s.start = doc.at("start").get<size_t>();
    s.end = doc.at("end").get<size_t>();
    s.surface = doc.at("surface").get<std::string>();
    return s;
  });
}

json CandidateToJson(const AnnotationCandidate &candidate) {
  json list = json::array();
  for (const ScoredConcept &c : candidate.candidates) {
    json item = {{"uri", c.entity.uri},
                 {"label", c.entity.label},
                 {"description", c.entity.description},
                 {"confidence", c.confidence}};
    if (c.entity.image_ref) item["imageRef"] = *c.entity.image_ref;
    list.push_back(std::move(item));
  }
  return {{"span", SpanToJson(candidate.span)}, {"candidates", list}};
}

AnnotationCandidate CandidateFromJson(const json &doc) {
  return Parsing("annotation candidate", [&] {
    AnnotationCandidate c;
    c.span = SpanFromJson(doc.at("span"));
    for (const json &item : doc.at("candidates")) {
      ScoredConcept sc;
      sc.entity.uri = item.at("uri").get<std::string>();
      sc.entity.label = item.value("label", sc.entity.uri);
      sc.entity.description = item.value("description", "");
      if (item.contains("imageRef") && !item["imageRef"].is_null()) {
        sc.entity.image_ref = item["imageRef"].get<std::string>();
      }
      sc.confidence = item.at("confidence").get<double>();
      if (sc.entity.uri.empty() || sc.confidence < 0.0 || sc.confidence > 1.0) {
        throw Error(ErrorCode::kValidation,
                    "invalid candidate concept for \"" + c.span.surface + "\"");
      }
      c.candidates.push_back(std::move(sc));
    }
    if (c.candidates.empty()) {
      throw Error(ErrorCode::kValidation, "annotation candidate for \"" +
                                              c.span.surface +
                                              "\" has no concepts");
    }
    return c;
  });
}

json CandidateMapToJson(const CandidateMap &candidates) {
  json doc = json::object();
  for (const auto &[idea_id, list] : candidates) {
    json items = json::array();
    for (const AnnotationCandidate &c : list) items.push_back(CandidateToJson(c));
    doc[idea_id] = std::move(items);
  }
  return doc;
}

CandidateMap CandidateMapFromJson(const json &doc, const Corpus &corpus) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "candidate file must be a JSON object");
  }
  std::map<std::string, const Idea *> by_id;
  for (const Idea &idea : corpus) by_id[idea.id] = &idea;
  CandidateMap out;
  for (const Idea &idea : corpus) out[idea.id];
  for (const auto &[idea_id, list] : doc.items()) {
    auto it = by_id.find(idea_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kValidation,
                  "candidates reference unknown idea " + idea_id);
    }
    std::vector<AnnotationCandidate> terms;
    for (const json &item : list) {
      AnnotationCandidate c = CandidateFromJson(item);
      ValidateSpan(c.span, it->second->text);
      if (!terms.empty() && terms.back().span.end > c.span.start) {
        throw Error(ErrorCode::kValidation,
                    "candidate spans in " + idea_id +
                        " must be sorted and non-overlapping");
      }
      terms.push_back(std::move(c));
    }
    out[idea_id] = std::move(terms);
  }
  return out;
}

CandidateMap LoadCandidateMap(const std::string &path, const Corpus &corpus) {
  return CandidateMapFromJson(ReadJsonFile(path), corpus);
}

json EventToJson(const Event &event) {
  json doc = {{"timestampMs", event.timestamp_ms},
              {"sessionId", event.session_id},
              {"kind", EventKindName(event.kind)},
              {"payload", event.payload}};
  if (!event.event_id.empty()) doc["eventId"] = event.event_id;
  return doc;
}

Event EventFromJson(const json &doc) {
  return Parsing("event", [&] {
    Event e;
    e.timestamp_ms = doc.at("timestampMs").get<int64_t>();
    e.session_id = doc.at("sessionId").get<std::string>();
    e.kind = ParseEventKind(doc.at("kind").get<std::string>());
    e.payload = doc.value("payload", json::object());
    e.event_id = doc.value("eventId", "");
    return e;
  });
}

json TermStateToJson(const TermState &term) {
  json doc = CandidateToJson(term.candidate);
  doc["status"] = TermStatusName(term.status);
  doc["chosen"] = term.chosen;
  doc["presentedOrder"] = term.presented_order;
  doc["preselected"] = term.preselected;
  return doc;
}

TermState TermStateFromJson(const json &doc) {
  return Parsing("term", [&] {
    TermState t;
    t.candidate = CandidateFromJson(doc);
    t.status = ParseTermStatus(doc.at("status").get<std::string>());
    for (const json &u : doc.at("chosen")) t.chosen.insert(u.get<std::string>());
    t.presented_order =
        doc.at("presentedOrder").get<std::vector<std::string>>();
    t.preselected = doc.value("preselected", false);
    for (const std::string &u : t.chosen) {
      if (!t.HasCandidate(u)) {
        throw Error(ErrorCode::kValidation, "chosen uri " + u +
                                                " is not a candidate");
      }
    }
    if (t.presented_order.size() != t.candidate.candidates.size()) {
      throw Error(ErrorCode::kValidation,
                  "presented order is not a permutation of the candidates");
    }
    return t;
  });
}

json SessionToJson(const SessionState &s) {
  json ideas = json::array();
  for (const IdeaState &idea : s.ideas) {
    json terms = json::array();
    for (const TermState &t : idea.terms) terms.push_back(TermStateToJson(t));
    ideas.push_back({{"ideaId", idea.idea_id},
                     {"submitted", idea.submitted},
                     {"terms", terms}});
  }
  json events = json::array();
  for (const Event &e : s.events) events.push_back(EventToJson(e));
  json cursor = {{"idea", s.current_idea}, {"term", nullptr}};
  if (s.current_term) cursor["term"] = *s.current_term;
  return {{"sessionId", s.session_id},
          {"participantId", s.participant_id},
          {"configuration", ConfigurationToJson(s.configuration)},
          {"ideaOrder", s.idea_queue},
          {"ideas", ideas},
          {"cursor", cursor},
          {"phase", PhaseName(s.phase)},
          {"tutorialCompleted", s.tutorial_completed},
          {"events", events}};
}

SessionState SessionFromJson(const json &doc) {
  return Parsing("session", [&] {
    SessionState s;
    s.session_id = doc.at("sessionId").get<std::string>();
    s.participant_id = doc.at("participantId").get<std::string>();
    s.configuration = ConfigurationFromJson(doc.at("configuration"));
    s.idea_queue = doc.at("ideaOrder").get<std::vector<std::string>>();
    for (const json &idea : doc.at("ideas")) {
      IdeaState is;
      is.idea_id = idea.at("ideaId").get<std::string>();
      is.submitted = idea.at("submitted").get<bool>();
      for (const json &t : idea.at("terms")) {
        is.terms.push_back(TermStateFromJson(t));
      }
      s.ideas.push_back(std::move(is));
    }
    if (s.ideas.size() != s.idea_queue.size()) {
      throw Error(ErrorCode::kValidation, "idea states do not match idea order");
    }
    const json &cursor = doc.at("cursor");
    s.current_idea = cursor.at("idea").get<size_t>();
    if (!cursor.at("term").is_null()) {
      s.current_term = cursor.at("term").get<size_t>();
    }
    if (s.current_idea >= s.ideas.size() ||
        (s.current_term &&
         *s.current_term >= s.ideas[s.current_idea].terms.size())) {
      throw Error(ErrorCode::kValidation, "cursor out of range");
    }
    s.phase = ParsePhase(doc.at("phase").get<std::string>());
    s.tutorial_completed = doc.value("tutorialCompleted", false);
    for (const json &e : doc.at("events")) {
      s.events.push_back(EventFromJson(e));
    }
    return s;
  });
}

}  // namespace icv
