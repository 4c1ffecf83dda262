#ifndef ICV_SESSION_IO_H_
#define ICV_SESSION_IO_H_

#include <nlohmann/json.hpp>

#include "icv/corpus.h"
#include "icv/lexicon.h"
#include "icv/session.h"

namespace icv {

// JSON writers/readers shared by the CLI exports and the study service.
// Readers validate and throw Error(kParse/kValidation).

nlohmann::json SpanToJson(const Span &span);
Span SpanFromJson(const nlohmann::json &doc);

nlohmann::json CandidateToJson(const AnnotationCandidate &candidate);
AnnotationCandidate CandidateFromJson(const nlohmann::json &doc);

// Candidate file: {"<ideaId>": [{"span": {...}, "candidates": [...]}, ...]}.
// Supplies hand-made term lists for the all-human configuration.
nlohmann::json CandidateMapToJson(const CandidateMap &candidates);
CandidateMap CandidateMapFromJson(const nlohmann::json &doc,
                                  const Corpus &corpus);
CandidateMap LoadCandidateMap(const std::string &path, const Corpus &corpus);

nlohmann::json EventToJson(const Event &event);
Event EventFromJson(const nlohmann::json &doc);

nlohmann::json TermStateToJson(const TermState &term);
TermState TermStateFromJson(const nlohmann::json &doc);

nlohmann::json SessionToJson(const SessionState &session);
SessionState SessionFromJson(const nlohmann::json &doc);

}  // namespace icv

#endif  // ICV_SESSION_IO_H_
