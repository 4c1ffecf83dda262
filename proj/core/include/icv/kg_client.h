#ifndef ICV_KG_CLIENT_H_
#define ICV_KG_CLIENT_H_

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "icv/corpus.h"
#include "icv/lexicon.h"

namespace icv {

enum class BackendKind { kLocal, kRemote };

struct BackendDescriptor {
  BackendKind kind = BackendKind::kLocal;
  std::optional<std::string> endpoint;
  double default_confidence = kDefaultSpotConfidence;

  // Throws Error(kInvalidArgument) if a remote has no endpoint or the
  // confidence is outside [0,1].
  void Validate() const;
};

// Concept search. Results are cached per (text, confidence) for the
// lifetime of the backend; the cache is internally synchronized.
class ConceptBackend {
 public:
  virtual ~ConceptBackend() = default;

  std::vector<AnnotationCandidate> FetchCandidates(const std::string &text,
                                                   double min_confidence) const;

  virtual std::string Describe() const = 0;

  size_t cache_size() const;

 protected:
  virtual std::vector<AnnotationCandidate> Fetch(
      const std::string &text, double min_confidence) const = 0;

 private:
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<std::string, double>,
                   std::vector<AnnotationCandidate>>
      cache_;
};

class LocalBackend : public ConceptBackend {
 public:
  explicit LocalBackend(std::shared_ptr<const Lexicon> lexicon)
      : lexicon_(std::move(lexicon)) {}

  std::string Describe() const override { return "local"; }
  const Lexicon &lexicon() const { return *lexicon_; }

 protected:
  std::vector<AnnotationCandidate> Fetch(const std::string &text,
                                         double min_confidence) const override;

 private:
  std::shared_ptr<const Lexicon> lexicon_;
};

// Field names of a Spotlight-style JSON response. Every resource object
// carries a uri, surface form, character offset and score; label and
// description are optional (an empty name means "absent").
struct ResponseMapping {
  std::string resources = "Resources";
  std::string uri = "@URI";
  std::string surface = "@surfaceForm";
  std::string offset = "@offset";
  std::string score = "@similarityScore";
  std::string label;
  std::string description;
  std::string image;

  static ResponseMapping FromJson(const nlohmann::json &doc);
  static ResponseMapping Load(const std::string &path);
};

// Maps a remote response onto annotation candidates for `text`. Resources
// sharing a span are grouped; overlapping spans are resolved leftmost-
// longest. Throws BackendError on schema or offset mismatches.
std::vector<AnnotationCandidate> ParseRemoteResponse(
    const nlohmann::json &body, const ResponseMapping &mapping,
    const std::string &text, double min_confidence,
    const std::string &endpoint);

// Label derived from the last path segment of a uri ("Pet_food" ->
// "Pet food").
std::string LabelFromUri(const std::string &uri);

struct RemoteOptions {
  std::string endpoint;  // http://host[:port]/path
  ResponseMapping mapping;
  int timeout_ms = 10000;
  bool use_post = false;
};

class RemoteBackend : public ConceptBackend {
 public:
  explicit RemoteBackend(RemoteOptions options);

  std::string Describe() const override { return options_.endpoint; }

 protected:
  std::vector<AnnotationCandidate> Fetch(const std::string &text,
                                         double min_confidence) const override;

 private:
  RemoteOptions options_;
  std::string host_;
  int port_ = 80;
  std::string path_;
};

std::unique_ptr<ConceptBackend> MakeBackend(
    const BackendDescriptor &descriptor,
    std::shared_ptr<const Lexicon> lexicon,
    const ResponseMapping &mapping = {});

struct AutoSelection {
  Span span;
  Concept entity;
  double confidence = 0.0;
};

struct AutoAnnotation {
  std::string idea_id;
  std::vector<AutoSelection> selections;
};

// Highest-confidence concept per candidate span; ties go to the smaller
// uri. Spans whose best concept is below `min_confidence` are dropped.
const ScoredConcept &BestCandidate(const AnnotationCandidate &candidate);

AutoAnnotation AnnotateAllComputer(const ConceptBackend &backend,
                                   const Idea &idea, double min_confidence);

}  // namespace icv

#endif  // ICV_KG_CLIENT_H_
