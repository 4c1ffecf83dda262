#ifndef ICV_CORPUS_H_
#define ICV_CORPUS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace icv {

// An idea as authored by its ideator.
struct Idea {
  std::string id;
  std::string text;

  bool operator==(const Idea &) const = default;
};

using Corpus = std::vector<Idea>;

// Character range of a term inside an idea. Offsets count Unicode scalar
// values, not bytes, so they agree across implementations.
struct Span {
  size_t start = 0;
  size_t end = 0;
  std::string surface;

  bool Overlaps(const Span &other) const {
    return start < other.end && other.start < end;
  }
  bool operator==(const Span &) const = default;
};

// A knowledge-graph concept. Identity is the uri alone.
struct Concept {
  std::string uri;
  std::string label;
  std::string description;
  std::optional<std::string> image_ref;

  bool operator==(const Concept &other) const { return uri == other.uri; }
};

// One reference annotation: any of `concepts` counts as correct for `span`.
// `concepts` is kept sorted and duplicate-free.
struct GoldEntry {
  Span span;
  std::vector<std::string> concepts;

  bool operator==(const GoldEntry &) const = default;
};

struct GoldStandard {
  std::map<std::string, std::vector<GoldEntry>> entries;

  size_t concept_count() const;
  const std::vector<GoldEntry> *Find(const std::string &idea_id) const;

  bool operator==(const GoldStandard &) const = default;
};

// Checks `span` against `text`: bounds and exact surface match.
// Throws Error(kValidation) describing the problem.
void ValidateSpan(const Span &span, const std::string &text);

Corpus ParseCorpus(const nlohmann::json &doc);
Corpus LoadCorpus(const std::string &path);
nlohmann::json CorpusToJson(const Corpus &corpus);

GoldStandard ParseGold(const nlohmann::json &doc, const Corpus &corpus);
GoldStandard LoadGold(const std::string &path, const Corpus &corpus);
nlohmann::json GoldToJson(const GoldStandard &gold);

// Reads a whole file and parses it as JSON. Throws kIo / kParse.
nlohmann::json ReadJsonFile(const std::string &path);
void WriteTextFile(const std::string &path, const std::string &content);

}  // namespace icv

#endif  // ICV_CORPUS_H_
