#ifndef ICV_LEXICON_H_
#define ICV_LEXICON_H_

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "icv/corpus.h"

namespace icv {

// Candidate-search confidence floor used when generating annotation
// candidates for the interactive configurations.
inline constexpr double kDefaultSpotConfidence = 0.01;

// Lowercases, collapses interior whitespace runs to one space and strips
// leading/trailing whitespace.
std::string NormalizeSurface(std::string_view s);

// A token with scalar-value offsets into the source text.
struct Token {
  size_t start = 0;
  size_t end = 0;
};

// Splits on Unicode whitespace and on the separators . , ; : ! ? ( ) " '
std::vector<Token> Tokenize(std::u32string_view text);

struct LexiconEntry {
  std::string surface_form;
  Concept entity;
  double confidence = 0.0;
};

struct ScoredConcept {
  Concept entity;
  double confidence = 0.0;
};

// A term span together with every concept that may describe it.
// `candidates` is never empty.
struct AnnotationCandidate {
  Span span;
  std::vector<ScoredConcept> candidates;

  double TopConfidence() const;
};

using CandidateMap = std::map<std::string, std::vector<AnnotationCandidate>>;

// Surface-form dictionary. Immutable once loaded; lookups are
// case-insensitive via NormalizeSurface.
class Lexicon {
 public:
  Lexicon() = default;

  // Throws Error(kValidation) for empty surface forms or confidences
  // outside [0,1]. Re-adding a uri under the same surface keeps the higher
  // confidence.
  void Add(LexiconEntry entry);

  // Entries for an already-normalized key, or nullptr.
  const std::vector<LexiconEntry> *Find(const std::string &normalized) const;

  size_t max_token_count() const { return max_token_count_; }
  size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // Every entry in insertion order per key, keys in sorted order.
  std::vector<LexiconEntry> Entries() const;

 private:
  std::unordered_map<std::string, std::vector<LexiconEntry>> entries_;
  size_t max_token_count_ = 1;
  size_t size_ = 0;
};

// Parses the TSV lexicon format:
//   surface<TAB>uri<TAB>label<TAB>confidence[<TAB>description[<TAB>image]]
// Blank lines and lines starting with '#' are skipped.
Lexicon ParseLexicon(std::istream &in, const std::string &source = "<input>");
Lexicon LoadLexicon(const std::string &path);
std::string LexiconToTsv(const Lexicon &lexicon);

// Leftmost-longest greedy spotting. At each token position the longest
// window whose normalized surface has an entry with confidence >= gamma is
// emitted and scanning resumes after it.
std::vector<AnnotationCandidate> SpotTerms(const Idea &idea,
                                           const Lexicon &lexicon,
                                           double min_confidence);

CandidateMap SpotCorpus(const Corpus &corpus, const Lexicon &lexicon,
                        double min_confidence);

}  // namespace icv

#endif  // ICV_LEXICON_H_
