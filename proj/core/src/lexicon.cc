#include "icv/lexicon.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "icv/error.h"
#include "icv/utf8.h"

namespace icv {
namespace {

bool IsSeparator(char32_t c) {
  switch (c) {
    case U'.': case U',': case U';': case U':': case U'!': case U'?':
    case U'(': case U')': case U'"': case U'\'':
      return true;
    default:
      return utf8::IsWhitespace(c);
  }
}

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> fields;
  size_t begin = 0;
  while (true) {
    size_t tab = line.find('\t', begin);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, tab - begin));
    begin = tab + 1;
  }
}

}  // namespace

std::string NormalizeSurface(std::string_view s) {
  const std::u32string in = utf8::Decode(s);
  std::u32string out;
  out.reserve(in.size());
  bool pending_space = false;
  for (char32_t c : in) {
    if (utf8::IsWhitespace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(utf8::ToLower(c));
  }
  return utf8::Encode(out);
}

std::vector<Token> Tokenize(std::u32string_view text) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < text.size()) {
    if (IsSeparator(text[i])) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < text.size() && !IsSeparator(text[j])) ++j;
    tokens.push_back({i, j});
    i = j;
  }
  return tokens;
}

double AnnotationCandidate::TopConfidence() const {
  double top = 0.0;
  for (const ScoredConcept &c : candidates) top = std::max(top, c.confidence);
  return top;
}

void Lexicon::Add(LexiconEntry entry) {
  const std::string key = NormalizeSurface(entry.surface_form);
  if (key.empty()) {
    throw Error(ErrorCode::kValidation, "empty surface form");
  }
  if (!(entry.confidence >= 0.0 && entry.confidence <= 1.0)) {
    throw Error(ErrorCode::kValidation,
                "confidence for \"" + entry.surface_form + "\" outside [0,1]");
  }
  if (entry.entity.uri.empty()) {
    throw Error(ErrorCode::kValidation,
                "empty concept uri for \"" + entry.surface_form + "\"");
  }
  const size_t tokens = Tokenize(utf8::Decode(key)).size();
  if (tokens == 0) {
    throw Error(ErrorCode::kValidation,
                "surface form \"" + entry.surface_form + "\" has no tokens");
  }
  std::vector<LexiconEntry> &list = entries_[key];
  for (LexiconEntry &existing : list) {
    if (existing.entity.uri == entry.entity.uri) {
      if (entry.confidence > existing.confidence) existing = std::move(entry);
      return;
    }
  }
  list.push_back(std::move(entry));
  max_token_count_ = std::max(max_token_count_, tokens);
  ++size_;
}

const std::vector<LexiconEntry> *Lexicon::Find(
    const std::string &normalized) const {
  auto it = entries_.find(normalized);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<LexiconEntry> Lexicon::Entries() const {
  std::vector<std::string> keys;
  keys.reserve(entries_.size());
  for (const auto &[key, list] : entries_) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  std::vector<LexiconEntry> out;
  for (const std::string &key : keys) {
    const auto &list = entries_.at(key);
    out.insert(out.end(), list.begin(), list.end());
  }
  return out;
}

Lexicon ParseLexicon(std::istream &in, const std::string &source) {
  Lexicon lexicon;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() < 4 || fields.size() > 6) {
      throw Error(ErrorCode::kParse,
                  where + ": expected 4 to 6 tab-separated fields",
                  {{"line", line_no}});
    }
    double confidence = 0.0;
    const std::string &raw = fields[3];
    auto [ptr, ec] =
        std::from_chars(raw.data(), raw.data() + raw.size(), confidence);
    if (ec != std::errc() || ptr != raw.data() + raw.size()) {
      throw Error(ErrorCode::kParse, where + ": bad confidence \"" + raw + "\"",
                  {{"line", line_no}});
    }
    LexiconEntry entry;
    entry.surface_form = fields[0];
    entry.entity.uri = fields[1];
    entry.entity.label = fields[2];
    entry.confidence = confidence;
    if (fields.size() > 4) entry.entity.description = fields[4];
    if (fields.size() > 5 && !fields[5].empty()) {
      entry.entity.image_ref = fields[5];
    }
    try {
      lexicon.Add(std::move(entry));
    } catch (const Error &e) {
      throw Error(e.code(), where + ": " + e.what(), {{"line", line_no}});
    }
  }
  return lexicon;
}

Lexicon LoadLexicon(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path, {{"path", path}});
  return ParseLexicon(in, path);
}

std::string LexiconToTsv(const Lexicon &lexicon) {
  std::ostringstream out;
  char buffer[32];
  for (const LexiconEntry &e : lexicon.Entries()) {
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer),
                                   e.confidence);
    out << e.surface_form << '\t' << e.entity.uri << '\t' << e.entity.label
        << '\t' << std::string_view(buffer, ptr - buffer) << '\t'
        << e.entity.description << '\t' << e.entity.image_ref.value_or("")
        << '\n';
  }
  return out.str();
}

std::vector<AnnotationCandidate> SpotTerms(const Idea &idea,
                                           const Lexicon &lexicon,
                                           double min_confidence) {
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence floor outside [0,1]");
  }
  std::vector<AnnotationCandidate> out;
  if (lexicon.empty()) return out;

  const std::u32string text = utf8::Decode(idea.text);
  const std::vector<Token> tokens = Tokenize(text);
  size_t i = 0;
  while (i < tokens.size()) {
    const size_t longest =
        std::min(lexicon.max_token_count(), tokens.size() - i);
    bool matched = false;
    for (size_t len = longest; len >= 1 && !matched; --len) {
      const size_t start = tokens[i].start;
      const size_t end = tokens[i + len - 1].end;
      const std::string surface =
          utf8::Encode(std::u32string_view(text).substr(start, end - start));
      const std::vector<LexiconEntry> *entries =
          lexicon.Find(NormalizeSurface(surface));
      if (entries == nullptr) continue;
      AnnotationCandidate candidate;
      for (const LexiconEntry &e : *entries) {
        if (e.confidence >= min_confidence) {
          candidate.candidates.push_back({e.entity, e.confidence});
        }
      }
      if (candidate.candidates.empty()) continue;
      candidate.span = {start, end, surface};
      out.push_back(std::move(candidate));
      i += len;
      matched = true;
    }
    if (!matched) ++i;
  }
  return out;
}

CandidateMap SpotCorpus(const Corpus &corpus, const Lexicon &lexicon,
                        double min_confidence) {
  CandidateMap out;
  for (const Idea &idea : corpus) {
    out[idea.id] = SpotTerms(idea, lexicon, min_confidence);
  }
  return out;
}

}  // namespace icv
