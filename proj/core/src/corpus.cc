#include "icv/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "icv/error.h"
#include "icv/utf8.h"

namespace icv {

using nlohmann::json;

size_t GoldStandard::concept_count() const {
  size_t n = 0;
  for (const auto &[id, list] : entries) n += list.size();
  return n;
}

const std::vector<GoldEntry> *GoldStandard::Find(
    const std::string &idea_id) const {
  auto it = entries.find(idea_id);
  return it == entries.end() ? nullptr : &it->second;
}

json ReadJsonFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path, {{"path", path}});
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what(), {{"path", path}});
  }
}

void WriteTextFile(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

void ValidateSpan(const Span &span, const std::string &text) {
  const size_t length = utf8::Length(text);
  if (span.start >= span.end || span.end > length) {
    throw Error(ErrorCode::kValidation,
                "span [" + std::to_string(span.start) + "," +
                    std::to_string(span.end) + ") out of bounds for text of " +
                    std::to_string(length) + " characters");
  }
  const std::string actual = utf8::Substr(text, span.start, span.end);
  if (actual != span.surface) {
    throw Error(ErrorCode::kValidation, "surface mismatch: expected \"" +
                                            actual + "\", got \"" +
                                            span.surface + "\"");
  }
}

Corpus ParseCorpus(const json &doc) {
  if (!doc.is_array()) {
    throw Error(ErrorCode::kParse, "corpus must be a JSON array");
  }
  Corpus corpus;
  std::set<std::string> seen;
  for (size_t i = 0; i < doc.size(); ++i) {
    const json &record = doc[i];
    const std::string where = "corpus record " + std::to_string(i);
    if (!record.is_object() || !record.contains("id") ||
        !record.contains("text") || !record["id"].is_string() ||
        !record["text"].is_string()) {
      throw Error(ErrorCode::kParse, where + ": expected {id, text} strings",
                  {{"record", i}});
    }
    Idea idea{record["id"].get<std::string>(),
              record["text"].get<std::string>()};
    if (idea.id.empty()) {
      throw Error(ErrorCode::kValidation, where + ": empty id", {{"record", i}});
    }
    if (idea.text.empty()) {
      throw Error(ErrorCode::kValidation, "idea " + idea.id + ": empty text",
                  {{"record", i}, {"id", idea.id}});
    }
    if (!utf8::IsValid(idea.text)) {
      throw Error(ErrorCode::kParse, "idea " + idea.id + ": invalid UTF-8",
                  {{"record", i}, {"id", idea.id}});
    }
    if (!seen.insert(idea.id).second) {
      throw Error(ErrorCode::kValidation, "duplicate idea id " + idea.id,
                  {{"record", i}, {"id", idea.id}});
    }
    corpus.push_back(std::move(idea));
  }
  return corpus;
}

Corpus LoadCorpus(const std::string &path) {
  try {
    return ParseCorpus(ReadJsonFile(path));
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what(), e.details());
  }
}

json CorpusToJson(const Corpus &corpus) {
  json doc = json::array();
  for (const Idea &idea : corpus) {
    doc.push_back({{"id", idea.id}, {"text", idea.text}});
  }
  return doc;
}

GoldStandard ParseGold(const json &doc, const Corpus &corpus) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "gold standard must be a JSON object");
  }
  std::map<std::string, const Idea *> by_id;
  for (const Idea &idea : corpus) by_id[idea.id] = &idea;

  GoldStandard gold;
  for (const auto &[idea_id, list] : doc.items()) {
    auto it = by_id.find(idea_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kValidation, "gold references unknown idea " +
                                              idea_id, {{"idea", idea_id}});
    }
    if (!list.is_array()) {
      throw Error(ErrorCode::kParse, "gold entries for " + idea_id +
                                         " must be an array");
    }
    std::vector<GoldEntry> entries;
    for (size_t i = 0; i < list.size(); ++i) {
      const json &e = list[i];
      const json details = {{"idea", idea_id}, {"entry", i}};
      const std::string where =
          "gold " + idea_id + "[" + std::to_string(i) + "]";
      try {
        GoldEntry entry;
        if (!e.at("start").is_number_unsigned() ||
            !e.at("end").is_number_unsigned()) {
          throw Error(ErrorCode::kValidation,
                      "start/end must be non-negative integers");
        }
        entry.span.start = e.at("start").get<size_t>();
        entry.span.end = e.at("end").get<size_t>();
        entry.span.surface = e.at("surface").get<std::string>();
        for (const json &c : e.at("concepts")) {
          entry.concepts.push_back(c.get<std::string>());
        }
        std::sort(entry.concepts.begin(), entry.concepts.end());
        entry.concepts.erase(
            std::unique(entry.concepts.begin(), entry.concepts.end()),
            entry.concepts.end());
        if (entry.concepts.empty() ||
            std::any_of(entry.concepts.begin(), entry.concepts.end(),
                        [](const std::string &c) { return c.empty(); })) {
          throw Error(ErrorCode::kValidation, "empty concept set");
        }
        ValidateSpan(entry.span, it->second->text);
        entries.push_back(std::move(entry));
      } catch (const json::exception &ex) {
        throw Error(ErrorCode::kParse, where + ": " + ex.what(), details);
      } catch (const Error &ex) {
        throw Error(ex.code(), where + ": " + ex.what(), details);
      }
    }
    std::sort(entries.begin(), entries.end(),
              [](const GoldEntry &a, const GoldEntry &b) {
                return a.span.start < b.span.start;
              });
    for (size_t i = 1; i < entries.size(); ++i) {
      if (entries[i - 1].span.Overlaps(entries[i].span)) {
        throw Error(ErrorCode::kValidation,
                    "overlapping gold spans in " + idea_id + ": \"" +
                        entries[i - 1].span.surface + "\" and \"" +
                        entries[i].span.surface + "\"",
                    {{"idea", idea_id}});
      }
    }
    gold.entries[idea_id] = std::move(entries);
  }
  return gold;
}

GoldStandard LoadGold(const std::string &path, const Corpus &corpus) {
  try {
    return ParseGold(ReadJsonFile(path), corpus);
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what(), e.details());
  }
}

json GoldToJson(const GoldStandard &gold) {
  json doc = json::object();
  for (const auto &[idea_id, list] : gold.entries) {
    json entries = json::array();
    for (const GoldEntry &e : list) {
      entries.push_back({{"start", e.span.start},
                         {"end", e.span.end},
                         {"surface", e.span.surface},
                         {"concepts", e.concepts}});
    }
    doc[idea_id] = std::move(entries);
  }
  return doc;
}

}  // namespace icv
