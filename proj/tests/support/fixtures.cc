#include "fixtures.h"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "icv/study_export.h"
#include "icv/utf8.h"

#ifndef ICV_SOURCE_DIR
#error "ICV_SOURCE_DIR must point at the source tree"
#endif

namespace icv::testing {
namespace {

struct TermSpec {
  const char *word;
  double correct;  // confidence of the correct concept
  double decoy;    // confidence of the decoy, always lower
};

std::string Capitalized(std::string word) {
  word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  return word;
}

std::string CorrectUri(const std::string &word) {
  return "http://kg.test/resource/" + Capitalized(word);
}

Fixture Build(const std::vector<std::vector<TermSpec>> &ideas,
              bool with_decoys) {
  Fixture f;
  for (size_t i = 0; i < ideas.size(); ++i) {
    Idea idea;
    idea.id = "idea-" + std::to_string(i + 1);
    for (const TermSpec &t : ideas[i]) {
      if (!idea.text.empty()) idea.text += ' ';
      idea.text += t.word;
    }
    std::vector<GoldEntry> gold;
    for (const TermSpec &t : ideas[i]) {
      const std::string word = t.word;
      f.lexicon.Add({word,
                     {CorrectUri(word), Capitalized(word), "Correct sense.", {}},
                     t.correct});
      if (with_decoys) {
        f.lexicon.Add({word,
                       {"http://kg.test/resource/Alt_" + word,
                        "Alt " + word, "Decoy sense.", {}},
                       t.decoy});
      }
      gold.push_back(GoldFor(idea.text, word, {CorrectUri(word)}));
    }
    f.gold.entries[idea.id] = std::move(gold);
    f.corpus.push_back(std::move(idea));
  }
  f.candidates = SpotCorpus(f.corpus, f.lexicon, kDefaultSpotConfidence);
  return f;
}

}  // namespace

std::vector<std::string> Fixture::idea_ids() const {
  std::vector<std::string> ids;
  for (const Idea &idea : corpus) ids.push_back(idea.id);
  return ids;
}

Fixture HighConfidenceFixture() {
  return Build({{{"amber", 0.99, 0.40},
                 {"basalt", 0.97, 0.30},
                 {"cobalt", 0.96, 0.55},
                 {"dune", 0.80, 0.20},
                 {"ember", 0.60, 0.45}},
                {{"fern", 0.98, 0.10},
                 {"granite", 0.99, 0.50},
                 {"harbor", 0.97, 0.60},
                 {"iris", 0.95, 0.40},
                 {"jade", 0.70, 0.30}},
                {{"kelp", 0.96, 0.20},
                 {"lagoon", 0.98, 0.35},
                 {"marble", 0.90, 0.85},
                 {"nectar", 0.50, 0.25},
                 {"onyx", 0.85, 0.10}}},
               true);
}

Fixture TwoBandFixture() {
  Fixture f;
  f.corpus = {{"band-1", "apple banana cherry"},
              {"band-2", "delta echo foxtrot"},
              {"band-3", "golf hotel india"}};
  auto add = [&f](const std::string &word, const std::string &uri,
                  double confidence) {
    f.lexicon.Add({word,
                   {"http://kg.test/resource/" + uri, uri, "", {}},
                   confidence});
  };
  // Correct band [0.5, 1).
  add("apple", "Apple", 0.90);
  add("banana", "Banana", 0.50);
  add("cherry", "Cherry", 0.70);
  add("delta", "Delta", 0.99);
  add("echo", "Echo", 0.60);
  add("golf", "Golf", 0.55);
  add("india", "India", 0.80);
  // Incorrect band [0, 0.35).
  add("apple", "Apple_Inc.", 0.30);
  add("echo", "Echo_(mythology)", 0.34);
  add("foxtrot", "Foxtrot_(dance)", 0.20);
  add("hotel", "Hotel_California", 0.10);

  const std::string base = "http://kg.test/resource/";
  const std::string &t1 = f.corpus[0].text;
  const std::string &t2 = f.corpus[1].text;
  const std::string &t3 = f.corpus[2].text;
  f.gold.entries["band-1"] = {GoldFor(t1, "apple", {base + "Apple"}),
                              GoldFor(t1, "banana", {base + "Banana"}),
                              GoldFor(t1, "cherry", {base + "Cherry"})};
  f.gold.entries["band-2"] = {GoldFor(t2, "delta", {base + "Delta"}),
                              GoldFor(t2, "echo", {base + "Echo"})};
  f.gold.entries["band-3"] = {GoldFor(t3, "golf", {base + "Golf"}),
                              GoldFor(t3, "hotel", {base + "Hotel"}),
                              GoldFor(t3, "india", {base + "India"})};
  f.candidates = SpotCorpus(f.corpus, f.lexicon, kDefaultSpotConfidence);
  return f;
}

Fixture AllCorrectHighFixture() {
  return Build({{{"quartz", 0.99, 0.10}, {"ruby", 0.97, 0.20}},
                {{"slate", 0.96, 0.30}}},
               true);
}

GoldEntry GoldFor(const std::string &text, const std::string &surface,
                  std::vector<std::string> concepts) {
  const size_t byte = text.find(surface);
  if (byte == std::string::npos) {
    throw std::invalid_argument("surface not in text: " + surface);
  }
  GoldEntry e;
  e.span.start = utf8::Length(std::string_view(text).substr(0, byte));
  e.span.end = e.span.start + utf8::Length(surface);
  e.span.surface = surface;
  std::sort(concepts.begin(), concepts.end());
  e.concepts = std::move(concepts);
  return e;
}

std::string TempDir(const std::string &name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("icv-test-" + std::to_string(::getpid()) + "-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string DataPath(const std::string &name) {
  return std::string(ICV_SOURCE_DIR) + "/data/" + name;
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

FixtureFiles WriteFixture(const Fixture &fixture, const std::string &dir) {
  FixtureFiles files{dir + "/corpus.json", dir + "/lexicon.tsv", dir + "/gold.json"};
  WriteTextFile(files.corpus, DumpJson(CorpusToJson(fixture.corpus)));
  WriteTextFile(files.lexicon, LexiconToTsv(fixture.lexicon));
  WriteTextFile(files.gold, DumpJson(GoldToJson(fixture.gold)));
  return files;
}

}  // namespace icv::testing
