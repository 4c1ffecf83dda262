#ifndef ICV_TESTS_SUPPORT_FIXTURES_H_
#define ICV_TESTS_SUPPORT_FIXTURES_H_

#include <string>
#include <vector>

#include "icv/corpus.h"
#include "icv/lexicon.h"

namespace icv::testing {

// Corpus, lexicon, candidates spotted at the default floor and gold.
struct Fixture {
  Corpus corpus;
  Lexicon lexicon;
  CandidateMap candidates;
  GoldStandard gold;

  std::vector<std::string> idea_ids() const;
};

// Three ideas of five single-word terms. Every term has its correct concept
// plus a decoy whose label sorts first alphabetically and whose confidence is
// lower. Eight terms have a top confidence above 0.95, one sits exactly at
// 0.95. Gold is the correct concept of every term.
//
// Hand-traced oracle clicks (click + accept per handled term, one accept per
// idea to submit): baseline 15*2+3 = 33, validated-threshold 8*1+7*2+3 = 25,
// automatic-threshold 7*2+3 = 17.
Fixture HighConfidenceFixture();
inline constexpr size_t kHighConfidenceTerms = 15;
inline constexpr size_t kHighConfidenceAboveThreshold = 8;
inline constexpr size_t kOracleClicksBaseline = 33;
inline constexpr size_t kOracleClicksValidated = 25;
inline constexpr size_t kOracleClicksAutomatic = 17;

// Single-token terms. Every incorrect concept scores below 0.35, every
// correct one at least 0.5 (one exactly at 0.5), so recall stays put for
// gamma < 0.35 and drops as soon as gamma passes 0.5.
Fixture TwoBandFixture();
inline constexpr double kIncorrectBandCeiling = 0.35;
inline constexpr double kCorrectBandFloor = 0.5;

// Fixture whose terms all fire at the automation threshold with a correct
// top concept.
Fixture AllCorrectHighFixture();

// Gold entry for the first occurrence of `surface` in `text`.
GoldEntry GoldFor(const std::string &text, const std::string &surface,
                  std::vector<std::string> concepts);

// Fresh empty directory under the system temp dir.
std::string TempDir(const std::string &name);

// Path of a file shipped under data/.
std::string DataPath(const std::string &name);

std::string ReadFile(const std::string &path);

struct FixtureFiles {
  std::string corpus;
  std::string lexicon;
  std::string gold;
};

// Writes corpus.json, lexicon.tsv and gold.json into `dir`.
FixtureFiles WriteFixture(const Fixture &fixture, const std::string &dir);

}  // namespace icv::testing

#endif  // ICV_TESTS_SUPPORT_FIXTURES_H_
