#ifndef ICV_SIMULATOR_H_
#define ICV_SIMULATOR_H_

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icv/configuration.h"
#include "icv/corpus.h"
#include "icv/lexicon.h"
#include "icv/session.h"
#include "icv/study_export.h"

namespace icv {

// Simulated participants advance the clock by this much per command.
inline constexpr int64_t kSimulatedStepMs = 1000;

enum class PolicyKind { kOracle, kRandom, kLazy };

const char *PolicyName(PolicyKind kind);
PolicyKind ParsePolicy(std::string_view name);

// Decides the next participant command from the visible session state.
// Only called while the session is annotating.
class AnnotatorPolicy {
 public:
  virtual ~AnnotatorPolicy() = default;
  virtual Command Next(const SessionState &state) = 0;
};

// Gold concepts of every gold entry overlapping the term, restricted to the
// term's candidates.
std::set<std::string> OracleTarget(const TermState &term,
                                   const std::vector<GoldEntry> *gold);

// Selects exactly the gold concepts of each term (or rejects it when none is
// offered) and reopens automatic selections that disagree with gold.
class OraclePolicy : public AnnotatorPolicy {
 public:
  explicit OraclePolicy(const GoldStandard &gold) : gold_(gold) {}
  Command Next(const SessionState &state) override;

 private:
  const GoldStandard &gold_;
};

// Picks one candidate or rejection uniformly per term, seeded.
class RandomPolicy : public AnnotatorPolicy {
 public:
  explicit RandomPolicy(uint64_t seed) : rng_(seed) {}
  Command Next(const SessionState &state) override;

 private:
  std::mt19937_64 rng_;
  // (idea, term) -> index into presented order; == size means reject.
  std::map<std::pair<size_t, size_t>, size_t> pending_;
};

// Keeps every computer preselection and rejects everything else.
class LazyPolicy : public AnnotatorPolicy {
 public:
  Command Next(const SessionState &state) override;
};

std::unique_ptr<AnnotatorPolicy> MakePolicy(PolicyKind kind,
                                            const GoldStandard &gold,
                                            uint64_t seed);

// Per-session seed derived from the batch seed and the session index.
uint64_t SessionSeed(uint64_t seed, size_t index);

// Runs one participant through the whole annotation phase and the (empty)
// survey. Commands are stamped start_ms + k * kSimulatedStepMs.
SessionState RunSimulatedAnnotator(const Configuration &config,
                                   const std::vector<std::string> &idea_ids,
                                   const CandidateMap &candidates,
                                   AnnotatorPolicy &policy,
                                   std::string session_id,
                                   std::string participant_id,
                                   int64_t start_ms = 0);

SessionState RunSimulatedAnnotator(const Configuration &config,
                                   const Corpus &corpus,
                                   const CandidateMap &candidates,
                                   const GoldStandard &gold, PolicyKind policy,
                                   uint64_t seed = 0);

// n independent sessions ordered by index.
std::vector<SessionRecord> RunConditionBatch(
    const Configuration &config, const Corpus &corpus,
    const CandidateMap &candidates, const GoldStandard &gold,
    PolicyKind policy, size_t n, uint64_t seed);

struct SimulationSources {
  std::string corpus_path;
  std::string lexicon_path;
  std::optional<std::string> gold_path;
  std::optional<std::string> candidates_path;
};

// Wraps a batch into a study export document.
StudyExport BatchExport(const Configuration &config, PolicyKind policy,
                        const Corpus &corpus, const SimulationSources &sources,
                        std::vector<SessionRecord> sessions, uint64_t seed);

}  // namespace icv

#endif  // ICV_SIMULATOR_H_
