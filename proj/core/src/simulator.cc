#include "icv/simulator.h"

#include <cstdio>

#include "icv/error.h"

namespace icv {

namespace {

constexpr size_t kMaxCommandsPerTerm = 64;

const TermState *CurrentTerm(const SessionState &state, size_t *index) {
  if (!state.current_term) return nullptr;
  *index = *state.current_term;
  return &state.ideas[state.current_idea].terms[*index];
}

// The next click that turns `chosen` into `target`, or Accept when they match.
Command MoveTowards(const TermState &term, size_t index,
                    const std::set<std::string> &target) {
  for (const std::string &uri : term.presented_order) {
    if (target.count(uri) && !term.chosen.count(uri)) {
      return Command::Click(index, uri);
    }
  }
  for (const std::string &uri : term.presented_order) {
    if (term.chosen.count(uri) && !target.count(uri)) {
      return Command::Click(index, uri);
    }
  }
  return Command::Accept();
}

std::string Numbered(const std::string &prefix, size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%03zu", i);
  return prefix + buf;
}

}  // namespace

const char *PolicyName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kOracle:
      return "oracle";
    case PolicyKind::kRandom:
      return "random";
    case PolicyKind::kLazy:
      return "lazy";
  }
  return "?";
}

PolicyKind ParsePolicy(std::string_view name) {
  if (name == "oracle") return PolicyKind::kOracle;
  if (name == "random") return PolicyKind::kRandom;
  if (name == "lazy") return PolicyKind::kLazy;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown policy " + std::string(name) +
                  " (expected oracle, random or lazy)",
              {{"policy", std::string(name)}});
}

std::set<std::string> OracleTarget(const TermState &term,
                                   const std::vector<GoldEntry> *gold) {
  std::set<std::string> target;
  if (gold == nullptr) return target;
  for (const GoldEntry &entry : *gold) {
    if (!entry.span.Overlaps(term.candidate.span)) continue;
    for (const std::string &uri : entry.concepts) {
      if (term.HasCandidate(uri)) target.insert(uri);
    }
  }
  return target;
}

Command OraclePolicy::Next(const SessionState &state) {
  const IdeaState &idea = state.ideas[state.current_idea];
  const std::vector<GoldEntry> *gold = gold_.Find(idea.idea_id);
  size_t index = 0;
  if (const TermState *term = CurrentTerm(state, &index)) {
    const std::set<std::string> target = OracleTarget(*term, gold);
    if (target.empty()) return Command::Reject();
    return MoveTowards(*term, index, target);
  }
  for (size_t i = 0; i < idea.terms.size(); ++i) {
    const TermState &t = idea.terms[i];
    const std::set<std::string> target = OracleTarget(t, gold);
    const bool wrong_selection = (t.status == TermStatus::kAutoSelected ||
                                  t.status == TermStatus::kAccepted) &&
                                 t.chosen != target;
    const bool wrong_rejection =
        t.status == TermStatus::kRejected && !target.empty();
    if (wrong_selection || wrong_rejection) return Command::Reopen(i);
  }
  return Command::Accept();
}

Command RandomPolicy::Next(const SessionState &state) {
  size_t index = 0;
  const TermState *term = CurrentTerm(state, &index);
  if (term == nullptr) return Command::Accept();
  const auto key = std::make_pair(state.current_idea, index);
  auto it = pending_.find(key);
  if (it == pending_.end()) {
    std::uniform_int_distribution<size_t> pick(0, term->presented_order.size());
    it = pending_.emplace(key, pick(rng_)).first;
  }
  if (it->second == term->presented_order.size()) return Command::Reject();
  return MoveTowards(*term, index, {term->presented_order[it->second]});
}

Command LazyPolicy::Next(const SessionState &state) {
  size_t index = 0;
  const TermState *term = CurrentTerm(state, &index);
  if (term == nullptr) return Command::Accept();
  if (term->preselected && !term->chosen.empty()) return Command::Accept();
  return Command::Reject();
}

std::unique_ptr<AnnotatorPolicy> MakePolicy(PolicyKind kind,
                                            const GoldStandard &gold,
                                            uint64_t seed) {
  switch (kind) {
    case PolicyKind::kOracle:
      return std::make_unique<OraclePolicy>(gold);
    case PolicyKind::kRandom:
      return std::make_unique<RandomPolicy>(seed);
    case PolicyKind::kLazy:
      return std::make_unique<LazyPolicy>();
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown policy");
}

uint64_t SessionSeed(uint64_t seed, size_t index) {
  // splitmix64 step over the combined value.
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SessionState RunSimulatedAnnotator(const Configuration &config,
                                   const std::vector<std::string> &idea_ids,
                                   const CandidateMap &candidates,
                                   AnnotatorPolicy &policy,
                                   std::string session_id,
                                   std::string participant_id,
                                   int64_t start_ms) {
  Session session =
      Session::Create(std::move(session_id), std::move(participant_id),
                      idea_ids, candidates, config, start_ms);
  size_t terms = 0;
  for (const IdeaState &idea : session.state().ideas) {
    terms += idea.terms.size();
  }
  const size_t budget = (terms + idea_ids.size() + 1) * kMaxCommandsPerTerm;
  int64_t t = start_ms;
  for (size_t step = 0; session.state().phase == Phase::kAnnotating; ++step) {
    if (step >= budget) {
      throw Error(ErrorCode::kFailedPrecondition,
                  "simulated annotator did not finish session " +
                      session.state().session_id);
    }
    t += kSimulatedStepMs;
    session.Apply(policy.Next(session.state()), t);
  }
  if (session.state().phase == Phase::kSurvey) session.CompleteSurvey();
  return session.state();
}

SessionState RunSimulatedAnnotator(const Configuration &config,
                                   const Corpus &corpus,
                                   const CandidateMap &candidates,
                                   const GoldStandard &gold, PolicyKind policy,
                                   uint64_t seed) {
  std::vector<std::string> ids;
  for (const Idea &idea : corpus) ids.push_back(idea.id);
  auto p = MakePolicy(policy, gold, seed);
  return RunSimulatedAnnotator(config, ids, candidates, *p,
                               config.name + "-" + PolicyName(policy),
                               "simulated");
}

std::vector<SessionRecord> RunConditionBatch(
    const Configuration &config, const Corpus &corpus,
    const CandidateMap &candidates, const GoldStandard &gold,
    PolicyKind policy, size_t n, uint64_t seed) {
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch size must be at least 1");
  }
  std::vector<std::string> ids;
  for (const Idea &idea : corpus) ids.push_back(idea.id);
  std::vector<SessionRecord> out;
  for (size_t i = 0; i < n; ++i) {
    auto p = MakePolicy(policy, gold, SessionSeed(seed, i));
    SessionRecord r;
    r.condition = config.name;
    r.session = RunSimulatedAnnotator(
        config, ids, candidates, *p,
        Numbered(config.name + "-" + PolicyName(policy) + "-", i + 1),
        Numbered("sim-", i + 1));
    out.push_back(std::move(r));
  }
  return out;
}

StudyExport BatchExport(const Configuration &config, PolicyKind policy,
                        const Corpus &corpus, const SimulationSources &sources,
                        std::vector<SessionRecord> sessions, uint64_t seed) {
  StudyExport doc;
  doc.study.id = config.name + "-" + PolicyName(policy);
  doc.study.name = std::string("simulated ") + PolicyName(policy) +
                   " annotators under " + config.name;
  doc.study.conditions = {config};
  doc.study.assignment = {AssignmentPolicy::kRoundRobin, seed};
  doc.study.corpus_path = sources.corpus_path;
  doc.study.lexicon_path = sources.lexicon_path;
  doc.study.gold_path = sources.gold_path;
  doc.study.candidates_path = sources.candidates_path;
  for (const Idea &idea : corpus) doc.study.idea_order.push_back(idea.id);
  doc.sessions = std::move(sessions);
  return doc;
}

}  // namespace icv
