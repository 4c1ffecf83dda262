#include <memory>
#include <string>

#include <benchmark/benchmark.h>

#include "icv/corpus.h"
#include "icv/kg_client.h"
#include "icv/lexicon.h"
#include "icv/metrics.h"
#include "icv/simulator.h"
#include "icv/stats.h"

namespace {

std::string Data(const std::string &name) {
  return std::string(ICV_SOURCE_DIR) + "/data/" + name;
}

struct Demo {
  icv::Corpus corpus = icv::LoadCorpus(Data("ideas.json"));
  icv::GoldStandard gold = icv::LoadGold(Data("demo_gold.json"), corpus);
  std::shared_ptr<icv::Lexicon> lexicon =
      std::make_shared<icv::Lexicon>(icv::LoadLexicon(Data("demo.tsv")));
};

const Demo &GetDemo() {
  static const Demo demo;
  return demo;
}

void BM_SpotCorpus(benchmark::State &state) {
  const Demo &d = GetDemo();
  for (auto _ : state) {
    benchmark::DoNotOptimize(icv::SpotCorpus(d.corpus, *d.lexicon, 0.01));
  }
  state.SetItemsProcessed(state.iterations() * d.corpus.size());
}
BENCHMARK(BM_SpotCorpus);

void BM_ThresholdSweep(benchmark::State &state) {
  const Demo &d = GetDemo();
  for (auto _ : state) {
    // A fresh backend so the candidate cache does not hide the spotting cost.
    const icv::LocalBackend backend(d.lexicon);
    benchmark::DoNotOptimize(
        icv::ThresholdSweep(d.corpus, d.gold, backend, 0.0, 1.0, 0.01));
  }
}
BENCHMARK(BM_ThresholdSweep)->Unit(benchmark::kMillisecond);

void BM_SimulateBatch(benchmark::State &state) {
  const Demo &d = GetDemo();
  const icv::CandidateMap candidates = icv::SpotCorpus(d.corpus, *d.lexicon, 0.01);
  const icv::Configuration config =
      icv::PresetConfiguration("ranking-threshold");
  for (auto _ : state) {
    benchmark::DoNotOptimize(icv::RunConditionBatch(
        config, d.corpus, candidates, d.gold, icv::PolicyKind::kRandom, 10, 1));
  }
}
BENCHMARK(BM_SimulateBatch)->Unit(benchmark::kMillisecond);

void BM_StudentizedRange(benchmark::State &state) {
  const int groups = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(icv::stats::StudentizedRangeCdf(3.5, groups, 25));
  }
}
BENCHMARK(BM_StudentizedRange)->Arg(2)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_ScoreAnnotations(benchmark::State &state) {
  const Demo &d = GetDemo();
  const icv::LocalBackend backend(d.lexicon);
  std::vector<icv::AutoAnnotation> auto_annotations;
  for (const icv::Idea &idea : d.corpus) {
    auto_annotations.push_back(icv::AnnotateAllComputer(backend, idea, 0.4));
  }
  const icv::Annotations annotations = icv::ToAnnotations(auto_annotations);
  for (auto _ : state) {
    benchmark::DoNotOptimize(icv::ScoreAnnotations(annotations, d.gold));
  }
}
BENCHMARK(BM_ScoreAnnotations);

}  // namespace

BENCHMARK_MAIN();
