// icv: command-line front end for sweeps, simulations, scoring, comparison,
// agreement and the study service.
//
// Exit codes: 0 ok, 2 usage, 3 I/O or backend failure, 4 validation.

#include <signal.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icv/configuration.h"
#include "icv/corpus.h"
#include "icv/error.h"
#include "icv/http_api.h"
#include "icv/kg_client.h"
#include "icv/lexicon.h"
#include "icv/metrics.h"
#include "icv/report.h"
#include "icv/session_io.h"
#include "icv/simulator.h"
#include "icv/study_export.h"
#include "icv/study_service.h"

namespace {

using icv::Error;
using icv::ErrorCode;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitValidation = 4;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    case ErrorCode::kIo:
    case ErrorCode::kNotFound:
    case ErrorCode::kBackend:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

void Emit(const std::string &content, const std::string &path) {
  if (path.empty() || path == "-") {
    std::cout << content << std::flush;
  } else {
    icv::WriteTextFile(path, content);
  }
}

std::string CheckFormat(const std::string &format,
                        std::initializer_list<const char *> allowed) {
  for (const char *a : allowed) {
    if (format == a) return format;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown format " + format);
}

struct BackendArgs {
  std::string lexicon;
  std::string endpoint;
  std::string mapping;
  int timeout_ms = 10000;
  bool post = false;

  void Register(CLI::App *cmd) {
    cmd->add_option("--lexicon", lexicon, "Lexicon TSV for the local backend");
    cmd->add_option("--endpoint", endpoint,
                    "Spotlight-compatible candidates endpoint (http://...)");
    cmd->add_option("--mapping", mapping, "Response field mapping JSON");
    cmd->add_option("--timeout-ms", timeout_ms, "Remote request timeout");
    cmd->add_flag("--post", post, "Use POST instead of GET");
  }

  std::unique_ptr<icv::ConceptBackend> Make() const {
    if (lexicon.empty() == endpoint.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "exactly one of --lexicon and --endpoint is required");
    }
    if (!lexicon.empty()) {
      return std::make_unique<icv::LocalBackend>(
          std::make_shared<icv::Lexicon>(icv::LoadLexicon(lexicon)));
    }
    icv::RemoteOptions options;
    options.endpoint = endpoint;
    if (!mapping.empty()) options.mapping = icv::ResponseMapping::Load(mapping);
    options.timeout_ms = timeout_ms;
    options.use_post = post;
    return std::make_unique<icv::RemoteBackend>(std::move(options));
  }
};

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string corpus, gold, out, format = "csv";
  double from = 0.0, to = 1.0, step = 0.01;
  BackendArgs backend;
};

int RunSweep(const SweepArgs &a) {
  CheckFormat(a.format, {"csv", "json"});
  const icv::Corpus corpus = icv::LoadCorpus(a.corpus);
  const icv::GoldStandard gold = icv::LoadGold(a.gold, corpus);
  auto backend = a.backend.Make();
  const icv::SweepResult sweep =
      icv::ThresholdSweep(corpus, gold, *backend, a.from, a.to, a.step);
  const icv::SweepRow &best = icv::BestSweepRow(sweep);
  std::string content;
  if (a.format == "csv") {
    content = icv::SweepToCsv(sweep);
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (const icv::SweepRow &r : sweep.rows) {
      rows.push_back({{"gamma", r.gamma},
                      {"macro", {{"precision", r.precision},
                                 {"recall", r.recall},
                                 {"f", r.f}}},
                      {"micro", {{"precision", r.micro_precision},
                                 {"recall", r.micro_recall},
                                 {"f", r.micro_f}}}});
    }
    content = icv::DumpJson({{"step", sweep.step},
                             {"rows", rows},
                             {"bestGamma", best.gamma}});
  }
  Emit(content, a.out);
  // The summary goes to stderr when stdout carries the table.
  std::ostream &summary = a.out.empty() || a.out == "-" ? std::cerr : std::cout;
  char line[160];
  std::snprintf(line, sizeof(line),
                "best gamma %.4f: macro P %.4f R %.4f F %.4f, micro P %.4f "
                "R %.4f F %.4f\n",
                best.gamma, best.precision, best.recall, best.f,
                best.micro_precision, best.micro_recall, best.micro_f);
  summary << line;
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::vector<std::string> configs;
  std::string policy = "oracle";
  size_t n = 1;
  uint64_t seed = 0;
  std::string corpus, gold, lexicon, candidates;
  double gamma = icv::kDefaultSpotConfidence;
  std::string out, out_dir, report, format = "text";
  bool include_excluded = false;
};

std::string RenderReport(const icv::SweetSpotReport &report,
                         const std::string &format) {
  if (format == "json") return icv::DumpJson(icv::ReportToJson(report));
  if (format == "csv") return icv::ReportToCsv(report);
  return icv::ReportToText(report);
}

icv::SweetSpotReport ReportOrExplain(const std::vector<icv::ConfigRun> &runs) {
  if (runs.empty()) {
    throw Error(ErrorCode::kValidation,
                "no sessions left to report (excluded or partial sessions "
                "are omitted; see --include-excluded / --include-partial)");
  }
  return icv::BuildSweetSpotReport(runs);
}

int RunSimulate(const SimulateArgs &a) {
  CheckFormat(a.format, {"text", "json", "csv"});
  const icv::PolicyKind policy = icv::ParsePolicy(a.policy);
  std::vector<icv::Configuration> configs;
  for (const std::string &name : a.configs) {
    configs.push_back(icv::PresetConfiguration(name));
  }
  if (configs.size() > 1 && !a.out.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "--out takes a single configuration; use --out-dir");
  }
  if (a.lexicon.empty() == a.candidates.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "exactly one of --lexicon and --candidates is required");
  }
  const icv::Corpus corpus = icv::LoadCorpus(a.corpus);
  const icv::GoldStandard gold = icv::LoadGold(a.gold, corpus);
  const icv::CandidateMap candidates =
      a.candidates.empty()
          ? icv::SpotCorpus(corpus, icv::LoadLexicon(a.lexicon), a.gamma)
          : icv::LoadCandidateMap(a.candidates, corpus);
  icv::SimulationSources sources;
  sources.corpus_path = a.corpus;
  sources.lexicon_path = a.lexicon;
  sources.gold_path = a.gold;
  if (!a.candidates.empty()) sources.candidates_path = a.candidates;

  std::vector<icv::StudyExport> exports;
  for (const icv::Configuration &config : configs) {
    exports.push_back(icv::BatchExport(
        config, policy, corpus, sources,
        icv::RunConditionBatch(config, corpus, candidates, gold, policy, a.n,
                               a.seed),
        a.seed));
    const icv::StudyExport &doc = exports.back();
    if (!a.out.empty()) {
      icv::WriteTextFile(a.out, icv::DumpJson(icv::ExportToJson(doc)));
    } else if (!a.out_dir.empty()) {
      std::filesystem::create_directories(a.out_dir);
      icv::WriteTextFile(
          (std::filesystem::path(a.out_dir) / (doc.study.id + ".json")).string(),
          icv::DumpJson(icv::ExportToJson(doc)));
    }
  }
  icv::RunOptions options;
  options.include_excluded = a.include_excluded;
  const icv::SweetSpotReport report =
      ReportOrExplain(icv::RunsFromExports(exports, gold, options));
  Emit(RenderReport(report, a.format), a.report);
  return kExitOk;
}

// ---------------------------------------------------------------------------

icv::GoldStandard GoldFor(const icv::StudyExport &doc, const std::string &gold,
                          const std::string &corpus_override) {
  const std::string corpus_path =
      corpus_override.empty() ? doc.study.corpus_path : corpus_override;
  return icv::LoadGold(gold, icv::LoadCorpus(corpus_path));
}

struct EvaluateArgs {
  std::string export_path, gold, corpus, out, format = "json";
};

int RunEvaluate(const EvaluateArgs &a) {
  CheckFormat(a.format, {"json", "csv"});
  const icv::StudyExport doc = icv::LoadExport(a.export_path);
  const nlohmann::json evaluation =
      icv::EvaluateExport(doc, GoldFor(doc, a.gold, a.corpus));
  Emit(a.format == "csv" ? icv::EvaluationToCsv(evaluation)
                         : icv::DumpJson(evaluation),
       a.out);
  return kExitOk;
}

struct CompareArgs {
  std::vector<std::string> exports;
  std::string gold, corpus, out, format = "text";
  bool include_partial = false;
  bool include_excluded = false;
};

int RunCompare(const CompareArgs &a) {
  CheckFormat(a.format, {"text", "json", "csv"});
  std::vector<icv::StudyExport> docs;
  for (const std::string &path : a.exports) docs.push_back(icv::LoadExport(path));
  const icv::GoldStandard gold = GoldFor(docs.front(), a.gold, a.corpus);
  icv::RunOptions options;
  options.include_partial = a.include_partial;
  options.include_excluded = a.include_excluded;
  const icv::SweetSpotReport report =
      ReportOrExplain(icv::RunsFromExports(docs, gold, options));
  Emit(RenderReport(report, a.format), a.out);
  return kExitOk;
}

struct KappaArgs {
  std::string a, b;
};

int RunKappa(const KappaArgs &a) {
  const double kappa =
      icv::CohensKappa(icv::LoadLabels(a.a), icv::LoadLabels(a.b));
  std::printf("%.3f\n", kappa);
  return kExitOk;
}

struct SpotArgs {
  std::string corpus, lexicon, out;
  double gamma = icv::kDefaultSpotConfidence;
};

int RunSpot(const SpotArgs &a) {
  const icv::Corpus corpus = icv::LoadCorpus(a.corpus);
  const icv::CandidateMap candidates =
      icv::SpotCorpus(corpus, icv::LoadLexicon(a.lexicon), a.gamma);
  Emit(icv::DumpJson(icv::CandidateMapToJson(candidates)), a.out);
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  size_t snapshot_every = 100;
};

int RunServe(ServeArgs a) {
  if (a.data_dir.empty()) {
    const char *env = std::getenv("ICV_DATA_DIR");
    a.data_dir = env != nullptr && *env != '\0' ? env : "icv-data";
  }
  // Block the stop signals before any server thread starts so that only
  // sigwait below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  icv::ServiceOptions options;
  options.data_dir = a.data_dir;
  options.snapshot_every = a.snapshot_every;
  icv::StudyService service(options);
  icv::ApiServer server(service);
  const int port = server.Bind(a.host, a.port);
  server.Start();
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  std::cout << "port " << port << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  server.Stop();
  for (const std::string &id : service.StudyIds()) service.Snapshot(id);
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Interactive concept validation: annotation engine and "
               "evaluation harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "icv 0.1.0");

  SweepArgs sweep;
  auto *sweep_cmd = app.add_subcommand("sweep", "All-computer threshold sweep");
  sweep_cmd->add_option("--corpus", sweep.corpus, "Corpus JSON")->required();
  sweep_cmd->add_option("--gold", sweep.gold, "Gold standard JSON")->required();
  sweep_cmd->add_option("--from", sweep.from, "First gamma");
  sweep_cmd->add_option("--to", sweep.to, "Last gamma");
  sweep_cmd->add_option("--step", sweep.step, "Gamma step");
  sweep_cmd->add_option("--out", sweep.out, "Output file (default stdout)");
  sweep_cmd->add_option("--format", sweep.format, "csv|json");
  sweep.backend.Register(sweep_cmd);

  SimulateArgs sim;
  auto *sim_cmd = app.add_subcommand("simulate", "Run simulated annotators");
  sim_cmd->add_option("--config", sim.configs, "Configuration preset(s)")
      ->required();
  sim_cmd->add_option("--policy", sim.policy, "oracle|random|lazy");
  sim_cmd->add_option("-n", sim.n, "Sessions per configuration");
  sim_cmd->add_option("--seed", sim.seed, "Seed for the random policy");
  sim_cmd->add_option("--corpus", sim.corpus, "Corpus JSON")->required();
  sim_cmd->add_option("--gold", sim.gold, "Gold standard JSON")->required();
  sim_cmd->add_option("--lexicon", sim.lexicon, "Lexicon TSV");
  sim_cmd->add_option("--candidates", sim.candidates,
                      "Human-supplied candidate lists JSON");
  sim_cmd->add_option("--gamma", sim.gamma, "Spotting confidence floor");
  sim_cmd->add_option("--out", sim.out, "Export file (one configuration)");
  sim_cmd->add_option("--out-dir", sim.out_dir, "Directory for exports");
  sim_cmd->add_option("--report", sim.report, "Report file (default stdout)");
  sim_cmd->add_option("--format", sim.format, "text|json|csv");
  sim_cmd->add_flag("--include-excluded", sim.include_excluded,
                    "Keep sessions flagged by exclusion filters");

  EvaluateArgs eval;
  auto *eval_cmd = app.add_subcommand("evaluate", "Score one export");
  eval_cmd->add_option("export", eval.export_path, "Study export JSON")
      ->required();
  eval_cmd->add_option("--gold", eval.gold, "Gold standard JSON")->required();
  eval_cmd->add_option("--corpus", eval.corpus, "Corpus (default: export's)");
  eval_cmd->add_option("--out", eval.out, "Output file (default stdout)");
  eval_cmd->add_option("--format", eval.format, "json|csv");

  CompareArgs cmp;
  auto *cmp_cmd = app.add_subcommand("compare", "Sweet-spot report");
  cmp_cmd->add_option("exports", cmp.exports, "Study export JSON files")
      ->required();
  cmp_cmd->add_option("--gold", cmp.gold, "Gold standard JSON")->required();
  cmp_cmd->add_option("--corpus", cmp.corpus, "Corpus (default: export's)");
  cmp_cmd->add_option("--out", cmp.out, "Output file (default stdout)");
  cmp_cmd->add_option("--format", cmp.format, "text|json|csv");
  cmp_cmd->add_flag("--include-partial", cmp.include_partial,
                    "Keep sessions that never reached the survey");
  cmp_cmd->add_flag("--include-excluded", cmp.include_excluded,
                    "Keep sessions flagged by exclusion filters");

  KappaArgs kappa;
  auto *kappa_cmd = app.add_subcommand("kappa", "Cohen's kappa of two labelings");
  kappa_cmd->add_option("a", kappa.a, "Label map JSON")->required();
  kappa_cmd->add_option("b", kappa.b, "Label map JSON")->required();

  SpotArgs spot;
  auto *spot_cmd = app.add_subcommand("spot", "Write candidate lists");
  spot_cmd->add_option("--corpus", spot.corpus, "Corpus JSON")->required();
  spot_cmd->add_option("--lexicon", spot.lexicon, "Lexicon TSV")->required();
  spot_cmd->add_option("--gamma", spot.gamma, "Confidence floor");
  spot_cmd->add_option("--out", spot.out, "Output file (default stdout)");

  ServeArgs serve;
  auto *serve_cmd = app.add_subcommand("serve", "Run the study service");
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--data-dir", serve.data_dir,
                        "Study storage (default $ICV_DATA_DIR)");
  serve_cmd->add_option("--snapshot-every", serve.snapshot_every,
                        "Log records between snapshots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sweep_cmd) return RunSweep(sweep);
    if (*sim_cmd) return RunSimulate(sim);
    if (*eval_cmd) return RunEvaluate(eval);
    if (*cmp_cmd) return RunCompare(cmp);
    if (*kappa_cmd) return RunKappa(kappa);
    if (*spot_cmd) return RunSpot(spot);
    if (*serve_cmd) return RunServe(serve);
  } catch (const Error &e) {
    std::cerr << "icv: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception &e) {
    std::cerr << "icv: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
