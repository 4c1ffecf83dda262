#include "icv/study_export.h"

#include "icv/corpus.h"
#include "icv/error.h"
#include "icv/session_io.h"

namespace icv {

using nlohmann::json;

namespace {

json OptionalString(const std::optional<std::string> &s) {
  return s ? json(*s) : json(nullptr);
}

std::optional<std::string> ReadOptionalString(const json &doc,
                                              const char *key) {
  if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
  return doc[key].get<std::string>();
}

}  // namespace

json SurveyToJson(const SurveySubmission &s) {
  return {{"tlx", TlxToJson(s.tlx)},
          {"rawTlx", RawTlx(s.tlx)},
          {"resque", ResQueToJson(s.resque)},
          {"demographics",
           {{"ageGroup", OptionalString(s.demographics.age_group)},
            {"gender", OptionalString(s.demographics.gender)}}},
          {"feedback", OptionalString(s.feedback)}};
}

SurveySubmission SurveyFromJson(const json &doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "survey must be a JSON object");
  }
  try {
    SurveySubmission s;
    s.tlx = TlxFromJson(doc.at("tlx"));
    s.resque = ResQueFromJson(doc.at("resque"));
    if (doc.contains("demographics") && !doc["demographics"].is_null()) {
      const json &d = doc["demographics"];
      s.demographics.age_group = ReadOptionalString(d, "ageGroup");
      s.demographics.gender = ReadOptionalString(d, "gender");
    }
    s.feedback = ReadOptionalString(doc, "feedback");
    return s;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("survey: ") + e.what());
  }
}

json AssignmentToJson(const Assignment &a) {
  return {{"policy",
           a.policy == AssignmentPolicy::kRoundRobin ? "round_robin" : "random"},
          {"seed", a.seed}};
}

Assignment AssignmentFromJson(const json &doc) {
  Assignment a;
  std::string policy;
  if (doc.is_string()) {
    policy = doc.get<std::string>();
  } else if (doc.is_object()) {
    policy = doc.value("policy", "round_robin");
    if (doc.contains("seed")) a.seed = doc["seed"].get<uint64_t>();
  } else {
    throw Error(ErrorCode::kValidation,
                "assignment must be a policy name or an object");
  }
  if (policy == "round_robin") {
    a.policy = AssignmentPolicy::kRoundRobin;
  } else if (policy == "random") {
    a.policy = AssignmentPolicy::kRandom;
  } else {
    throw Error(ErrorCode::kValidation, "unknown assignment policy " + policy,
                {{"policy", policy}});
  }
  return a;
}

std::optional<std::string> ExclusionReason(const SessionState &session) {
  if (session.phase == Phase::kAnnotating) return std::nullopt;
  size_t accepted = 0;
  size_t rejected = 0;
  for (const IdeaState &idea : session.ideas) {
    for (const TermState &t : idea.terms) {
      if (t.status == TermStatus::kAccepted) ++accepted;
      if (t.status == TermStatus::kRejected) ++rejected;
    }
  }
  if (accepted + rejected == 0) return std::nullopt;
  if (rejected > 0 && accepted == 0) return "all_rejected";
  if (rejected == 0) return "none_rejected";
  return std::nullopt;
}

json StudyInfoToJson(const StudyInfo &info) {
  json conditions = json::array();
  for (const Configuration &c : info.conditions) {
    conditions.push_back(ConfigurationToJson(c));
  }
  return {{"id", info.id},
          {"name", info.name},
          {"conditions", conditions},
          {"assignment", AssignmentToJson(info.assignment)},
          {"corpusPath", info.corpus_path},
          {"lexiconPath", info.lexicon_path},
          {"goldPath", OptionalString(info.gold_path)},
          {"candidatesPath", OptionalString(info.candidates_path)},
          {"ideaOrder", info.idea_order}};
}

StudyInfo StudyInfoFromJson(const json &doc) {
  try {
    StudyInfo info;
    info.id = doc.at("id").get<std::string>();
    info.name = doc.at("name").get<std::string>();
    for (const json &c : doc.at("conditions")) {
      info.conditions.push_back(ConfigurationFromJson(c));
    }
    info.assignment = AssignmentFromJson(doc.at("assignment"));
    info.corpus_path = doc.at("corpusPath").get<std::string>();
    info.lexicon_path = doc.value("lexiconPath", "");
    info.gold_path = ReadOptionalString(doc, "goldPath");
    info.candidates_path = ReadOptionalString(doc, "candidatesPath");
    info.idea_order = doc.at("ideaOrder").get<std::vector<std::string>>();
    return info;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("study: ") + e.what());
  }
}

json ExportToJson(const StudyExport &doc) {
  json sessions = json::array();
  for (const SessionRecord &r : doc.sessions) {
    const auto reason = ExclusionReason(r.session);
    sessions.push_back(
        {{"condition", r.condition},
         {"excluded", reason.has_value()},
         {"exclusionReason", OptionalString(reason)},
         {"partial", IsPartial(r.session)},
         {"survey", r.survey ? SurveyToJson(*r.survey) : json(nullptr)},
         {"session", SessionToJson(r.session)}});
  }
  return {{"format", kExportFormat},
          {"version", kExportVersion},
          {"study", StudyInfoToJson(doc.study)},
          {"sessions", sessions}};
}

StudyExport ExportFromJson(const json &doc) {
  if (!doc.is_object() || doc.value("format", "") != kExportFormat) {
    throw Error(ErrorCode::kParse, "not a study export document");
  }
  if (doc.value("version", 0) != kExportVersion) {
    throw Error(ErrorCode::kParse, "unsupported study export version");
  }
  try {
    StudyExport out;
    out.study = StudyInfoFromJson(doc.at("study"));
    for (const json &s : doc.at("sessions")) {
      SessionRecord r;
      r.condition = s.at("condition").get<std::string>();
      r.session = SessionFromJson(s.at("session"));
      if (s.contains("survey") && !s["survey"].is_null()) {
        r.survey = SurveyFromJson(s["survey"]);
      }
      out.sessions.push_back(std::move(r));
    }
    return out;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParse, std::string("study export: ") + e.what());
  }
}

StudyExport LoadExport(const std::string &path) {
  return ExportFromJson(ReadJsonFile(path));
}

std::string DumpJson(const json &doc) { return doc.dump(2) + "\n"; }

ExclusionReport ApplyExclusionFilters(const StudyExport &doc) {
  ExclusionReport report;
  for (const SessionRecord &r : doc.sessions) {
    if (IsPartial(r.session)) continue;
    ++report.sessions;
    if (auto reason = ExclusionReason(r.session)) {
      report.excluded.push_back({r.session.session_id,
                                 r.session.participant_id, r.condition,
                                 *reason});
    }
  }
  return report;
}

json ExclusionReportToJson(const ExclusionReport &report) {
  json excluded = json::array();
  for (const ExclusionEntry &e : report.excluded) {
    excluded.push_back({{"sessionId", e.session_id},
                        {"participantId", e.participant_id},
                        {"condition", e.condition},
                        {"reason", e.reason}});
  }
  return {{"sessions", report.sessions}, {"excluded", excluded}};
}

}  // namespace icv
