#include "icv/http_api.h"

#include <thread>

#include <httplib.h>

#include "icv/report.h"
#include "icv/study_export.h"

namespace icv {

using nlohmann::json;

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kFailedPrecondition:
      return 409;
    case ErrorCode::kValidation:
    case ErrorCode::kUndefined:
      return 422;
    case ErrorCode::kBackend:
      return 502;
    case ErrorCode::kIo:
      return 500;
  }
  return 500;
}

json ErrorBody(const Error &error) {
  return {{"code", ErrorCodeName(error.code())},
          {"message", error.what()},
          {"details", error.details()}};
}

namespace {

void SendJson(httplib::Response &res, const json &body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response &res, const Error &e) {
  SendJson(res, ErrorBody(e), HttpStatusFor(e.code()));
}

json ParseBody(const httplib::Request &req) {
  if (req.body.empty()) return json::object();
  json doc = json::parse(req.body, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kParse, "request body is not valid JSON");
  }
  return doc;
}

bool FlagParam(const httplib::Request &req, const char *name) {
  if (!req.has_param(name)) return false;
  const std::string v = req.get_param_value(name);
  return v.empty() || v == "true" || v == "1";
}

// Runs a handler and turns every failure into a uniform error body.
template <typename Fn>
httplib::Server::Handler Guarded(Fn fn) {
  return [fn](const httplib::Request &req, httplib::Response &res) {
    try {
      fn(req, res);
    } catch (const Error &e) {
      SendError(res, e);
    } catch (const json::exception &e) {
      SendError(res, Error(ErrorCode::kParse, e.what()));
    } catch (const std::exception &e) {
      SendJson(res,
               {{"code", "internal"}, {"message", e.what()},
                {"details", json::object()}},
               500);
    }
  };
}

}  // namespace

struct ApiServer::Impl {
  StudyService &service;
  httplib::Server server;
  std::thread thread;
  bool bound = false;

  explicit Impl(StudyService &s) : service(s) { Routes(); }

  void Routes() {
    server.Post("/studies", Guarded([this](const auto &req, auto &res) {
      const std::string id =
          service.CreateStudy(StudySpecFromJson(ParseBody(req)));
      SendJson(res, {{"studyId", id}}, 201);
    }));
    server.Post("/studies/import", Guarded([this](const auto &req, auto &res) {
      const std::string id =
          service.ImportStudy(ExportFromJson(ParseBody(req)));
      SendJson(res, {{"studyId", id}}, 201);
    }));
    server.Get("/studies", Guarded([this](const auto &, auto &res) {
      SendJson(res, {{"studies", service.StudyIds()}});
    }));
    server.Post(R"(/studies/([^/]+)/participants)",
                Guarded([this](const auto &req, auto &res) {
                  const json body = ParseBody(req);
                  const std::string participant =
                      body.value("participantId", "");
                  SendJson(res,
                           service.AssignParticipant(req.matches[1], participant),
                           201);
                }));
    server.Get(R"(/studies/([^/]+)/export)",
               Guarded([this](const auto &req, auto &res) {
                 SendJson(res, ExportToJson(service.Export(req.matches[1])));
               }));
    server.Get(R"(/studies/([^/]+)/exclusions)",
               Guarded([this](const auto &req, auto &res) {
                 SendJson(res, ExclusionReportToJson(
                                   service.Exclusions(req.matches[1])));
               }));
    server.Get(R"(/studies/([^/]+)/report)",
               Guarded([this](const auto &req, auto &res) {
                 RunOptions options;
                 options.include_partial = FlagParam(req, "includePartial");
                 options.include_excluded = FlagParam(req, "includeExcluded");
                 const SweetSpotReport report =
                     service.Report(req.matches[1], options);
                 const std::string format = req.has_param("format")
                                                ? req.get_param_value("format")
                                                : "json";
                 if (format == "csv") {
                   res.set_content(ReportToCsv(report), "text/csv");
                 } else if (format == "json") {
                   SendJson(res, ReportToJson(report));
                 } else {
                   throw Error(ErrorCode::kInvalidArgument,
                               "unknown format " + format,
                               {{"format", format}});
                 }
               }));
    server.Get(R"(/sessions/([^/]+))",
               Guarded([this](const auto &req, auto &res) {
                 SendJson(res, service.SessionView(req.matches[1]));
               }));
    server.Post(R"(/sessions/([^/]+)/events)",
                Guarded([this](const auto &req, auto &res) {
                  service.PostEvent(req.matches[1],
                                    EventRequestFromJson(ParseBody(req)));
                  res.status = 204;
                }));
    server.Post(R"(/sessions/([^/]+)/ideas/(\d+)/submit)",
                Guarded([this](const auto &req, auto &res) {
                  const json body = ParseBody(req);
                  std::optional<int64_t> ts;
                  if (body.contains("timestampMs")) {
                    ts = body["timestampMs"].template get<int64_t>();
                  }
                  const size_t index = std::stoul(req.matches[2]);
                  SendJson(res, service.SubmitIdea(req.matches[1], index, ts));
                }));
    server.Post(R"(/sessions/([^/]+)/survey)",
                Guarded([this](const auto &req, auto &res) {
                  service.SubmitSurvey(req.matches[1],
                                       SurveyFromJson(ParseBody(req)));
                  res.status = 204;
                }));
    server.Post(R"(/sessions/([^/]+)/tutorial)",
                Guarded([this](const auto &req, auto &res) {
                  service.CompleteTutorial(req.matches[1]);
                  res.status = 204;
                }));
  }
};

ApiServer::ApiServer(StudyService &service)
    : impl_(std::make_unique<Impl>(service)) {}

ApiServer::~ApiServer() { Stop(); }

int ApiServer::Bind(const std::string &host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    throw Error(ErrorCode::kIo,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound;
}

void ApiServer::Listen() {
  if (!impl_->bound) {
    throw Error(ErrorCode::kFailedPrecondition, "server is not bound");
  }
  impl_->server.listen_after_bind();
}

void ApiServer::Start() {
  if (!impl_->bound) {
    throw Error(ErrorCode::kFailedPrecondition, "server is not bound");
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ApiServer::Stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace icv
