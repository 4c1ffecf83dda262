#ifndef ICV_HTTP_API_H_
#define ICV_HTTP_API_H_

#include <memory>
#include <string>

#include "icv/error.h"
#include "icv/study_service.h"

namespace icv {

// HTTP status used for each error code.
int HttpStatusFor(ErrorCode code);

// {code, message, details}
nlohmann::json ErrorBody(const Error &error);

// HTTP/JSON front end of a StudyService.
//
//   POST /studies                              create a study
//   POST /studies/import                       recreate a study from an export
//   GET  /studies/{id}/export                  study export document
//   GET  /studies/{id}/exclusions              exclusion filter report
//   GET  /studies/{id}/report[?format=csv]     sweet-spot comparison
//        (includePartial=true, includeExcluded=true widen the session set)
//   POST /studies/{id}/participants            assign a participant
//   GET  /sessions/{id}                        session view
//   POST /sessions/{id}/events                 participant command, 204
//   POST /sessions/{id}/ideas/{index}/submit   submit the current idea
//   POST /sessions/{id}/survey                 questionnaire answers, 204
//   POST /sessions/{id}/tutorial               tutorial finished, 204
class ApiServer {
 public:
  explicit ApiServer(StudyService &service);
  ~ApiServer();

  ApiServer(const ApiServer &) = delete;
  ApiServer &operator=(const ApiServer &) = delete;

  // Binds without serving yet. Port 0 picks a free port. Returns the port.
  int Bind(const std::string &host, int port);

  // Serves until Stop(). Requires Bind().
  void Listen();

  // Listen() on a background thread.
  void Start();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace icv

#endif  // ICV_HTTP_API_H_
