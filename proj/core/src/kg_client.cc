#include "icv/kg_client.h"

#include <algorithm>
#include <charconv>
#include <chrono>

#include <httplib.h>

#include "icv/error.h"
#include "icv/utf8.h"

namespace icv {

using nlohmann::json;

namespace {

// Accepts JSON numbers and numeric strings (Spotlight sends strings).
double NumberField(const json &object, const std::string &key,
                   const std::string &endpoint) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw BackendError(endpoint, "unparseable response: missing " + key);
  }
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) {
    const std::string &s = it->get_ref<const std::string &>();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc() && ptr == s.data() + s.size()) return value;
  }
  throw BackendError(endpoint, "unparseable response: bad number in " + key);
}

std::string StringField(const json &object, const std::string &key,
                        const std::string &endpoint, bool required) {
  if (key.empty()) return {};
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) {
    if (required) {
      throw BackendError(endpoint, "unparseable response: missing " + key);
    }
    return {};
  }
  if (!it->is_string()) {
    throw BackendError(endpoint, "unparseable response: " + key +
                                     " is not a string");
  }
  return it->get<std::string>();
}

std::string FormatConfidence(double value) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace

void BackendDescriptor::Validate() const {
  if (kind == BackendKind::kRemote && (!endpoint || endpoint->empty())) {
    throw Error(ErrorCode::kInvalidArgument, "remote backend needs an endpoint");
  }
  if (!(default_confidence >= 0.0 && default_confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "default confidence outside [0,1]");
  }
}

std::vector<AnnotationCandidate> ConceptBackend::FetchCandidates(
    const std::string &text, double min_confidence) const {
  if (!(min_confidence >= 0.0 && min_confidence <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence outside [0,1]");
  }
  const auto key = std::make_pair(text, min_confidence);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  std::vector<AnnotationCandidate> result = Fetch(text, min_confidence);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  cache_.emplace(key, result);
  return result;
}

size_t ConceptBackend::cache_size() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return cache_.size();
}

std::vector<AnnotationCandidate> LocalBackend::Fetch(
    const std::string &text, double min_confidence) const {
  return SpotTerms(Idea{"", text}, *lexicon_, min_confidence);
}

ResponseMapping ResponseMapping::FromJson(const json &doc) {
  ResponseMapping m;
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParse, "response mapping must be a JSON object");
  }
  auto read = [&](const char *key, std::string &field) {
    if (doc.contains(key)) field = doc.at(key).get<std::string>();
  };
  read("resources", m.resources);
  read("uri", m.uri);
  read("surface", m.surface);
  read("offset", m.offset);
  read("score", m.score);
  read("label", m.label);
  read("description", m.description);
  read("image", m.image);
  return m;
}

ResponseMapping ResponseMapping::Load(const std::string &path) {
  return FromJson(ReadJsonFile(path));
}

std::string LabelFromUri(const std::string &uri) {
  size_t cut = uri.find_last_of("/#:");
  std::string label = cut == std::string::npos ? uri : uri.substr(cut + 1);
  std::replace(label.begin(), label.end(), '_', ' ');
  return label.empty() ? uri : label;
}

std::vector<AnnotationCandidate> ParseRemoteResponse(
    const json &body, const ResponseMapping &mapping, const std::string &text,
    double min_confidence, const std::string &endpoint) {
  if (!body.is_object()) {
    throw BackendError(endpoint, "unparseable response: not a JSON object");
  }
  auto resources = body.find(mapping.resources);
  // Spotlight omits the resource list entirely when nothing was found.
  if (resources == body.end() || resources->is_null()) return {};
  if (!resources->is_array()) {
    throw BackendError(endpoint, "unparseable response: " + mapping.resources +
                                     " is not an array");
  }

  const size_t text_length = utf8::Length(text);
  std::map<std::pair<size_t, size_t>, AnnotationCandidate> grouped;
  for (const json &r : *resources) {
    if (!r.is_object()) {
      throw BackendError(endpoint, "unparseable response: resource not object");
    }
    const double score = NumberField(r, mapping.score, endpoint);
    const double raw_offset = NumberField(r, mapping.offset, endpoint);
    const std::string surface = StringField(r, mapping.surface, endpoint, true);
    ScoredConcept scored;
    scored.entity.uri = StringField(r, mapping.uri, endpoint, true);
    scored.entity.label = StringField(r, mapping.label, endpoint, false);
    if (scored.entity.label.empty()) {
      scored.entity.label = LabelFromUri(scored.entity.uri);
    }
    scored.entity.description =
        StringField(r, mapping.description, endpoint, false);
    std::string image = StringField(r, mapping.image, endpoint, false);
    if (!image.empty()) scored.entity.image_ref = image;
    scored.confidence = score;

    if (raw_offset < 0 || score < 0.0 || score > 1.0 ||
        scored.entity.uri.empty() || surface.empty()) {
      throw BackendError(endpoint, "unparseable response: invalid resource");
    }
    Span span;
    span.start = static_cast<size_t>(raw_offset);
    span.end = span.start + utf8::Length(surface);
    span.surface = surface;
    if (span.end > text_length ||
        utf8::Substr(text, span.start, span.end) != surface) {
      throw BackendError(endpoint, "unparseable response: offset " +
                                       std::to_string(span.start) +
                                       " does not match \"" + surface + "\"");
    }
    if (score < min_confidence) continue;
    AnnotationCandidate &candidate = grouped[{span.start, span.end}];
    candidate.span = span;
    auto dup = std::find_if(candidate.candidates.begin(),
                            candidate.candidates.end(),
                            [&](const ScoredConcept &c) {
                              return c.entity.uri == scored.entity.uri;
                            });
    if (dup == candidate.candidates.end()) {
      candidate.candidates.push_back(std::move(scored));
    } else if (scored.confidence > dup->confidence) {
      *dup = std::move(scored);
    }
  }

  // Leftmost first, longest first at equal start.
  std::vector<AnnotationCandidate> ordered;
  for (auto &[key, candidate] : grouped) ordered.push_back(std::move(candidate));
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const AnnotationCandidate &a, const AnnotationCandidate &b) {
                     if (a.span.start != b.span.start) {
                       return a.span.start < b.span.start;
                     }
                     return a.span.end > b.span.end;
                   });
  std::vector<AnnotationCandidate> out;
  size_t covered = 0;
  for (AnnotationCandidate &c : ordered) {
    if (!out.empty() && c.span.start < covered) continue;
    covered = c.span.end;
    out.push_back(std::move(c));
  }
  return out;
}

RemoteBackend::RemoteBackend(RemoteOptions options)
    : options_(std::move(options)) {
  const std::string &url = options_.endpoint;
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "endpoint must be an http:// URL: " + url);
  }
  std::string rest = url.substr(scheme.size());
  size_t slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  size_t colon = authority.rfind(':');
  if (colon != std::string::npos) {
    host_ = authority.substr(0, colon);
    const std::string port = authority.substr(colon + 1);
    auto [ptr, ec] =
        std::from_chars(port.data(), port.data() + port.size(), port_);
    if (ec != std::errc() || ptr != port.data() + port.size()) {
      throw Error(ErrorCode::kInvalidArgument, "bad port in endpoint " + url);
    }
  } else {
    host_ = authority;
  }
  if (host_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "missing host in endpoint " + url);
  }
}

std::vector<AnnotationCandidate> RemoteBackend::Fetch(
    const std::string &text, double min_confidence) const {
  httplib::Client client(host_, port_);
  const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Params params{{"text", text},
                         {"confidence", FormatConfidence(min_confidence)}};
  httplib::Headers headers{{"Accept", "application/json"}};
  const auto started = std::chrono::steady_clock::now();
  httplib::Result result = options_.use_post
                               ? client.Post(path_, headers, params)
                               : client.Get(path_, params, headers);
  if (!result) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    const httplib::Error err = result.error();
    const bool timed_out =
        err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout * 9 / 10);
    throw BackendError(options_.endpoint,
                       timed_out ? "timeout" : httplib::to_string(err));
  }
  if (result->status < 200 || result->status >= 300) {
    throw BackendError(options_.endpoint,
                       "HTTP status " + std::to_string(result->status));
  }
  json body;
  try {
    body = json::parse(result->body);
  } catch (const json::parse_error &e) {
    throw BackendError(options_.endpoint,
                       std::string("unparseable response: ") + e.what());
  }
  return ParseRemoteResponse(body, options_.mapping, text, min_confidence,
                             options_.endpoint);
}

std::unique_ptr<ConceptBackend> MakeBackend(
    const BackendDescriptor &descriptor, std::shared_ptr<const Lexicon> lexicon,
    const ResponseMapping &mapping) {
  descriptor.Validate();
  if (descriptor.kind == BackendKind::kLocal) {
    if (!lexicon) {
      throw Error(ErrorCode::kInvalidArgument, "local backend needs a lexicon");
    }
    return std::make_unique<LocalBackend>(std::move(lexicon));
  }
  RemoteOptions options;
  options.endpoint = *descriptor.endpoint;
  options.mapping = mapping;
  return std::make_unique<RemoteBackend>(std::move(options));
}

const ScoredConcept &BestCandidate(const AnnotationCandidate &candidate) {
  if (candidate.candidates.empty()) {
    throw Error(ErrorCode::kValidation, "annotation candidate without concepts");
  }
  const ScoredConcept *best = &candidate.candidates.front();
  for (const ScoredConcept &c : candidate.candidates) {
    if (c.confidence > best->confidence ||
        (c.confidence == best->confidence && c.entity.uri < best->entity.uri)) {
      best = &c;
    }
  }
  return *best;
}

AutoAnnotation AnnotateAllComputer(const ConceptBackend &backend,
                                   const Idea &idea, double min_confidence) {
  AutoAnnotation out;
  out.idea_id = idea.id;
  for (const AnnotationCandidate &candidate :
       backend.FetchCandidates(idea.text, min_confidence)) {
    const ScoredConcept &best = BestCandidate(candidate);
    if (best.confidence < min_confidence) continue;
    out.selections.push_back({candidate.span, best.entity, best.confidence});
  }
  return out;
}

}  // namespace icv
