#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <thread>
#include <tuple>

#include <gtest/gtest.h>
#include <httplib.h>

#include "fixtures.h"
#include "icv/error.h"
#include "icv/kg_client.h"
#include "icv/lexicon.h"

namespace icv {
namespace {

using nlohmann::json;

// Spotlight-style candidates endpoint over a lexicon.
class MockSpotlight {
 public:
  explicit MockSpotlight(std::shared_ptr<const Lexicon> lexicon)
      : lexicon_(std::move(lexicon)) {
    auto candidates = [this](const httplib::Request &req, httplib::Response &res) {
      ++requests_;
      const std::string text = req.get_param_value("text");
      const double confidence = std::stod(req.get_param_value("confidence"));
      json resources = json::array();
      for (const AnnotationCandidate &c : SpotTerms({"", text}, *lexicon_, confidence)) {
        for (const ScoredConcept &sc : c.candidates) {
          resources.push_back({{"@URI", sc.entity.uri},
                               {"@label", sc.entity.label},
                               {"@description", sc.entity.description},
                               {"@surfaceForm", c.span.surface},
                               {"@offset", std::to_string(c.span.start)},
                               {"@similarityScore", sc.confidence}});
        }
      }
      json body = json::object();
      if (!resources.empty()) body["Resources"] = resources;
      res.set_content(body.dump(), "application/json");
    };
    server_.Get("/rest/candidates", candidates);
    server_.Post("/rest/candidates", candidates);
    server_.Get("/slow", [](const httplib::Request &, httplib::Response &res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(600));
      res.set_content("{}", "application/json");
    });
    server_.Get("/empty", [](const httplib::Request &, httplib::Response &res) {
      res.set_content(R"({"Resources": []})", "application/json");
    });
    server_.Get("/error", [](const httplib::Request &, httplib::Response &res) {
      res.status = 503;
      res.set_content("down", "text/plain");
    });
    server_.Get("/garbage", [](const httplib::Request &, httplib::Response &res) {
      res.set_content("<html>", "text/html");
    });
    server_.Get("/misaligned", [](const httplib::Request &, httplib::Response &res) {
      res.set_content(
          R"({"Resources":[{"@URI":"http://x/A","@surfaceForm":"cat","@offset":"2","@similarityScore":"0.5"}]})",
          "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockSpotlight() {
    server_.stop();
    thread_.join();
  }

  std::string Url(const std::string &path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

  int requests() const { return requests_; }

 private:
  std::shared_ptr<const Lexicon> lexicon_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
};

ResponseMapping LabelledMapping() {
  ResponseMapping mapping;
  mapping.label = "@label";
  mapping.description = "@description";
  return mapping;
}

using Flat = std::set<std::tuple<size_t, size_t, std::string, std::string,
                                 std::string, std::string, double>>;

Flat Flatten(const std::vector<AnnotationCandidate> &list) {
  Flat out;
  for (const AnnotationCandidate &c : list) {
    for (const ScoredConcept &sc : c.candidates) {
      out.emplace(c.span.start, c.span.end, c.span.surface, sc.entity.uri,
                  sc.entity.label, sc.entity.description, sc.confidence);
    }
  }
  return out;
}

std::shared_ptr<const Lexicon> DemoLexicon() {
  return std::make_shared<Lexicon>(LoadLexicon(testing::DataPath("demo.tsv")));
}

TEST(KgClient, RemoteAndLocalBackendsAreInterchangeable) {
  const auto lexicon = DemoLexicon();
  MockSpotlight mock(lexicon);
  const LocalBackend local(lexicon);
  const Corpus corpus = LoadCorpus(testing::DataPath("ideas.json"));
  for (bool post : {false, true}) {
    RemoteOptions options{mock.Url("/rest/candidates"), LabelledMapping(), 2000, post};
    const RemoteBackend remote(options);
    for (const Idea &idea : corpus) {
      for (double gamma : {0.01, 0.5, 0.9}) {
        EXPECT_EQ(Flatten(remote.FetchCandidates(idea.text, gamma)),
                  Flatten(local.FetchCandidates(idea.text, gamma)))
            << idea.id << " gamma " << gamma << " post " << post;
      }
    }
  }
}

TEST(KgClient, LocalBackendDelegatesToSpotter) {
  const auto lexicon = DemoLexicon();
  const LocalBackend local(lexicon);
  EXPECT_EQ(Flatten(local.FetchCandidates("keyboard and monitors", 0.01)),
            Flatten(SpotTerms({"", "keyboard and monitors"}, *lexicon, 0.01)));
  EXPECT_EQ(local.Describe(), "local");
}

TEST(KgClient, RemoteResultsAreCached) {
  MockSpotlight mock(DemoLexicon());
  const RemoteBackend remote({mock.Url("/rest/candidates"), {}, 2000, false});
  remote.FetchCandidates("gym equipment", 0.1);
  remote.FetchCandidates("gym equipment", 0.1);
  EXPECT_EQ(mock.requests(), 1);
  remote.FetchCandidates("gym equipment", 0.2);
  EXPECT_EQ(mock.requests(), 2);
  EXPECT_EQ(remote.cache_size(), 2u);
}

TEST(KgClient, LabelsFallBackToUri) {
  MockSpotlight mock(DemoLexicon());
  const RemoteBackend remote({mock.Url("/rest/candidates"), {}, 2000, false});
  const auto list = remote.FetchCandidates("gym equipment", 0.5);
  ASSERT_FALSE(list.empty());
  EXPECT_EQ(list[0].candidates[0].entity.label, "Exercise equipment");
  EXPECT_EQ(LabelFromUri("http://dbpedia.org/resource/Pet_food"), "Pet food");
}

TEST(KgClient, ZeroResourcesIsAnEmptyResult) {
  MockSpotlight mock(DemoLexicon());
  EXPECT_TRUE(RemoteBackend({mock.Url("/empty"), {}, 2000, false})
                  .FetchCandidates("nothing here", 0.1)
                  .empty());
  EXPECT_TRUE(RemoteBackend({mock.Url("/rest/candidates"), {}, 2000, false})
                  .FetchCandidates("zzz qqq", 0.1)
                  .empty());
}

BackendError FetchError(const std::string &url, int timeout_ms = 2000) {
  try {
    RemoteBackend({url, {}, timeout_ms, false}).FetchCandidates("cat", 0.1);
  } catch (const BackendError &e) {
    return e;
  }
  ADD_FAILURE() << "no backend error for " << url;
  return BackendError(url, "none");
}

TEST(KgClient, TimeoutIsABackendError) {
  MockSpotlight mock(DemoLexicon());
  const BackendError e = FetchError(mock.Url("/slow"), 200);
  EXPECT_EQ(e.cause(), "timeout");
  EXPECT_EQ(e.endpoint(), mock.Url("/slow"));
  EXPECT_EQ(e.code(), ErrorCode::kBackend);
}

TEST(KgClient, FailuresAreNeverSilentlyEmpty) {
  MockSpotlight mock(DemoLexicon());
  EXPECT_EQ(FetchError(mock.Url("/error")).cause(), "HTTP status 503");
  EXPECT_NE(FetchError(mock.Url("/garbage")).cause().find("unparseable"),
            std::string::npos);
  EXPECT_NE(FetchError(mock.Url("/misaligned")).cause().find("offset"),
            std::string::npos);
  // Nothing listens on port 1.
  EXPECT_FALSE(FetchError("http://127.0.0.1:1/x").cause().empty());
}

TEST(KgClient, ParsesSpotlightSchemaAndMappings) {
  const std::string text = "A pet food store";
  const json body = json::parse(R"({"Resources":[
    {"@URI":"http://x/Pet_food","@surfaceForm":"pet food","@offset":"2","@similarityScore":"0.9"},
    {"@URI":"http://x/Pet","@surfaceForm":"pet","@offset":"2","@similarityScore":"0.7"},
    {"@URI":"http://x/Food","@surfaceForm":"food","@offset":"6","@similarityScore":"0.8"},
    {"@URI":"http://x/Store","@surfaceForm":"store","@offset":11,"@similarityScore":0.2},
    {"@URI":"http://x/Pet_food2","@surfaceForm":"pet food","@offset":"2","@similarityScore":"0.6"}]})");
  const auto list = ParseRemoteResponse(body, {}, text, 0.5, "e");
  ASSERT_EQ(list.size(), 1u);  // store is below the floor, pet and food overlap
  EXPECT_EQ(list[0].span.surface, "pet food");
  EXPECT_EQ(list[0].candidates.size(), 2u);

  ResponseMapping custom;
  custom.resources = "annotations";
  custom.uri = "id";
  custom.surface = "text";
  custom.offset = "begin";
  custom.score = "score";
  const json other = json::parse(
      R"({"annotations":[{"id":"http://x/Store","text":"store","begin":11,"score":0.4}]})");
  EXPECT_EQ(ParseRemoteResponse(other, custom, text, 0.1, "e").size(), 1u);
  EXPECT_EQ(ResponseMapping::Load(testing::DataPath("spotlight_mapping.json")).uri,
            "@URI");

  EXPECT_THROW(ParseRemoteResponse(json::array(), {}, text, 0.1, "e"), BackendError);
  EXPECT_THROW(ParseRemoteResponse(json::parse(R"({"Resources":[{"@URI":"u"}]})"),
                                   {}, text, 0.1, "e"),
               BackendError);
  EXPECT_THROW(
      ParseRemoteResponse(
          json::parse(
              R"({"Resources":[{"@URI":"u","@surfaceForm":"pet","@offset":"2","@similarityScore":"1.5"}]})"),
          {}, text, 0.1, "e"),
      BackendError);
}

TEST(KgClient, DescriptorValidation) {
  BackendDescriptor remote{BackendKind::kRemote, std::nullopt, 0.1};
  EXPECT_THROW(remote.Validate(), Error);
  BackendDescriptor bad{BackendKind::kLocal, std::nullopt, 1.5};
  EXPECT_THROW(bad.Validate(), Error);
  EXPECT_THROW(MakeBackend({BackendKind::kLocal, {}, 0.1}, nullptr), Error);
  EXPECT_EQ(MakeBackend({BackendKind::kLocal, {}, 0.1}, DemoLexicon())->Describe(),
            "local");
  EXPECT_EQ(MakeBackend({BackendKind::kRemote, "http://h:9/p", 0.1}, nullptr)
                ->Describe(),
            "http://h:9/p");
  EXPECT_THROW(RemoteBackend({"https://h/p", {}, 100, false}), Error);
  EXPECT_THROW(RemoteBackend({"http://h:port/p", {}, 100, false}), Error);
}

Lexicon KeyboardLexicon() {
  Lexicon lexicon;
  lexicon.Add({"keyboard", {"http://x/Computer_keyboard", "Computer keyboard", "", {}}, 0.8});
  lexicon.Add({"keyboard", {"http://x/Musical_keyboard", "Musical keyboard", "", {}}, 0.6});
  return lexicon;
}

TEST(AllComputer, PicksArgmaxAboveFloor) {
  const LocalBackend backend(std::make_shared<Lexicon>(KeyboardLexicon()));
  const AutoAnnotation a = AnnotateAllComputer(backend, {"i", "keyboard"}, 0.1);
  ASSERT_EQ(a.selections.size(), 1u);
  EXPECT_EQ(a.selections[0].entity.uri, "http://x/Computer_keyboard");
  EXPECT_DOUBLE_EQ(a.selections[0].confidence, 0.8);
  EXPECT_TRUE(AnnotateAllComputer(backend, {"i", "keyboard"}, 0.9).selections.empty());
}

TEST(AllComputer, TiesGoToSmallerUri) {
  AnnotationCandidate c;
  c.candidates = {{{"http://x/b", "B", "", {}}, 0.7}, {{"http://x/a", "A", "", {}}, 0.7}};
  EXPECT_EQ(BestCandidate(c).entity.uri, "http://x/a");
  EXPECT_THROW(BestCandidate(AnnotationCandidate{}), Error);
}

TEST(AllComputer, SelectionsShrinkWithGammaOnSingleTokenLexicon) {
  const testing::Fixture f = testing::TwoBandFixture();
  const LocalBackend backend(std::make_shared<Lexicon>(f.lexicon));
  for (const Idea &idea : f.corpus) {
    for (int lo = 0; lo <= 100; lo += 5) {
      for (int hi = lo; hi <= 100; hi += 5) {
        std::set<std::string> low, high;
        for (const auto &s : AnnotateAllComputer(backend, idea, lo / 100.0).selections) {
          low.insert(std::to_string(s.span.start) + s.entity.uri);
        }
        for (const auto &s : AnnotateAllComputer(backend, idea, hi / 100.0).selections) {
          high.insert(std::to_string(s.span.start) + s.entity.uri);
          EXPECT_GE(s.confidence, hi / 100.0);
        }
        EXPECT_TRUE(std::includes(low.begin(), low.end(), high.begin(), high.end()));
      }
    }
  }
}

}  // namespace
}  // namespace icv
