#include <atomic>
#include <chrono>
#include <thread>

#include <gtest/gtest.h>

#include "optionkb/service.hpp"
#include "support/fixture.hpp"

using namespace optionkb;
using nlohmann::json;

namespace {

std::string fixture_payload() { return rdf::serialize_nquads(testkit::fixture_a_quads()); }

const char* kFixedBudget =
    R"({"template":"fixed-budget","params":{"algorithms":["ALG1"],"problems":[1],"budget":{"point":6}}})";
const char* kFixedTarget =
    R"({"template":"fixed-target","params":{"algorithms":["ALG1"],"problems":[1],"target":0.5}})";
const char* kProvenance = R"({"template":"provenance","params":{"algorithm":"ALG1"}})";

class LiveServer {
 public:
  explicit LiveServer(service::Service& svc) {
    svc.mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(5);
    return c;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(Service, FixedBudgetExample) {
  service::Service svc(testkit::fixture_a_store());
  auto r = svc.query(kFixedBudget);
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = json::parse(r.body);
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0][5], 1.0);
  EXPECT_EQ(j["rows"][1][5], 5.0);
  EXPECT_EQ(r.body, query::to_json(query::run_fixed_budget(
                        testkit::fixture_a_store(),
                        {{std::set<std::string>{"ALG1"}, std::set<std::int64_t>{1}, {}, {}}, query::PointBudget{6}})));
}

TEST(Service, FixedTargetExample) {
  service::Service svc(testkit::fixture_a_store());
  auto r = svc.query(kFixedTarget);
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = json::parse(r.body);
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0][4], 12);
  EXPECT_EQ(j["rows"][1][4], 20);
}

TEST(Service, ProvenanceAndRangeBudget) {
  service::Service svc(testkit::fixture_a_store());
  auto p = svc.query(kProvenance);
  EXPECT_EQ(p.body, R"({"columns":["doi","title","authors","year"],"rows":[["10.1/x","T","A. Author",2016]]})");
  auto r = svc.query(R"({"template":"fixed-budget","params":{"budget":{"lo":2,"hi":12}}})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(json::parse(r.body)["rows"].size(), 3u);
}

TEST(Service, BgpRequest) {
  service::Service svc(testkit::fixture_a_store());
  auto r = svc.query(R"({"bgp":{"patterns":[["?g","?r","option:hasEvent","?ev"],["?g","?ev","option:evaluations","?e"]],
                              "filters":[{"var":"?e","op":"<=","value":5}]}})");
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = json::parse(r.body);
  EXPECT_EQ(j["columns"], json({"g", "r", "ev", "e"}));
  ASSERT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["rows"][1][3], "\"5\"^^<http://www.w3.org/2001/XMLSchema#integer>");
}

TEST(Service, RequestErrors) {
  service::Service svc(testkit::fixture_a_store());
  EXPECT_EQ(svc.query("{}").status, 400);
  EXPECT_EQ(svc.query("{not json").status, 400);
  EXPECT_EQ(svc.query("[]").status, 400);
  EXPECT_EQ(svc.query(R"({"template":"fixed-budget","bgp":{}})").status, 400);
  EXPECT_EQ(svc.query(R"({"template":"nope","params":{}})").status, 400);
  EXPECT_EQ(svc.query(R"({"template":"fixed-budget","params":{}})").status, 400);
  EXPECT_EQ(svc.query(R"({"template":"fixed-budget","params":{"budget":{"point":"6"}}})").status, 400);
  EXPECT_EQ(svc.query(R"({"template":"fixed-budget","params":{"colour":1,"budget":{"point":6}}})").status, 400);
  EXPECT_EQ(svc.query(R"({"bgp":{"patterns":[["?g","?s","?p"]]}})").status, 400);
  // Well-formed but violating query invariants.
  EXPECT_EQ(svc.query(R"({"template":"fixed-budget","params":{"budget":{"lo":5,"hi":4}}})").status, 422);
  EXPECT_EQ(svc.query(R"({"template":"fixed-budget","params":{"problems":[],"budget":{"point":1}}})").status, 422);
  EXPECT_EQ(svc.query(R"({"template":"provenance","params":{}})").status, 422);
  EXPECT_EQ(svc.query(R"({"bgp":{"patterns":[["?g","?s","?p","?o"]],"filters":[{"var":"x","op":"=","value":1}]}})").status,
            422);
  auto body = json::parse(svc.query("{}").body);
  EXPECT_TRUE(body.contains("error"));
  EXPECT_TRUE(body.contains("detail"));
}

TEST(Service, UploadMergeIsIdempotent) {
  service::Service svc;
  auto first = svc.upload(fixture_payload());
  ASSERT_EQ(first.status, 200) << first.body;
  EXPECT_EQ(json::parse(first.body),
            json::parse(R"({"inserted":48,"duplicates":0,"graphs":["urn:option:alg/ALG1"]})"));
  auto answer = svc.query(kFixedBudget).body;
  auto second = json::parse(svc.upload(fixture_payload()).body);
  EXPECT_EQ(second["inserted"], 0);
  EXPECT_EQ(second["duplicates"], 48);
  EXPECT_EQ(svc.query(kFixedBudget).body, answer);
}

TEST(Service, FailedUploadChangesNothing) {
  service::Service svc(testkit::fixture_a_store());
  auto health = svc.health().body;
  auto answer = svc.query(kFixedTarget).body;
  std::string bad =
      "<urn:a> <urn:p> <urn:o> <urn:g2> .\n"
      "<urn:b> <urn:p> <urn:o> <urn:g2> .\n"
      "<urn:c> <urn:p> .\n";
  auto r = svc.upload(bad);
  EXPECT_EQ(r.status, 400);
  auto j = json::parse(r.body);
  EXPECT_EQ(j["line"], 3);
  EXPECT_NE(j["detail"].get<std::string>().find("line 3"), std::string::npos) << r.body;
  EXPECT_EQ(svc.health().body, health);
  EXPECT_EQ(svc.query(kFixedTarget).body, answer);
}

TEST(Service, UploadRejectsWrongMediaTypeAndMode) {
  service::Service svc;
  EXPECT_EQ(svc.upload(fixture_payload(), "merge", "text/plain").status, 415);
  EXPECT_EQ(svc.upload(fixture_payload(), "append").status, 400);
  EXPECT_EQ(svc.upload(fixture_payload(), "merge", "application/n-quads; charset=utf-8").status, 200);
}

TEST(Service, ReplaceGraphsDropsNamedGraphsFirst) {
  service::Service svc(testkit::fixture_a_store());
  svc.upload("<urn:s> <urn:p> <urn:o> <urn:other> .\n");
  auto r = json::parse(svc.upload("<urn:s> <urn:p> <urn:o2> <urn:option:alg/ALG1> .\n", "replace-graphs").body);
  EXPECT_EQ(r["inserted"], 1);
  EXPECT_EQ(json::parse(svc.health().body), json::parse(R"({"quads":2,"graphs":2})"));
}

TEST(Service, ValuesVocabularyHealth) {
  service::Service svc(testkit::fixture_a_store());
  EXPECT_EQ(svc.values("algorithm").body, R"(["ALG1"])");
  EXPECT_EQ(svc.values("instance").body, "[1,2]");
  EXPECT_EQ(svc.values("color").status, 400);
  auto vocab = json::parse(svc.vocabulary().body);
  ASSERT_EQ(vocab.size(), 20u);
  EXPECT_EQ(vocab[0]["curie"], "option:BenchmarkProblem");
  EXPECT_EQ(vocab[0]["kind"], "class");
  EXPECT_EQ(json::parse(svc.health().body), json::parse(R"({"quads":48,"graphs":1})"));
  EXPECT_EQ(service::Service{}.health().body, R"({"graphs":0,"quads":0})");
}

TEST(Service, ParseAddress) {
  EXPECT_EQ(service::parse_address("127.0.0.1:3330"), (std::pair<std::string, int>{"127.0.0.1", 3330}));
  EXPECT_EQ(service::parse_address("localhost"), (std::pair<std::string, int>{"localhost", 3330}));
  EXPECT_THROW(service::parse_address("h:99999"), std::invalid_argument);
}

TEST(ServiceHttp, UploadThenQueryMatchesInProcess) {
  service::Service svc;
  LiveServer live(svc);
  auto cli = live.client();

  auto up = cli.Post("/upload", fixture_payload(), "application/n-quads");
  ASSERT_TRUE(up);
  EXPECT_EQ(up->status, 200);
  EXPECT_EQ(up->get_header_value("Access-Control-Allow-Origin"), "*");

  service::Service direct(testkit::fixture_a_store());
  for (const char* q : {kFixedBudget, kFixedTarget, kProvenance}) {
    auto res = cli.Post("/query", q, "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->body, direct.query(q).body);
  }

  auto again = cli.Post("/upload", fixture_payload(), "application/n-quads");
  ASSERT_TRUE(again);
  EXPECT_EQ(json::parse(again->body)["duplicates"], 48);

  auto health = cli.Get("/health");
  auto bad = cli.Post("/upload", "<urn:a> <urn:p> <urn:o> <urn:g> .\n\n<broken\n", "application/n-quads");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body)["line"], 3);
  EXPECT_EQ(cli.Get("/health")->body, health->body);

  auto values = cli.Get("/values?dimension=algorithm");
  EXPECT_EQ(values->body, R"(["ALG1"])");
  EXPECT_EQ(cli.Get("/values?dimension=color")->status, 400);
  EXPECT_EQ(json::parse(cli.Get("/vocabulary")->body).size(), 20u);
  EXPECT_EQ(cli.Post("/query", "{}", "application/json")->status, 400);
  EXPECT_EQ(cli.Post("/upload", "x", "text/plain")->status, 415);
}

TEST(ServiceHttp, ReplaceModeViaQueryParameter) {
  service::Service svc(testkit::fixture_a_store());
  LiveServer live(svc);
  auto cli = live.client();
  auto res = cli.Post("/upload?mode=replace-graphs", "<urn:s> <urn:p> <urn:o> <urn:option:alg/ALG1> .\n",
                      "application/n-quads");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(cli.Get("/health")->body)["quads"], 1);
}

TEST(ServiceHttp, ConcurrentReadersDuringUploads) {
  service::Service svc;
  LiveServer live(svc);
  std::atomic<bool> stop{false};
  std::atomic<int> bad_answers{0};
  std::vector<std::thread> readers;
  for (int i = 0; i < 4; ++i) {
    readers.emplace_back([&] {
      auto cli = live.client();
      while (!stop) {
        auto res = cli.Post("/query", kFixedBudget, "application/json");
        if (!res || res->status != 200) {
          ++bad_answers;
          continue;
        }
        // Either nothing or the complete fixture, never a partial upload.
        auto rows = json::parse(res->body)["rows"].size();
        if (rows != 0 && rows != 2) ++bad_answers;
      }
    });
  }
  auto cli = live.client();
  for (int i = 0; i < 10; ++i) {
    auto mode = i % 2 ? "/upload?mode=replace-graphs" : "/upload";
    ASSERT_TRUE(cli.Post(mode, fixture_payload(), "application/n-quads"));
  }
  stop = true;
  for (auto& t : readers) t.join();
  EXPECT_EQ(bad_answers, 0);
}

TEST(RwLock, WriterIsNotStarvedByReaders) {
  WriterPreferringMutex m;
  std::atomic<bool> writer_done{false};
  std::atomic<int> readers_after_writer{0};
  m.lock_shared();
  std::thread writer([&] {
    m.lock();
    writer_done = true;
    m.unlock();
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  // A reader arriving while the writer waits queues behind it.
  std::thread late_reader([&] {
    m.lock_shared();
    if (writer_done) ++readers_after_writer;
    m.unlock_shared();
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_FALSE(writer_done);
  m.unlock_shared();
  writer.join();
  late_reader.join();
  EXPECT_TRUE(writer_done);
  EXPECT_EQ(readers_after_writer, 1);
}
