#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"
#include "json.hpp"
#include "mission/scores.hpp"

using namespace mission;
using testing::TempDir;
using testing::write_file;

namespace {

Corpus small_corpus() {
  Corpus c;
  c.profiles["p"] = testing::timeline("p", 10);
  c.profiles["q"] = testing::timeline("q", 10);
  return c;
}

ScoringOptions quiet() {
  ScoringOptions o;
  o.sleep = [](std::chrono::milliseconds) {};
  o.now = [] { return std::int64_t{7}; };
  return o;
}

}  // namespace

TEST_CASE("score cache round-trips byte for byte") {
  ScoreCache c;
  c.toxicity["b"] = {0.25, "file", 3};
  c.toxicity["a"] = {0.5, "http", 4};
  c.bots["p"] = {0.1, 0.2, "mock", 5};
  c.missing_toxicity.insert("z");
  c.missing_bots.insert("q");
  const auto text = serialize_score_cache(c);
  const auto back = parse_score_cache(text);
  CHECK(back == c);
  CHECK(serialize_score_cache(back) == text);
  CHECK(*back.toxicity_of("a") == 0.5);
  CHECK_FALSE(back.toxicity_of("nope").has_value());
  CHECK_THROWS_AS(parse_score_cache("{\"kind\":\"toxicity\"}\n"), ScoreError);
}

TEST_CASE("precomputed scores reject bad rows with row numbers") {
  TempDir dir("pre");
  write_file(dir.file("tox.csv"), "tweet_id,score\nt1,0.5\nt2,1.5\nt3,abc\n\n{\"id\":\"t4\",\"score\":0.1}\n");
  const auto tox = load_precomputed_scores(dir.file("tox.csv"));
  CHECK(tox.cache.toxicity.size() == 2);
  REQUIRE(tox.rejected.size() == 2);
  CHECK(tox.rejected[0].row == 3);
  CHECK(tox.rejected[1].row == 4);

  write_file(dir.file("bot.csv"), "p,0.1,0.2\nq,0.3,-1\n");
  const auto bots = load_precomputed_scores(dir.file("bot.csv"));
  CHECK(bots.cache.bots.size() == 1);
  CHECK(bots.cache.bots.at("p").spammer == 0.2);
  CHECK(bots.rejected.size() == 1);
}

TEST_CASE("transient failures are retried with backoff and cached ids skipped") {
  auto corpus = small_corpus();
  std::map<std::string, int> attempts;
  MockToxicityClient client([&](const Tweet& t) {
    if (++attempts[t.tweet_id] < 3) return FetchResult{FetchStatus::transient_error, 0.0, "flaky"};
    return FetchResult{FetchStatus::ok, 0.3, {}};
  });
  std::vector<std::chrono::milliseconds> sleeps;
  auto opts = quiet();
  opts.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  ScoreCache cache;
  const auto r = score_toxicity(corpus, client, cache, opts);
  CHECK(r.unique_ids == 20);
  CHECK(r.fetched == 20);
  CHECK(r.missing == 0);
  CHECK(r.backend_calls == 60);
  CHECK(cache.toxicity.size() == 20);
  CHECK(cache.toxicity.begin()->second.fetched_at == 7);
  REQUIRE(sleeps.size() >= 2);
  CHECK(sleeps[1] > sleeps[0]);

  const auto again = score_toxicity(corpus, client, cache, opts);
  CHECK(again.cached == 20);
  CHECK(again.backend_calls == 0);
}

TEST_CASE("quota exhaustion stops early and leaves the rest missing") {
  auto corpus = small_corpus();
  int calls = 0;
  MockToxicityClient client([&](const Tweet&) {
    return ++calls <= 5 ? FetchResult{FetchStatus::ok, 0.1, {}} : FetchResult{FetchStatus::quota_exceeded, 0, "429"};
  });
  ScoreCache cache;
  const auto r = score_toxicity(corpus, client, cache, quiet());
  CHECK(r.quota_exhausted);
  CHECK(r.fetched == 5);
  CHECK(r.missing == 15);
  CHECK(cache.missing_toxicity.size() == 15);
}

TEST_CASE("a dead backend aborts instead of marking everything missing") {
  auto corpus = small_corpus();
  corpus.profiles["r"] = testing::timeline("r", 10);
  MockToxicityClient client([](const Tweet&) { return FetchResult{FetchStatus::transient_error, 0, "down"}; });
  ScoreCache cache;
  CHECK_THROWS_AS(score_toxicity(corpus, client, cache, quiet()), ScoreError);
}

TEST_CASE("http clients talk to a local server") {
  httplib::Server server;
  std::string seen_auth;
  server.Post("/tox", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    const auto body = nlohmann::json::parse(req.body);
    const double s = body.at("text").get<std::string>().size() > 20 ? 0.75 : 0.25;
    res.set_content(nlohmann::json{{"score", s}}.dump(), "application/json");
  });
  server.Post("/bot", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"overall":0.4,"spammer":0.6})", "application/json");
  });
  server.Post("/busy", [](const httplib::Request&, httplib::Response& res) { res.status = 429; });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  HttpToxicityClient tox(base + "/tox", "secret");
  const auto ok = tox.score(testing::tweet("p", "1", "a fairly long text body here", 1));
  CHECK(ok.status == FetchStatus::ok);
  CHECK(ok.score == 0.75);
  CHECK(seen_auth == "Bearer secret");

  HttpBotClient bot(base + "/bot", "");
  const auto b = bot.score("p");
  CHECK(b.status == FetchStatus::ok);
  CHECK(b.spammer == 0.6);

  CHECK(HttpToxicityClient(base + "/busy", "").score(testing::tweet("p", "1", "x", 1)).status ==
        FetchStatus::quota_exceeded);
  CHECK(HttpToxicityClient(base + "/broken", "").score(testing::tweet("p", "1", "x", 1)).status ==
        FetchStatus::transient_error);

  auto corpus = small_corpus();
  ScoreCache cache;
  const auto r = score_toxicity(corpus, tox, cache, quiet());
  CHECK(r.fetched == 20);

  server.stop();
  th.join();
  CHECK_THROWS_AS(HttpToxicityClient("https://example.org/x", ""), ScoreError);
}

TEST_CASE("bot summary uses the population standard deviation") {
  ScoreCache c;
  c.bots["a"] = {0.2, 0.0, "", 0};
  c.bots["b"] = {0.4, 1.0, "", 0};
  const auto s = bot_score_summary({"a", "b", "c"}, c);
  REQUIRE(s.overall);
  CHECK(s.overall->mean == doctest::Approx(0.3));
  CHECK(s.overall->stddev == doctest::Approx(0.1));
  CHECK(s.present == 2);
  CHECK(s.missing == 1);
  CHECK_THROWS_AS(bot_score_summary({}, c), ScoreError);
}
