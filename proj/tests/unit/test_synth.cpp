#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "mission/diversity.hpp"
#include "mission/metrics.hpp"
#include "mission/synth.hpp"

using namespace mission;

namespace {

SynthSpec small_spec(std::size_t on, std::size_t gen) {
  auto spec = default_synth_spec(on, gen);
  for (auto& a : spec.archetypes) {
    a.tweets_min = 30;
    a.tweets_max = 60;
  }
  return spec;
}

Corpus load_bundle(const SynthBundle& b, const testing::TempDir& dir) {
  b.write(dir.path().string());
  auto corpus = load_timelines(dir.file("tweets.jsonl"), true);
  load_profile_metadata(corpus, dir.file("profiles.jsonl"), true);
  return corpus;
}

std::map<std::string, bool> on_mission_of(const SynthBundle& b) {
  std::map<std::string, bool> out;
  for (const auto& l : b.labels) out[l.profile_id] = l.on_mission;
  return out;
}

// Median toxicity of the archetype's tweets on the topic most of them are about.
double dominant_topic_median(const Corpus& corpus, const SynthBundle& b, const std::map<std::string, std::size_t>& dom,
                             bool on_mission) {
  const auto labels = on_mission_of(b);
  std::map<std::size_t, std::vector<double>> by_topic;
  for (const auto& [pid, tl] : corpus.profiles) {
    if (labels.at(pid) != on_mission) continue;
    for (const auto& t : tl.tweets) {
      auto it = dom.find(t.tweet_id);
      auto tox = b.scores.toxicity_of(t.tweet_id);
      if (it != dom.end() && tox) by_topic[it->second].push_back(*tox);
    }
  }
  std::size_t best = 0, best_n = 0;
  for (const auto& [topic, v] : by_topic)
    if (v.size() > best_n) best = topic, best_n = v.size();
  REQUIRE(best_n > 0);
  return *median(by_topic[best]);
}

}  // namespace

TEST_CASE("same seed gives byte-identical bundles") {
  const auto spec = small_spec(10, 10);
  testing::TempDir a("synth-a"), b("synth-b");
  generate(spec, 7).write(a.path().string());
  generate(spec, 7).write(b.path().string());
  for (const char* f : {"tweets.jsonl", "profiles.jsonl", "tpv.jsonl", "toxicity_cache.jsonl", "bot_cache.jsonl",
                        "catalog.tsv", "labels.csv"}) {
    CAPTURE(f);
    const auto x = testing::read_file(a.file(f));
    CHECK(!x.empty());
    CHECK(x == testing::read_file(b.file(f)));
  }
  testing::TempDir c("synth-c");
  generate(spec, 8).write(c.path().string());
  CHECK(testing::read_file(c.file("tweets.jsonl")) != testing::read_file(a.file("tweets.jsonl")));
}

TEST_CASE("label counts follow the spec") {
  const auto b = generate(small_spec(13, 21), 3);
  std::size_t on = 0;
  for (const auto& l : b.labels) on += l.on_mission ? 1 : 0;
  CHECK(on == 13);
  CHECK(b.labels.size() == 34);
  for (std::size_t i = 1; i < b.labels.size(); ++i) CHECK(b.labels[i - 1].profile_id < b.labels[i].profile_id);

  testing::TempDir dir("synth-labels");
  b.write(dir.path().string());
  const auto loaded = load_labels_csv(dir.file("labels.csv"));
  CHECK(loaded.size() == 34);
  std::size_t on_loaded = 0;
  for (const auto& [_, y] : loaded) on_loaded += y;
  CHECK(on_loaded == 13);
}

TEST_CASE("bundle files are mutually consistent") {
  const auto b = generate(small_spec(8, 8), 11);
  testing::TempDir dir("synth-consistent");
  const auto corpus = load_bundle(b, dir);
  CHECK(corpus.profiles.size() == 16);
  CHECK(corpus.ingest_stats.malformed == 0);
  const auto tpvs = load_tpvs(dir.file("tpv.jsonl"), b.k);
  const auto cache = load_score_cache(dir.file("toxicity_cache.jsonl"));
  const auto bots = load_score_cache(dir.file("bot_cache.jsonl"));
  std::size_t tweets = 0;
  for (const auto& [pid, tl] : corpus.profiles) {
    CHECK(tl.metadata.present);
    CHECK(bots.bots.count(pid) == 1);
    for (const auto& t : tl.tweets) {
      ++tweets;
      CHECK(tpvs.count(t.tweet_id) == 1);
      auto tox = cache.toxicity_of(t.tweet_id);
      REQUIRE(tox.has_value());
      CHECK(*tox >= 0.0);
      CHECK(*tox <= 1.0);
    }
  }
  CHECK(tweets == tpvs.size());
  for (const auto& [id, v] : b.tpvs) {
    REQUIRE(v.size() == b.k);
    double s = 0.0;
    for (double p : v) {
      CHECK(p >= 0.0);
      s += p;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(b.catalog.size() == b.k);
}

TEST_CASE("periodic pattern gives burstiness near -1") {
  SynthSpec spec;
  spec.k = 20;
  ArchetypeSpec a;
  a.name = "clockwork";
  a.n_profiles = 12;
  a.burst_pattern = BurstPattern::periodic;
  a.tweets_min = 40;
  a.tweets_max = 80;
  spec.archetypes.push_back(a);
  const auto b = generate(spec, 5);
  testing::TempDir dir("synth-periodic");
  const auto corpus = load_bundle(b, dir);
  REQUIRE(corpus.profiles.size() == 12);
  for (const auto& [pid, tl] : corpus.profiles) {
    std::vector<std::int64_t> ts;
    for (const auto& t : tl.tweets) ts.push_back(t.timestamp);
    auto r = burstiness(ts);
    REQUIRE(r.has_value());
    CAPTURE(pid);
    CHECK(std::abs(r->b + 1.0) <= 0.05);
  }
}

TEST_CASE("bursty pattern is burstier than poisson") {
  auto spec = small_spec(0, 0);
  spec.archetypes.clear();
  ArchetypeSpec p;
  p.name = "poisson";
  p.n_profiles = 10;
  p.burst_pattern = BurstPattern::poisson;
  ArchetypeSpec q = p;
  q.name = "bursty";
  q.burst_pattern = BurstPattern::bursty;
  spec.archetypes = {p, q};
  const auto b = generate(spec, 9);
  testing::TempDir dir("synth-bursty");
  const auto corpus = load_bundle(b, dir);
  std::map<std::string, std::vector<double>> by_arch;
  for (const auto& l : b.labels) {
    const auto& tl = corpus.profiles.at(l.profile_id);
    std::vector<std::int64_t> ts;
    for (const auto& t : tl.tweets) ts.push_back(t.timestamp);
    by_arch[l.archetype].push_back(burstiness(ts)->b);
  }
  CHECK(mean(by_arch["bursty"]) > mean(by_arch["poisson"]) + 0.2);
  CHECK(std::abs(mean(by_arch["poisson"])) < 0.2);
}

TEST_CASE("on-mission archetype: high mean entropy and a toxic dominant topic") {
  const auto b = generate(default_synth_spec(100, 100), 42);
  testing::TempDir dir("synth-stats");
  const auto corpus = load_bundle(b, dir);
  const auto dom = assign_dominant_topics(b.tpvs);
  const auto labels = on_mission_of(b);

  double h_on = 0.0;
  std::size_t n_on = 0;
  for (const auto& [pid, tl] : corpus.profiles) {
    if (!labels.at(pid)) continue;
    h_on += diversity_profile(tl, b.catalog, dom).entropy;
    ++n_on;
  }
  REQUIRE(n_on == 100);
  h_on /= static_cast<double>(n_on);
  CHECK(assign_group(h_on) >= Group::VI);
  CHECK(h_on >= std::log(5.5));

  const double tox_on = dominant_topic_median(corpus, b, dom, true);
  const double tox_gen = dominant_topic_median(corpus, b, dom, false);
  CHECK(tox_on - tox_gen >= 0.2);
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec empty;
  CHECK_THROWS_AS(generate(empty, 1), SynthError);

  auto spec = small_spec(2, 2);
  spec.k = 7;
  CHECK_THROWS_AS(generate(spec, 1), SynthError);

  spec = small_spec(2, 2);
  spec.archetypes[0].topic_skew = 1.5;
  CHECK_THROWS_AS(generate(spec, 1), SynthError);

  spec = small_spec(2, 2);
  spec.archetypes[0].n_profiles = 0;
  CHECK_THROWS_AS(generate(spec, 1), SynthError);

  spec = small_spec(2, 2);
  spec.archetypes[1].tweets_min = 90;
  spec.archetypes[1].tweets_max = 20;
  CHECK_THROWS_AS(generate(spec, 1), SynthError);

  spec = small_spec(2, 2);
  spec.archetypes[0].mission_topic = 20;
  CHECK_THROWS_AS(generate(spec, 1), SynthError);

  CHECK_THROWS_AS(parse_synth_spec("{not json"), SynthError);
  CHECK_THROWS_AS(parse_synth_spec(R"({"k": 20, "archetypes": [{"name": "x", "hashtag_rate": -1}]})"), SynthError);
}

TEST_CASE("spec text round-trips") {
  const auto spec = default_synth_spec(3, 4);
  const auto text = serialize_synth_spec(spec);
  const auto back = parse_synth_spec(text);
  CHECK(serialize_synth_spec(back) == text);
  REQUIRE(back.archetypes.size() == spec.archetypes.size());
  CHECK(back.archetypes[0].n_profiles + back.archetypes[1].n_profiles == 7);
}
