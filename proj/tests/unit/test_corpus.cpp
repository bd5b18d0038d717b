#include <algorithm>

#include "doctest.h"
#include "emoji_table.hpp"
#include "helpers.hpp"
#include "mission/corpus.hpp"

using namespace mission;
using testing::TempDir;
using testing::write_file;

TEST_CASE("emoji alias table is sorted and unique") {
  const auto& t = detail::kEmojiAliases;
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i - 1].codepoint < t[i].codepoint);
  for (const auto& e : t) {
    CHECK_FALSE(e.alias.empty());
    CHECK(e.alias.find(':') == std::string_view::npos);
  }
}

TEST_CASE("normalization replaces mentions, urls and emoji") {
  CHECK(normalize_tweet("hi @bob see https://t.co/xyz now") == "hi @USER see HTTPURL now");
  CHECK(normalize_tweet("  lots   of\t space \n") == "lots of space");
  CHECK(normalize_tweet("hot \xF0\x9F\x94\xA5 take") == "hot :fire: take");
  CHECK(normalize_tweet("www.example.com/path ok") == "HTTPURL ok");
  CHECK(normalize_tweet("RT @someone: text") == "RT @USER: text");
}

TEST_CASE("normalization is idempotent on fuzzed input") {
  const std::vector<std::string> pieces = {"@user_1", "http://a.b/c", "https://x.y", "www.z.org", "word",
                                           "\xF0\x9F\x94\xA5",  "\xF0\x9F\x98\x82", "  ", "\t", "#tag",
                                           ":fire:", "HTTPURL", "@USER", "e@mail.com", "\xC3\xA9t\xC3\xA9", "!"};
  Rng rng(1234);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const auto n = rng.uniform_int(0, 12);
    for (std::int64_t k = 0; k < n; ++k) {
      s += pieces[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pieces.size()) - 1))];
      if (rng.bernoulli(0.5)) s += ' ';
    }
    const auto once = normalize_tweet(s);
    CHECK(normalize_tweet(once) == once);
  }
}

TEST_CASE("timestamps parse in iso and epoch forms") {
  CHECK(parse_timestamp("1970-01-01T00:00:10Z") == 10);
  CHECK(parse_timestamp("2020-01-02T03:04:05Z") == 1577934245);
  CHECK(parse_timestamp("2020-01-02T04:04:05+01:00") == 1577934245);
  CHECK(parse_timestamp("2020-01-02T03:04:05.250Z") == 1577934245);
  CHECK(parse_timestamp("2020-01-02") == 1577923200);
  CHECK(parse_timestamp("1577934245") == 1577934245);
  CHECK_FALSE(parse_timestamp("yesterday").has_value());
  CHECK_FALSE(parse_timestamp("2020-13-01").has_value());
}

namespace {

std::string line(const std::string& id, const std::string& pid, const std::string& text, long ts,
                 const std::string& extra = "") {
  return R"({"tweet_id":")" + id + R"(","profile_id":")" + pid + R"(","text":")" + text +
         R"(","created_at":)" + std::to_string(ts) + extra + "}\n";
}

}  // namespace

TEST_CASE("ingest accounts for every line") {
  TempDir dir("ingest");
  std::string body;
  for (int i = 0; i < 12; ++i) body += line("a" + std::to_string(i), "alice", "hello world " + std::to_string(i), 1000 + i);
  body += line("a3", "alice", "duplicate id", 5000);
  body += line("a3", "bob", "duplicate id elsewhere", 5000);
  for (int i = 0; i < 4; ++i) body += line("b" + std::to_string(i), "bob", "short timeline", 2000 + i);
  body += "\n";
  body += "{not json\n";
  body += R"({"tweet_id":"x","profile_id":"p","text":"no time"})" "\n";
  write_file(dir.file("t.jsonl"), body);

  const auto c = load_timelines(dir.file("t.jsonl"), false);
  const auto& s = c.ingest_stats;
  CHECK(s.lines == 21);
  CHECK(s.blank == 1);
  CHECK(s.malformed == 2);
  CHECK(s.duplicate == 2);
  CHECK(s.dropped_short_tweets == 4);
  CHECK(s.dropped_short_profiles == 1);
  CHECK(s.kept == 12);
  CHECK(s.malformed + s.blank + s.duplicate + s.dropped_short_tweets + s.kept == s.lines);
  REQUIRE(c.profiles.size() == 1);
  const auto& tl = c.profiles.at("alice");
  CHECK(std::is_sorted(tl.tweets.begin(), tl.tweets.end(),
                       [](const Tweet& a, const Tweet& b) { return a.timestamp < b.timestamp; }));
  CHECK_THROWS_AS(load_timelines(dir.file("t.jsonl"), true), IngestError);
  try {
    load_timelines(dir.file("t.jsonl"), true);
  } catch (const IngestError& e) {
    CHECK(e.line() == 20);
  }
  CHECK_THROWS_AS(load_timelines(dir.file("missing.jsonl"), false), IngestError);
}

TEST_CASE("retweet flag falls back to the RT prefix") {
  TempDir dir("rt");
  std::string body;
  for (int i = 0; i < 10; ++i) body += line("t" + std::to_string(i), "p", "RT @x: copy " + std::to_string(i), 100 + i);
  body += line("t10", "p", "RT @x: but flagged false", 200, R"(,"is_retweet":false)");
  write_file(dir.file("t.jsonl"), body);
  const auto c = load_timelines(dir.file("t.jsonl"), true);
  const auto& tweets = c.profiles.at("p").tweets;
  CHECK(std::count_if(tweets.begin(), tweets.end(), [](const Tweet& t) { return t.is_retweet; }) == 10);
}

TEST_CASE("unique and eligible tweets") {
  ProfileTimeline tl;
  tl.profile_id = "p";
  const std::string ten = "one two three four five six seven eight nine ten";
  tl.tweets = {testing::tweet("p", "1", ten, 1), testing::tweet("p", "2", ten, 2),
               testing::tweet("p", "3", "RT @a: " + ten + " x", 3, true), testing::tweet("p", "4", "too short", 4),
               testing::tweet("p", "5", ten + " @alice", 5), testing::tweet("p", "6", ten + " @bob", 6)};
  const auto u = unique_tweets(tl);
  // retweet dropped; "@alice"/"@bob" normalize to the same text
  CHECK(u.size() == 3);
  const auto e = topic_model_eligible(tl);
  CHECK(e.size() == 2);
  CHECK(token_count("a  b c") == 3);
}

TEST_CASE("metadata attaches and the binary cache round-trips") {
  TempDir dir("meta");
  std::string body;
  for (int i = 0; i < 10; ++i) body += line("t" + std::to_string(i), "p", "text " + std::to_string(i), 1'600'000'000 + i);
  write_file(dir.file("t.jsonl"), body);
  write_file(dir.file("m.jsonl"),
             R"({"profile_id":"p","followers":10,"following":20,"verified":true,"created_at":"2015-01-01T00:00:00Z","friends_ids":["q","r"]})"
             "\n"
             R"({"profile_id":"ghost","followers":1})"
             "\n");
  auto c = load_timelines(dir.file("t.jsonl"), false);
  load_profile_metadata(c, dir.file("m.jsonl"), false);
  const auto& m = c.profiles.at("p").metadata;
  CHECK(m.present);
  CHECK(m.followers == 10);
  CHECK(m.verified);
  REQUIRE(m.friends_ids);
  CHECK(m.friends_ids->size() == 2);
  CHECK(c.ingest_stats.metadata_unmatched == 1);

  save_corpus(c, dir.file("c.bin"));
  const auto back = load_corpus(dir.file("c.bin"));
  CHECK(back == c);
  write_file(dir.file("bad.bin"), "garbage");
  CHECK_THROWS(load_corpus(dir.file("bad.bin")));
}
