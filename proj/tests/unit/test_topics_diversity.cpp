#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mission/diversity.hpp"
#include "mission/topics.hpp"

using namespace mission;
using testing::TempDir;
using testing::write_file;

TEST_CASE("catalog parses, serializes and rejects bad lines") {
  const auto c = TopicCatalog::parse("0\tpolitics\n2\tsports\n1\teveryday\n");
  REQUIRE(c.size() == 3);
  CHECK(c.category_of(1) == Category::everyday);
  CHECK(TopicCatalog::parse(c.serialize()).categories() == c.categories());
  CHECK_THROWS_AS(TopicCatalog::parse("0 politics\n"), TopicError);
  CHECK_THROWS_AS(TopicCatalog::parse("0\tmovies\n"), TopicError);
  CHECK_THROWS_AS(TopicCatalog::parse("0\tpolitics\n0\tsports\n"), TopicError);
  CHECK_THROWS_AS(TopicCatalog::parse("0\tpolitics\n2\tsports\n"), TopicError);
  CHECK(TopicCatalog::cyclic(10).category_of(9) == static_cast<Category>(1));
}

TEST_CASE("tpv rows are validated with their row number") {
  const auto ok = parse_tpvs(R"({"tweet_id":"a","probs":[0.2,0.8]})"
                             "\n"
                             R"({"tweet_id":"b","probs":[0.5,0.5004]})"
                             "\n",
                             2);
  CHECK(ok.size() == 2);
  CHECK(ok.at("b")[0] + ok.at("b")[1] == doctest::Approx(1.0).epsilon(1e-15));
  auto row_of = [](const std::string& text) {
    try {
      parse_tpvs(text, 2);
    } catch (const TopicError& e) {
      return e.row();
    }
    return std::size_t{0};
  };
  const std::string good = R"({"tweet_id":"a","probs":[0.2,0.8]})"
                           "\n";
  CHECK(row_of(good + R"({"tweet_id":"b","probs":[0.2,0.2]})") == 2);
  CHECK(row_of(good + R"({"tweet_id":"b","probs":[0.6,0.4]})"
                     "\n"
                     R"({"tweet_id":"c","probs":[0.2]})") == 3);
  CHECK(row_of(good + good) == 2);
  CHECK(row_of(R"({"tweet_id":"c","probs":[-0.2,1.2]})") == 1);
  CHECK(row_of("not json") == 1);
}

TEST_CASE("tpv files round-trip") {
  TempDir dir("tpv");
  TpvMap m{{"x", {0.25, 0.75}}, {"y", {1.0, 0.0}}};
  save_tpvs(m, dir.file("t.jsonl"));
  CHECK(load_tpvs(dir.file("t.jsonl"), 2) == m);
  CHECK(dominant_topic({0.3, 0.3, 0.4}) == 2);
  CHECK(dominant_topic({0.5, 0.5}) == 0);
}

TEST_CASE("entropy group boundaries sit at ln(m + 0.5)") {
  const auto& b = group_boundaries();
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(std::abs(b[i] - std::log(i + 1.5)) < 1e-12);
  CHECK(assign_group(0.0) == Group::I);
  CHECK(assign_group(0.69) == Group::II);
  // 0.91 is ln 2.5 rounded; the exact boundary opens group III
  CHECK(assign_group(std::log(2.5)) == Group::III);
  CHECK(assign_group(0.91) == Group::II);
  CHECK(assign_group(0.92) == Group::III);
  CHECK(assign_group(std::log(1.5)) == Group::II);
  CHECK(assign_group(std::nextafter(std::log(1.5), 0.0)) == Group::I);
  CHECK(assign_group(std::log(8.0)) == Group::VIII);
  CHECK_THROWS_AS(assign_group(-0.1), DiversityError);
  CHECK_THROWS_AS(assign_group(2.1), DiversityError);
}

TEST_CASE("shannon entropy") {
  CHECK(shannon_entropy(std::vector<double>{1.0, 0.0}) == 0.0);
  CHECK(shannon_entropy(std::vector<double>(8, 0.125)) == doctest::Approx(std::log(8.0)));
  CHECK(shannon_entropy(std::vector<double>{0.5, 0.5}) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("cpv counts covered tweets by dominant-topic category") {
  ProfileTimeline tl = testing::timeline("p", 4);
  const auto cat = TopicCatalog::parse("0\tpolitics\n1\tsports\n2\tpolitics\n");
  std::map<std::string, std::size_t> assign{{"p-0", 0}, {"p-1", 1}, {"p-2", 2}};
  const auto cpv = category_probability(tl, cat, assign);
  CHECK(cpv[static_cast<std::size_t>(Category::politics)] == doctest::Approx(2.0 / 3.0));
  CHECK(cpv[static_cast<std::size_t>(Category::sports)] == doctest::Approx(1.0 / 3.0));
  const auto d = diversity_profile(tl, cat, assign);
  CHECK(d.covered_tweets == 3);
  CHECK(d.entropy == doctest::Approx(-(2.0 / 3) * std::log(2.0 / 3) - (1.0 / 3) * std::log(1.0 / 3)));
  CHECK(d.group == Group::II);
  CHECK_THROWS_AS(category_probability(tl, cat, {}), DiversityError);
}

TEST_CASE("group partition and cdf export") {
  std::vector<DiversityProfile> ps(3);
  ps[0] = {"a", {}, 0.8, Group::III, 1};
  ps[1] = {"b", {}, 0.1, Group::I, 1};
  ps[2] = {"c", {}, 0.7, Group::III, 1};
  const auto part = group_partition(ps);
  CHECK(part.total() == 3);
  CHECK(part.members.at(Group::III) == std::vector<std::string>{"a", "c"});
  const auto csv = part.cdf_csv();
  CHECK(csv.find("III,0.7\nIII,0.8") != std::string::npos);
}

TEST_CASE("baseline assigner is deterministic and covers eligible tweets") {
  Corpus c;
  c.profiles["p"] = testing::timeline("p", 12);
  const auto a = baseline_topic_assigner(c, 16, 5);
  const auto b = baseline_topic_assigner(c, 16, 5);
  CHECK(a == b);
  CHECK(a.size() == 12);
  for (const auto& [_, v] : a) {
    double s = 0;
    for (double x : v) s += x;
    CHECK(s == doctest::Approx(1.0));
  }
}

TEST_CASE("topic aggregates take medians of scored tweets") {
  std::map<std::string, std::size_t> assign{{"a", 0}, {"b", 0}, {"c", 0}, {"d", 1}};
  ScoreCache s;
  s.toxicity["a"] = {0.1, "", 0};
  s.toxicity["b"] = {0.5, "", 0};
  s.toxicity["c"] = {0.3, "", 0};
  const auto agg = topic_aggregates(3, assign, s);
  REQUIRE(agg.size() == 3);
  CHECK(*agg[0].median_toxicity == 0.3);
  CHECK(agg[0].tweet_count == 3);
  CHECK_FALSE(agg[1].median_toxicity.has_value());
  CHECK(agg[2].tweet_count == 0);
}
