#include "mission/synth.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mission {

using nlohmann::json;

namespace {

constexpr std::int64_t kEpochStart = 1577836800;  // 2020-01-01T00:00:00Z
constexpr double kFocusConcentration = 6.0;
constexpr double kBackgroundConcentration = 0.05;
constexpr std::size_t kVocabularyPerTopic = 30;
constexpr std::size_t kSharedPoolSize = 20;
constexpr std::size_t kExternalFriendPool = 400;

constexpr std::array<const char*, 3> kPatternNames = {"periodic", "poisson", "bursty"};

constexpr std::array<const char*, 24> kSyllables = {"ka", "lo", "mi", "ren", "tas", "vo", "pel", "dur",
                                                    "sin", "gra", "bo", "fen", "tal", "mur", "zi", "nor",
                                                    "qua", "ber", "lin", "dos", "ve", "rak", "sul", "po"};

constexpr std::array<const char*, 20> kFunctionWords = {"the", "a",    "and",  "to",   "of",   "in",   "is",
                                                        "it",  "that", "for",  "on",   "with", "this", "we",
                                                        "they", "are", "not", "just", "so", "what"};

void check_dist(const ScoreDist& d, const std::string& what) {
  if (!(d.mean > 0.0 && d.mean < 1.0)) throw SynthError(what + ".mean must lie in (0, 1)");
  if (!(d.spread > 0.0) || d.spread * d.spread >= d.mean * (1.0 - d.mean))
    throw SynthError(what + ".spread must be positive and below sqrt(mean (1 - mean))");
}

void check_rate(double v, const std::string& what, double hi = 1.0) {
  if (!(v >= 0.0 && v <= hi)) throw SynthError(what + " must lie in [0, " + format_double(hi) + "]");
}

double sample_score(Rng& rng, const ScoreDist& d) {
  const double kappa = d.mean * (1.0 - d.mean) / (d.spread * d.spread) - 1.0;
  return std::clamp(rng.beta(d.mean * kappa, (1.0 - d.mean) * kappa), 0.0, 1.0);
}

std::string iso8601(std::int64_t epoch) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{epoch}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()) % 24, static_cast<int>(hms.minutes().count()) % 60,
                static_cast<int>(hms.seconds().count()) % 60);
  return buf;
}

std::string padded(std::size_t v, int width) {
  std::string s = std::to_string(v);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

std::string random_token(Rng& rng, std::size_t len) {
  static constexpr std::string_view alnum = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string s;
  for (std::size_t i = 0; i < len; ++i)
    s += alnum[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(alnum.size()) - 1))];
  return s;
}

std::vector<std::vector<std::string>> build_vocabulary(std::size_t k, std::uint64_t seed) {
  std::vector<std::vector<std::string>> vocab(k);
  std::set<std::string> used(kFunctionWords.begin(), kFunctionWords.end());
  for (std::size_t t = 0; t < k; ++t) {
    Rng rng(derive_seed(seed, "vocab", t));
    while (vocab[t].size() < kVocabularyPerTopic) {
      std::string w;
      const auto n = rng.uniform_int(1, 4);
      for (std::int64_t s = 0; s < n; ++s)
        w += kSyllables[static_cast<std::size_t>(rng.uniform_int(0, kSyllables.size() - 1))];
      if (used.insert(w).second) vocab[t].push_back(w);
    }
  }
  return vocab;
}

struct Sentence {
  std::string text;
  std::vector<std::string> hashtags;
  std::vector<std::string> urls;
  std::int64_t mentions = 0;
};

Sentence compose(Rng& rng, const std::vector<std::string>& words, const ArchetypeSpec& a) {
  Sentence s;
  std::vector<std::string> parts;
  if (rng.bernoulli(0.15)) {
    parts.push_back("@" + random_token(rng, 7));
    s.mentions = 1;
  }
  const auto len = rng.uniform_int(10, 24);
  const auto stop = rng.uniform_int(5, len);
  for (std::int64_t i = 0; i < len; ++i) {
    std::string w = rng.bernoulli(0.55)
                        ? words[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(words.size()) - 1))]
                        : kFunctionWords[static_cast<std::size_t>(rng.uniform_int(0, kFunctionWords.size() - 1))];
    if (i == 0 || i == stop) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    if (i + 1 == stop || i + 1 == len) w += rng.bernoulli(0.2) ? "!" : ".";
    parts.push_back(std::move(w));
  }
  if (rng.bernoulli(0.05)) parts.push_back("\xF0\x9F\x94\xA5");
  auto n_tags = static_cast<std::int64_t>(std::floor(a.hashtag_rate));
  if (rng.bernoulli(a.hashtag_rate - std::floor(a.hashtag_rate))) ++n_tags;
  for (std::int64_t i = 0; i < n_tags; ++i) {
    const auto& tag = words[static_cast<std::size_t>(rng.uniform_int(0, 4))];
    parts.push_back("#" + tag);
    s.hashtags.push_back(tag);
  }
  if (rng.bernoulli(a.url_rate)) {
    s.urls.push_back("https://t.co/" + random_token(rng, 10));
    parts.push_back(s.urls.back());
  }
  for (std::size_t i = 0; i < parts.size(); ++i) s.text += (i ? " " : "") + parts[i];
  return s;
}

std::vector<double> sample_tpv(Rng& rng, std::size_t k, std::size_t focus) {
  std::vector<double> alpha(k, kBackgroundConcentration);
  alpha[focus] += kFocusConcentration;
  auto p = rng.dirichlet(alpha);
  // Guard against a background component overtaking the focus topic.
  const auto top = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  if (top != focus) std::swap(p[top], p[focus]);
  return p;
}

std::size_t pick_topic(Rng& rng, const ArchetypeSpec& a, const TopicCatalog& catalog) {
  if (a.topic_skew > 0.0 && rng.bernoulli(a.topic_skew)) return a.mission_topic;
  const auto cat = static_cast<Category>(rng.uniform_int(0, kCategoryCount - 1));
  std::vector<std::size_t> topics;
  for (std::size_t t = 0; t < catalog.size(); ++t)
    if (catalog.category_of(t) == cat) topics.push_back(t);
  if (topics.empty()) return static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(catalog.size()) - 1));
  return topics[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(topics.size()) - 1))];
}

double sample_gap(Rng& rng, BurstPattern p, double mean_seconds) {
  switch (p) {
    case BurstPattern::periodic:
      return mean_seconds * (1.0 + rng.uniform(-0.01, 0.01));
    case BurstPattern::poisson:
      return rng.exponential(1.0 / mean_seconds);
    case BurstPattern::bursty:
      return rng.bernoulli(0.8) ? rng.exponential(1.0 / (0.1 * mean_seconds))
                                : rng.exponential(1.0 / (4.6 * mean_seconds));
  }
  return mean_seconds;
}

json dist_json(const ScoreDist& d) { return {{"mean", d.mean}, {"spread", d.spread}}; }

ScoreDist dist_from(const json& j, const ScoreDist& fallback) {
  if (j.is_null()) return fallback;
  return {j.value("mean", fallback.mean), j.value("spread", fallback.spread)};
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw SynthError("cannot write " + p.string());
  out << content;
}

}  // namespace

std::string burst_pattern_name(BurstPattern p) { return kPatternNames.at(static_cast<std::size_t>(p)); }

std::optional<BurstPattern> burst_pattern_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kPatternNames.size(); ++i)
    if (name == kPatternNames[i]) return static_cast<BurstPattern>(i);
  return std::nullopt;
}

void ArchetypeSpec::validate() const {
  const std::string where = "archetype '" + name + "': ";
  if (name.empty()) throw SynthError("archetype without a name");
  if (n_profiles < 1) throw SynthError(where + "n_profiles must be >= 1");
  check_rate(topic_skew, where + "topic_skew");
  check_rate(hashtag_rate, where + "hashtag_rate", 5.0);
  check_rate(url_rate, where + "url_rate");
  check_rate(retweet_rate, where + "retweet_rate", 0.9);
  check_rate(retweet_share_rate, where + "retweet_share_rate");
  check_rate(friend_density, where + "friend_density");
  check_rate(verified_rate, where + "verified_rate");
  if (tweets_min < 1 || tweets_min > tweets_max || tweets_max > 100000)
    throw SynthError(where + "tweets_per_profile must satisfy 1 <= min <= max <= 100000");
  if (!(mean_gap_hours > 0.0)) throw SynthError(where + "mean_gap_hours must be positive");
  if (!(account_age_years_min >= 0.0 && account_age_years_min <= account_age_years_max))
    throw SynthError(where + "account age range is invalid");
  if (!(followers_median > 0.0 && following_median > 0.0)) throw SynthError(where + "medians must be positive");
  check_dist(mission_toxicity, where + "mission_toxicity");
  check_dist(background_toxicity, where + "background_toxicity");
  check_dist(bot_overall, where + "bot_overall");
  check_dist(bot_spammer, where + "bot_spammer");
}

SynthSpec default_synth_spec(std::size_t on_mission, std::size_t genuine) {
  SynthSpec spec;
  spec.k = 20;
  ArchetypeSpec m;
  m.name = "on_mission";
  m.on_mission = true;
  m.n_profiles = on_mission;
  m.topic_skew = 0.35;
  m.mission_topic = 3;
  m.burst_pattern = BurstPattern::bursty;
  m.hashtag_rate = 0.8;
  m.url_rate = 0.35;
  m.retweet_rate = 0.3;
  m.retweet_share_rate = 0.6;
  m.friend_density = 0.25;
  m.account_age_years_min = 0.5;
  m.account_age_years_max = 3.0;
  m.followers_median = 300.0;
  m.following_median = 900.0;
  m.verified_rate = 0.0;
  m.bot_overall = {0.45, 0.15};
  m.bot_spammer = {0.35, 0.12};

  ArchetypeSpec g;
  g.name = "genuine";
  g.on_mission = false;
  g.n_profiles = genuine;
  g.burst_pattern = BurstPattern::poisson;
  g.retweet_share_rate = 0.05;
  g.account_age_years_min = 3.0;
  g.account_age_years_max = 12.0;

  if (on_mission > 0) spec.archetypes.push_back(m);
  if (genuine > 0) spec.archetypes.push_back(g);
  return spec;
}

SynthSpec parse_synth_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SynthError(std::string("spec is not valid JSON: ") + e.what());
  }
  SynthSpec spec;
  try {
    spec.k = j.value("K", j.value("k", std::size_t{20}));
    for (const auto& a : j.at("archetypes")) {
      ArchetypeSpec s;
      s.name = a.at("name").get<std::string>();
      s.n_profiles = a.at("n_profiles").get<std::size_t>();
      if (a.contains("label")) {
        const auto label = a.at("label").get<std::string>();
        if (label != "on_mission" && label != "not_on_mission")
          throw SynthError("label must be on_mission or not_on_mission");
        s.on_mission = label == "on_mission";
      } else {
        s.on_mission = a.value("on_mission", false);
      }
      s.topic_skew = a.value("topic_skew", s.topic_skew);
      s.mission_topic = a.value("mission_topic", s.mission_topic);
      if (a.contains("toxicity")) {
        s.mission_toxicity = dist_from(a["toxicity"].value("mission", json()), s.mission_toxicity);
        s.background_toxicity = dist_from(a["toxicity"].value("background", json()), s.background_toxicity);
      }
      if (a.contains("burst_pattern")) {
        auto p = burst_pattern_from_name(a.at("burst_pattern").get<std::string>());
        if (!p) throw SynthError("unknown burst_pattern " + a.at("burst_pattern").dump());
        s.burst_pattern = *p;
      }
      if (a.contains("tweets_per_profile")) {
        const auto& r = a.at("tweets_per_profile");
        s.tweets_min = r.at(0).get<std::size_t>();
        s.tweets_max = r.at(1).get<std::size_t>();
      }
      s.mean_gap_hours = a.value("mean_gap_hours", s.mean_gap_hours);
      s.hashtag_rate = a.value("hashtag_rate", s.hashtag_rate);
      s.url_rate = a.value("url_rate", s.url_rate);
      s.retweet_rate = a.value("retweet_rate", s.retweet_rate);
      s.retweet_share_rate = a.value("retweet_share_rate", s.retweet_share_rate);
      s.friend_density = a.value("friend_density", s.friend_density);
      if (a.contains("account_age_years")) {
        s.account_age_years_min = a["account_age_years"].at(0).get<double>();
        s.account_age_years_max = a["account_age_years"].at(1).get<double>();
      }
      s.followers_median = a.value("followers_median", s.followers_median);
      s.following_median = a.value("following_median", s.following_median);
      s.verified_rate = a.value("verified_rate", s.verified_rate);
      if (a.contains("bot")) {
        s.bot_overall = dist_from(a["bot"].value("overall", json()), s.bot_overall);
        s.bot_spammer = dist_from(a["bot"].value("spammer", json()), s.bot_spammer);
      }
      spec.archetypes.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw SynthError(std::string("malformed spec: ") + e.what());
  }
  return spec;
}

SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SynthError("cannot read spec file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_synth_spec(ss.str());
}

std::string serialize_synth_spec(const SynthSpec& spec) {
  json arr = json::array();
  for (const auto& a : spec.archetypes) {
    arr.push_back({{"name", a.name},
                   {"label", a.on_mission ? "on_mission" : "not_on_mission"},
                   {"n_profiles", a.n_profiles},
                   {"topic_skew", a.topic_skew},
                   {"mission_topic", a.mission_topic},
                   {"toxicity", {{"mission", dist_json(a.mission_toxicity)},
                                 {"background", dist_json(a.background_toxicity)}}},
                   {"burst_pattern", burst_pattern_name(a.burst_pattern)},
                   {"tweets_per_profile", {a.tweets_min, a.tweets_max}},
                   {"mean_gap_hours", a.mean_gap_hours},
                   {"hashtag_rate", a.hashtag_rate},
                   {"url_rate", a.url_rate},
                   {"retweet_rate", a.retweet_rate},
                   {"retweet_share_rate", a.retweet_share_rate},
                   {"friend_density", a.friend_density},
                   {"account_age_years", {a.account_age_years_min, a.account_age_years_max}},
                   {"followers_median", a.followers_median},
                   {"following_median", a.following_median},
                   {"verified_rate", a.verified_rate},
                   {"bot", {{"overall", dist_json(a.bot_overall)}, {"spammer", dist_json(a.bot_spammer)}}}});
  }
  return json{{"K", spec.k}, {"archetypes", arr}}.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

SynthBundle generate(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.archetypes.empty()) throw SynthError("spec has no archetypes");
  if (spec.k < kCategoryCount) throw SynthError("K must be at least 8");
  std::set<std::string> names;
  std::size_t total = 0;
  for (const auto& a : spec.archetypes) {
    a.validate();
    if (a.topic_skew > 0.0 && a.mission_topic >= spec.k)
      throw SynthError("archetype '" + a.name + "': mission_topic outside [0, K)");
    if (!names.insert(a.name).second) throw SynthError("duplicate archetype name '" + a.name + "'");
    total += a.n_profiles;
  }

  SynthBundle bundle;
  bundle.k = spec.k;
  bundle.catalog = TopicCatalog::cyclic(spec.k);
  const auto vocab = build_vocabulary(spec.k, seed);

  // Profile ids are a seeded permutation so id order carries no label.
  std::vector<std::size_t> perm(total);
  for (std::size_t i = 0; i < total; ++i) perm[i] = i;
  Rng id_rng(derive_seed(seed, "profile_ids"));
  id_rng.shuffle(perm);
  const int width = std::max<int>(5, static_cast<int>(std::to_string(total).size()));

  std::vector<std::string> profile_lines;
  std::vector<std::pair<std::string, std::string>> tweet_lines;  // (profile id, line)
  std::size_t global = 0;

  for (std::size_t ai = 0; ai < spec.archetypes.size(); ++ai) {
    const auto& a = spec.archetypes[ai];
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < a.n_profiles; ++i) ids.push_back("u" + padded(perm[global + i], width));

    // Shared retweet pool: fixed originals that several members repost.
    Rng pool_rng(derive_seed(seed, "pool", ai));
    struct Original {
      std::string id;
      std::size_t topic;
      Sentence s;
    };
    std::vector<Original> pool;
    for (std::size_t p = 0; p < kSharedPoolSize; ++p) {
      const auto topic = pick_topic(pool_rng, a, bundle.catalog);
      pool.push_back({"o" + padded(ai, 2) + padded(p, 4), topic, compose(pool_rng, vocab[topic], a)});
    }

    Rng friend_rng(derive_seed(seed, "friends", ai));
    std::vector<std::set<std::string>> friends(a.n_profiles);
    for (std::size_t i = 0; i < a.n_profiles; ++i)
      for (std::size_t j = i + 1; j < a.n_profiles; ++j)
        if (friend_rng.bernoulli(a.friend_density)) {
          friends[i].insert(ids[j]);
          friends[j].insert(ids[i]);
        }

    for (std::size_t i = 0; i < a.n_profiles; ++i, ++global) {
      Rng rng(derive_seed(seed, "profile", global));
      const auto& pid = ids[i];
      const auto n = static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(a.tweets_min), static_cast<std::int64_t>(a.tweets_max)));
      double clock = static_cast<double>(kEpochStart) + rng.uniform(0.0, 30.0 * 86400.0);
      const double mean_gap = a.mean_gap_hours * 3600.0;
      std::set<std::string> retweeted;
      std::int64_t first_ts = 0;

      for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) clock += std::max(1.0, sample_gap(rng, a.burst_pattern, mean_gap));
        const auto ts = static_cast<std::int64_t>(std::llround(clock));
        if (t == 0) first_ts = ts;
        const std::string tid = pid + "t" + padded(t, 5);
        std::size_t topic;
        Sentence s;
        bool is_rt = rng.bernoulli(a.retweet_rate);
        if (is_rt) {
          if (rng.bernoulli(a.retweet_share_rate)) {
            const auto& o = pool[static_cast<std::size_t>(rng.uniform_int(0, kSharedPoolSize - 1))];
            topic = o.topic;
            s = o.s;
            retweeted.insert(o.id);
          } else {
            topic = pick_topic(rng, a, bundle.catalog);
            s = compose(rng, vocab[topic], a);
            retweeted.insert("x" + pid + padded(t, 5));
          }
          s.text = "RT @" + random_token(rng, 6) + ": " + s.text;
          ++s.mentions;
        } else {
          topic = pick_topic(rng, a, bundle.catalog);
          s = compose(rng, vocab[topic], a);
        }
        const bool mission_tweet = a.topic_skew > 0.0 && topic == a.mission_topic;
        const double tox = sample_score(rng, mission_tweet ? a.mission_toxicity : a.background_toxicity);
        bundle.tpvs[tid] = sample_tpv(rng, spec.k, topic);
        bundle.scores.toxicity[tid] = ToxicityEntry{tox, "synth", 0};

        json line = {{"tweet_id", tid},   {"profile_id", pid},      {"text", s.text},
                     {"created_at", iso8601(ts)}, {"hashtags", s.hashtags}, {"urls", s.urls},
                     {"mentions", s.mentions},    {"is_retweet", is_rt}};
        tweet_lines.emplace_back(pid, line.dump());
      }

      const double age_years = rng.uniform(a.account_age_years_min, a.account_age_years_max);
      const auto created = first_ts - static_cast<std::int64_t>(age_years * 365.25 * 86400.0);
      const auto followers = static_cast<std::int64_t>(std::llround(a.followers_median * std::exp(0.8 * rng.normal())));
      const auto following = static_cast<std::int64_t>(std::llround(a.following_median * std::exp(0.6 * rng.normal())));
      std::vector<std::string> friend_list(friends[i].begin(), friends[i].end());
      const auto externals = rng.uniform_int(10, 40);
      for (std::int64_t e = 0; e < externals; ++e)
        friend_list.push_back("ext" + padded(static_cast<std::size_t>(rng.uniform_int(0, kExternalFriendPool - 1)), 4));
      std::sort(friend_list.begin(), friend_list.end());
      friend_list.erase(std::unique(friend_list.begin(), friend_list.end()), friend_list.end());

      json meta = {{"profile_id", pid},
                   {"followers", followers},
                   {"following", following},
                   {"listed", followers / 50},
                   {"statuses", static_cast<std::int64_t>(n) * rng.uniform_int(5, 50)},
                   {"favourites", static_cast<std::int64_t>(std::llround(2000.0 * std::exp(rng.normal())))},
                   {"protected", false},
                   {"verified", rng.bernoulli(a.verified_rate)},
                   {"geo_enabled", rng.bernoulli(0.2)},
                   {"contributors_enabled", false},
                   {"withheld_countries", 0},
                   {"has_location", rng.bernoulli(0.6)},
                   {"description_len", rng.uniform_int(0, 160)},
                   {"created_at", iso8601(created)},
                   {"friends_ids", friend_list},
                   {"retweeted_ids", std::vector<std::string>(retweeted.begin(), retweeted.end())}};
      profile_lines.push_back(meta.dump());

      bundle.scores.bots[pid] = BotScores{sample_score(rng, a.bot_overall), sample_score(rng, a.bot_spammer), "synth", 0};
      bundle.labels.push_back({pid, a.name, a.on_mission});
    }
  }

  std::sort(profile_lines.begin(), profile_lines.end());
  std::stable_sort(tweet_lines.begin(), tweet_lines.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  for (const auto& l : profile_lines) bundle.profiles_jsonl += l + "\n";
  for (const auto& [_, l] : tweet_lines) bundle.tweets_jsonl += l + "\n";
  std::sort(bundle.labels.begin(), bundle.labels.end(),
            [](const auto& x, const auto& y) { return x.profile_id < y.profile_id; });
  return bundle;
}

std::string SynthBundle::labels_csv() const {
  std::string out = "profile_id,label\n";
  for (const auto& l : labels) out += l.profile_id + "," + (l.on_mission ? "on_mission" : "not_on_mission") + "\n";
  return out;
}

void SynthBundle::write(const std::string& dir) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw SynthError("cannot create " + dir + ": " + ec.message());
  const fs::path d(dir);
  write_file(d / "tweets.jsonl", tweets_jsonl);
  write_file(d / "profiles.jsonl", profiles_jsonl);
  write_file(d / "tpv.jsonl", serialize_tpvs(tpvs));
  ScoreCache tox, bots;
  tox.toxicity = scores.toxicity;
  bots.bots = scores.bots;
  write_file(d / "toxicity_cache.jsonl", serialize_score_cache(tox));
  write_file(d / "bot_cache.jsonl", serialize_score_cache(bots));
  write_file(d / "catalog.tsv", catalog.serialize());
  write_file(d / "labels.csv", labels_csv());
}

std::map<std::string, int> load_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("classify", "cannot read labels file " + path);
  std::map<std::string, int> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos)
      throw Error("classify", "labels line " + std::to_string(row) + ": expected profile_id,label");
    const auto id = trim(t.substr(0, comma));
    const auto label = to_lower_ascii(trim(t.substr(comma + 1)));
    if (row == 1 && id == "profile_id") continue;
    int v;
    if (label == "on_mission" || label == "1") v = 1;
    else if (label == "not_on_mission" || label == "0") v = 0;
    else throw Error("classify", "labels line " + std::to_string(row) + ": unknown label '" + label + "'");
    if (!out.emplace(id, v).second)
      throw Error("classify", "labels line " + std::to_string(row) + ": duplicate profile " + id);
  }
  return out;
}

}  // namespace mission
