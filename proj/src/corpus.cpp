#include "mission/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <unordered_set>

#include "emoji_table.hpp"
#include "json.hpp"

namespace mission {

using nlohmann::json;

std::size_t Corpus::tweet_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : profiles) n += p.tweets.size();
  return n;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_handle_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char a = s[pos + i];
    if (a >= 'A' && a <= 'Z') a = static_cast<char>(a - 'A' + 'a');
    if (a != prefix[i]) return false;
  }
  return true;
}

// Decode one UTF-8 sequence at `pos`. Returns the code point and its byte
// length; malformed bytes decode as themselves with length 1.
std::pair<char32_t, std::size_t> decode_utf8(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) return {static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2), 3};
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0)
      return {static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3), 4};
  }
  return {b0, 1};
}

std::optional<std::string_view> emoji_alias(char32_t cp) {
  const auto& table = detail::kEmojiAliases;
  auto it = std::lower_bound(table.begin(), table.end(), cp,
                             [](const detail::EmojiAlias& e, char32_t c) { return e.codepoint < c; });
  if (it != table.end() && it->codepoint == cp) return it->alias;
  return std::nullopt;
}

bool is_emoji_modifier(char32_t cp) {
  return cp == 0xFE0F || (cp >= 0x1F3FB && cp <= 0x1F3FF);
}

// Pass 1: URLs -> HTTPURL. A URL runs from its scheme (or "www.") to the
// next ASCII whitespace.
std::string replace_urls(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const bool at_word_start = i == 0 || !is_handle_char(static_cast<unsigned char>(s[i - 1]));
    if (starts_with_ci(s, i, "http://") || starts_with_ci(s, i, "https://") ||
        (at_word_start && starts_with_ci(s, i, "www."))) {
      std::size_t j = i;
      while (j < s.size() && !is_ascii_space(static_cast<unsigned char>(s[j]))) ++j;
      out += kUrlToken;
      i = j;
    } else {
      out += s[i++];
    }
  }
  return out;
}

// Pass 2: @handle -> @USER.
std::string replace_mentions(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '@' && i + 1 < s.size() && is_handle_char(static_cast<unsigned char>(s[i + 1]))) {
      std::size_t j = i + 1;
      while (j < s.size() && is_handle_char(static_cast<unsigned char>(s[j]))) ++j;
      out += kMentionToken;
      i = j;
    } else {
      out += s[i++];
    }
  }
  return out;
}

// Pass 3: known emoji -> :alias:, trailing variation selectors and skin
// tones of a replaced emoji are dropped.
std::string replace_emoji(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto [cp, len] = decode_utf8(s, i);
    if (cp >= 0x80) {
      if (auto alias = emoji_alias(cp)) {
        out += ':';
        out += *alias;
        out += ':';
        i += len;
        while (i < s.size()) {
          auto [next, next_len] = decode_utf8(s, i);
          if (!is_emoji_modifier(next)) break;
          i += next_len;
        }
        continue;
      }
    }
    out.append(s.substr(i, len));
    i += len;
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_ascii_space(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

}  // namespace

std::string normalize_tweet(std::string_view text_raw) {
  return collapse_whitespace(replace_emoji(replace_mentions(replace_urls(text_raw))));
}

std::size_t token_count(std::string_view text_norm) { return split_whitespace(text_norm).size(); }

// ---------------------------------------------------------------------------
// Timestamps

namespace {

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  std::string t = trim(text);
  std::string_view s = t;
  std::int64_t epoch = 0;
  if (parse_int(s, epoch)) return epoch;

  int year, month, day, hour = 0, minute = 0, second = 0;
  if (!parse_fixed(s, 0, 4, year) || s.size() < 10 || s[4] != '-' || !parse_fixed(s, 5, 2, month) ||
      s[7] != '-' || !parse_fixed(s, 8, 2, day))
    return std::nullopt;
  std::size_t pos = 10;
  std::int64_t offset_seconds = 0;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
    if (!parse_fixed(s, pos + 1, 2, hour) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !parse_fixed(s, pos + 4, 2, minute))
      return std::nullopt;
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      if (!parse_fixed(s, pos + 1, 2, second)) return std::nullopt;
      pos += 3;
    }
    if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
      ++pos;
      const std::size_t start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      if (pos == start) return std::nullopt;
    }
    if (pos < s.size()) {
      if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
      } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '+' ? 1 : -1;
        int oh, om = 0;
        if (!parse_fixed(s, pos + 1, 2, oh)) return std::nullopt;
        pos += 3;
        if (pos < s.size() && s[pos] == ':') ++pos;
        if (pos < s.size()) {
          if (!parse_fixed(s, pos, 2, om)) return std::nullopt;
          pos += 2;
        }
        offset_seconds = sign * (oh * 3600 + om * 60);
      } else {
        return std::nullopt;
      }
    }
    if (pos != s.size()) return std::nullopt;
  }
  if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 + second - offset_seconds;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::optional<std::string> id_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  if (it->is_string() && !it->get_ref<const std::string&>().empty()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  if (it->is_number_unsigned()) return std::to_string(it->get<std::uint64_t>());
  return std::nullopt;
}

std::optional<std::vector<std::string>> string_list(const json& j, const char* key, bool& bad) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_array()) {
    bad = true;
    return std::nullopt;
  }
  std::vector<std::string> out;
  for (const auto& e : *it) {
    if (e.is_string()) {
      out.push_back(e.get<std::string>());
    } else if (e.is_number_integer()) {
      out.push_back(std::to_string(e.get<std::int64_t>()));
    } else {
      bad = true;
      return std::nullopt;
    }
  }
  return out;
}

std::optional<Tweet> parse_tweet(const std::string& line, std::string& why) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    why = "invalid JSON object";
    return std::nullopt;
  }
  Tweet t;
  auto tid = id_field(j, "tweet_id");
  auto pid = id_field(j, "profile_id");
  if (!tid || !pid) {
    why = "missing tweet_id or profile_id";
    return std::nullopt;
  }
  t.tweet_id = *tid;
  t.profile_id = *pid;
  auto text = j.find("text");
  if (text == j.end() || !text->is_string()) {
    why = "missing or non-string text";
    return std::nullopt;
  }
  t.text_raw = text->get<std::string>();

  auto created = j.find("created_at");
  std::optional<std::int64_t> ts;
  if (created != j.end()) {
    if (created->is_number_integer()) ts = created->get<std::int64_t>();
    else if (created->is_number_float()) ts = static_cast<std::int64_t>(created->get<double>());
    else if (created->is_string()) ts = parse_timestamp(created->get<std::string>());
  }
  if (!ts || *ts <= 0) {
    why = "missing or invalid created_at";
    return std::nullopt;
  }
  t.timestamp = *ts;

  bool bad = false;
  auto tags = string_list(j, "hashtags", bad);
  auto urls = string_list(j, "urls", bad);
  if (bad) {
    why = "hashtags/urls must be arrays of strings";
    return std::nullopt;
  }
  if (tags) {
    for (auto& h : *tags) {
      std::string_view v = h;
      while (!v.empty() && v.front() == '#') v.remove_prefix(1);
      if (!v.empty()) t.hashtags.push_back(to_lower_ascii(v));
    }
  }
  if (urls) t.urls = std::move(*urls);

  if (auto m = j.find("mentions"); m != j.end() && !m->is_null()) {
    if (!m->is_number_integer() || m->get<std::int64_t>() < 0) {
      why = "mentions must be a non-negative integer";
      return std::nullopt;
    }
    t.mentions_count = m->get<std::int64_t>();
  }

  t.text_norm = normalize_tweet(t.text_raw);
  if (auto rt = j.find("is_retweet"); rt != j.end() && !rt->is_null()) {
    if (!rt->is_boolean()) {
      why = "is_retweet must be boolean";
      return std::nullopt;
    }
    t.is_retweet = rt->get<bool>();
  } else {
    t.is_retweet = t.text_norm.rfind("RT @USER", 0) == 0;
  }
  return t;
}

}  // namespace

Corpus load_timelines(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot read tweets file: " + path, 0);

  Corpus corpus;
  auto& stats = corpus.ingest_stats;
  std::map<std::string, std::vector<Tweet>> buckets;
  std::unordered_set<std::string> seen_ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    ++stats.lines;
    if (trim(line).empty()) {
      ++stats.blank;
      continue;
    }
    std::string why;
    auto tweet = parse_tweet(line, why);
    if (!tweet) {
      if (strict) throw IngestError("line " + std::to_string(line_no) + ": " + why, line_no);
      ++stats.malformed;
      continue;
    }
    // Tweet ids are global, so a repeat anywhere is a duplicate.
    if (!seen_ids.insert(tweet->tweet_id).second) {
      ++stats.duplicate;
      continue;
    }
    buckets[tweet->profile_id].push_back(std::move(*tweet));
  }

  for (auto& [pid, tweets] : buckets) {
    if (tweets.size() < kMinTimelineTweets) {
      stats.dropped_short_tweets += tweets.size();
      ++stats.dropped_short_profiles;
      continue;
    }
    std::sort(tweets.begin(), tweets.end(), [](const Tweet& a, const Tweet& b) {
      return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.tweet_id < b.tweet_id;
    });
    stats.kept += tweets.size();
    ProfileTimeline tl;
    tl.profile_id = pid;
    tl.tweets = std::move(tweets);
    corpus.profiles.emplace(pid, std::move(tl));
  }
  if (stats.malformed > 0)
    corpus.warnings.push_back(std::to_string(stats.malformed) + " malformed tweet lines skipped");
  return corpus;
}

namespace {

bool read_count(const json& j, const char* key, std::int64_t& out, std::string& why) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return true;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
    why = std::string(key) + " must be a non-negative integer";
    return false;
  }
  out = it->get<std::int64_t>();
  return true;
}

bool read_flag(const json& j, const char* key, bool& out, std::string& why) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return true;
  if (!it->is_boolean()) {
    why = std::string(key) + " must be boolean";
    return false;
  }
  out = it->get<bool>();
  return true;
}

std::optional<std::pair<std::string, ProfileMetadata>> parse_metadata(const std::string& line,
                                                                      std::string& why) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    why = "invalid JSON object";
    return std::nullopt;
  }
  auto pid = id_field(j, "profile_id");
  if (!pid) {
    why = "missing profile_id";
    return std::nullopt;
  }
  ProfileMetadata m;
  m.present = true;
  if (!read_count(j, "followers", m.followers, why) || !read_count(j, "following", m.following, why) ||
      !read_count(j, "listed", m.listed, why) || !read_count(j, "statuses", m.statuses, why) ||
      !read_count(j, "favourites", m.favourites, why) ||
      !read_count(j, "withheld_countries", m.withheld_countries, why) ||
      !read_count(j, "description_len", m.description_len, why) ||
      !read_flag(j, "protected", m.is_protected, why) || !read_flag(j, "verified", m.verified, why) ||
      !read_flag(j, "geo_enabled", m.geo_enabled, why) ||
      !read_flag(j, "contributors_enabled", m.contributors_enabled, why) ||
      !read_flag(j, "has_location", m.has_location, why))
    return std::nullopt;

  if (auto it = j.find("created_at"); it != j.end() && !it->is_null()) {
    std::optional<std::int64_t> ts;
    if (it->is_number_integer()) ts = it->get<std::int64_t>();
    else if (it->is_string()) ts = parse_timestamp(it->get<std::string>());
    if (!ts || *ts <= 0) {
      why = "invalid created_at";
      return std::nullopt;
    }
    m.created_at = *ts;
  }
  bool bad = false;
  m.friends_ids = string_list(j, "friends_ids", bad);
  m.retweeted_ids = string_list(j, "retweeted_ids", bad);
  if (bad) {
    why = "friends_ids/retweeted_ids must be arrays";
    return std::nullopt;
  }
  return std::make_pair(*pid, std::move(m));
}

}  // namespace

void load_profile_metadata(Corpus& corpus, const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot read profiles file: " + path, 0);
  auto& stats = corpus.ingest_stats;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++stats.metadata_lines;
    std::string why;
    auto parsed = parse_metadata(line, why);
    if (!parsed) {
      if (strict) throw IngestError("profiles line " + std::to_string(line_no) + ": " + why, line_no);
      ++stats.metadata_malformed;
      continue;
    }
    auto it = corpus.profiles.find(parsed->first);
    if (it == corpus.profiles.end()) {
      ++stats.metadata_unmatched;
      continue;
    }
    auto& tl = it->second;
    const auto& meta = parsed->second;
    if (meta.created_at > 0 && !tl.tweets.empty() && meta.created_at > tl.tweets.back().timestamp) {
      const std::string msg = "profile " + tl.profile_id + ": created_at after its latest tweet";
      if (strict) throw IngestError("profiles line " + std::to_string(line_no) + ": " + msg, line_no);
      ++stats.metadata_inconsistent;
      corpus.warnings.push_back(msg);
    }
    tl.metadata = meta;
  }
}

// ---------------------------------------------------------------------------

std::vector<Tweet> unique_tweets(const ProfileTimeline& timeline) {
  std::vector<Tweet> out;
  std::unordered_set<std::string> seen;
  for (const auto& t : timeline.tweets) {
    if (t.is_retweet) continue;
    if (seen.insert(t.text_norm).second) out.push_back(t);
  }
  return out;
}

std::vector<Tweet> topic_model_eligible(const ProfileTimeline& timeline) {
  auto unique = unique_tweets(timeline);
  std::vector<Tweet> out;
  for (auto& t : unique) {
    const auto n = token_count(t.text_norm);
    if (n >= kMinTopicTokens && n <= kMaxTopicTokens) out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary cache

namespace {

constexpr char kCorpusMagic[8] = {'M', 'P', 'C', 'O', 'R', 'P', 'U', 'S'};
constexpr std::uint32_t kCorpusVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  void u64(std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os_.write(b, 8);
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void boolean(bool v) { os_.put(v ? 1 : 0); }
  void str(const std::string& s) {
    u64(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void strs(const std::vector<std::string>& v) {
    u64(v.size());
    for (const auto& s : v) str(s);
  }
  void opt_strs(const std::optional<std::vector<std::string>>& v) {
    boolean(v.has_value());
    if (v) strs(*v);
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}
  std::uint64_t u64() {
    unsigned char b[8];
    if (!is_.read(reinterpret_cast<char*>(b), 8)) fail();
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  bool boolean() {
    const int c = is_.get();
    if (c != 0 && c != 1) fail();
    return c == 1;
  }
  std::string str() {
    const auto n = u64();
    if (n > (1ULL << 32)) fail();
    std::string s(n, '\0');
    if (n && !is_.read(s.data(), static_cast<std::streamsize>(n))) fail();
    return s;
  }
  std::vector<std::string> strs() {
    const auto n = u64();
    if (n > (1ULL << 32)) fail();
    std::vector<std::string> v;
    v.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) v.push_back(str());
    return v;
  }
  std::optional<std::vector<std::string>> opt_strs() {
    if (!boolean()) return std::nullopt;
    return strs();
  }
  [[noreturn]] void fail() { throw IngestError("corpus cache is truncated or corrupt", 0); }

 private:
  std::istream& is_;
};

}  // namespace

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IngestError("cannot write corpus cache: " + path, 0);
  os.write(kCorpusMagic, sizeof kCorpusMagic);
  Writer w(os);
  w.u64(kCorpusVersion);
  const auto& s = corpus.ingest_stats;
  for (auto v : {s.lines, s.blank, s.malformed, s.duplicate, s.dropped_short_tweets,
                 s.dropped_short_profiles, s.kept, s.metadata_lines, s.metadata_malformed,
                 s.metadata_unmatched, s.metadata_inconsistent})
    w.u64(v);
  w.strs(corpus.warnings);
  w.u64(corpus.profiles.size());
  for (const auto& [pid, tl] : corpus.profiles) {
    w.str(pid);
    const auto& m = tl.metadata;
    w.boolean(m.present);
    for (auto v : {m.followers, m.following, m.listed, m.statuses, m.favourites,
                   m.withheld_countries, m.description_len, m.created_at})
      w.i64(v);
    for (auto v : {m.is_protected, m.verified, m.geo_enabled, m.contributors_enabled, m.has_location})
      w.boolean(v);
    w.opt_strs(m.friends_ids);
    w.opt_strs(m.retweeted_ids);
    w.u64(tl.tweets.size());
    for (const auto& t : tl.tweets) {
      w.str(t.tweet_id);
      w.str(t.text_raw);
      w.str(t.text_norm);
      w.i64(t.timestamp);
      w.boolean(t.is_retweet);
      w.strs(t.hashtags);
      w.strs(t.urls);
      w.i64(t.mentions_count);
    }
  }
  if (!os) throw IngestError("failed writing corpus cache: " + path, 0);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestError("cannot read corpus cache: " + path, 0);
  char magic[8];
  if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kCorpusMagic))
    throw IngestError("not a corpus cache file: " + path, 0);
  Reader r(is);
  const auto version = r.u64();
  if (version != kCorpusVersion)
    throw IngestError("unsupported corpus cache version " + std::to_string(version), 0);
  Corpus c;
  auto& s = c.ingest_stats;
  for (auto* v : {&s.lines, &s.blank, &s.malformed, &s.duplicate, &s.dropped_short_tweets,
                  &s.dropped_short_profiles, &s.kept, &s.metadata_lines, &s.metadata_malformed,
                  &s.metadata_unmatched, &s.metadata_inconsistent})
    *v = r.u64();
  c.warnings = r.strs();
  const auto n_profiles = r.u64();
  for (std::uint64_t i = 0; i < n_profiles; ++i) {
    ProfileTimeline tl;
    tl.profile_id = r.str();
    auto& m = tl.metadata;
    m.present = r.boolean();
    for (auto* v : {&m.followers, &m.following, &m.listed, &m.statuses, &m.favourites,
                    &m.withheld_countries, &m.description_len, &m.created_at})
      *v = r.i64();
    for (auto* v : {&m.is_protected, &m.verified, &m.geo_enabled, &m.contributors_enabled, &m.has_location})
      *v = r.boolean();
    m.friends_ids = r.opt_strs();
    m.retweeted_ids = r.opt_strs();
    const auto n_tweets = r.u64();
    for (std::uint64_t k = 0; k < n_tweets; ++k) {
      Tweet t;
      t.profile_id = tl.profile_id;
      t.tweet_id = r.str();
      t.text_raw = r.str();
      t.text_norm = r.str();
      t.timestamp = r.i64();
      t.is_retweet = r.boolean();
      t.hashtags = r.strs();
      t.urls = r.strs();
      t.mentions_count = r.i64();
      tl.tweets.push_back(std::move(t));
    }
    auto pid = tl.profile_id;
    c.profiles.emplace(std::move(pid), std::move(tl));
  }
  return c;
}

}  // namespace mission
