#include "mission/scores.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace mission {

using nlohmann::json;

namespace {
constexpr const char* kCacheSchema = "mission-profiler/score-cache";
constexpr int kCacheVersion = 1;

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }
}  // namespace

std::optional<double> ScoreCache::toxicity_of(const std::string& tweet_id) const {
  auto it = toxicity.find(tweet_id);
  if (it == toxicity.end()) return std::nullopt;
  return it->second.score;
}

// ---------------------------------------------------------------------------
// Cache persistence

std::string serialize_score_cache(const ScoreCache& cache) {
  std::string out;
  out += json{{"schema", kCacheSchema}, {"version", kCacheVersion}}.dump() + "\n";
  for (const auto& [id, e] : cache.toxicity)
    out += json{{"kind", "toxicity"}, {"id", id}, {"score", e.score}, {"source", e.source},
                {"fetched_at", e.fetched_at}}.dump() + "\n";
  for (const auto& [id, b] : cache.bots)
    out += json{{"kind", "bot"}, {"id", id}, {"overall", b.overall}, {"spammer", b.spammer},
                {"source", b.source}, {"fetched_at", b.fetched_at}}.dump() + "\n";
  for (const auto& id : cache.missing_toxicity)
    out += json{{"kind", "missing_toxicity"}, {"id", id}}.dump() + "\n";
  for (const auto& id : cache.missing_bots)
    out += json{{"kind", "missing_bot"}, {"id", id}}.dump() + "\n";
  return out;
}

ScoreCache parse_score_cache(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  ScoreCache cache;
  bool header = false;
  auto fail = [&](const std::string& why) {
    throw ScoreError("score cache line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("invalid JSON");
    if (!header) {
      if (j.value("schema", "") != kCacheSchema) fail("missing schema header");
      if (j.value("version", 0) != kCacheVersion) fail("unsupported cache version");
      header = true;
      continue;
    }
    try {
      const auto kind = j.at("kind").get<std::string>();
      const auto id = j.at("id").get<std::string>();
      if (kind == "toxicity") {
        ToxicityEntry e{j.at("score").get<double>(), j.value("source", ""), j.value("fetched_at", std::int64_t{0})};
        if (!in_unit_interval(e.score)) fail("score outside [0,1]");
        cache.toxicity[id] = e;
      } else if (kind == "bot") {
        BotScores b{j.at("overall").get<double>(), j.at("spammer").get<double>(), j.value("source", ""),
                    j.value("fetched_at", std::int64_t{0})};
        if (!in_unit_interval(b.overall) || !in_unit_interval(b.spammer)) fail("score outside [0,1]");
        cache.bots[id] = b;
      } else if (kind == "missing_toxicity") {
        cache.missing_toxicity.insert(id);
      } else if (kind == "missing_bot") {
        cache.missing_bots.insert(id);
      } else {
        fail("unknown entry kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      fail(e.what());
    }
  }
  if (!header && line_no > 0) throw ScoreError("score cache has no header");
  return cache;
}

void save_score_cache(const ScoreCache& cache, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ScoreError("cannot write score cache: " + path);
  os << serialize_score_cache(cache);
}

ScoreCache load_score_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScoreError("cannot read score cache: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_score_cache(ss.str());
}

// ---------------------------------------------------------------------------
// Precomputed score files

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

PrecomputedLoad load_precomputed_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScoreError("cannot read score file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  // A file written by save_score_cache starts with its schema header.
  {
    std::istringstream probe(text);
    std::string first;
    while (std::getline(probe, first) && trim(first).empty()) {
    }
    json j = json::parse(first, nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.contains("schema")) return {parse_score_cache(text), {}};
  }

  PrecomputedLoad out;
  std::istringstream lines(text);
  std::string line;
  std::size_t row = 0;
  bool first_row = true;
  auto reject = [&](const std::string& why) { out.rejected.push_back({row, why}); };
  while (std::getline(lines, line)) {
    ++row;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const bool is_first = first_row;
    first_row = false;
    std::string id;
    std::vector<double> values;
    if (t[0] == '{') {
      json j = json::parse(t, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        reject("invalid JSON");
        continue;
      }
      std::string key = j.contains("tweet_id") ? "tweet_id" : j.contains("profile_id") ? "profile_id" : "id";
      if (!j.contains(key) || !(j[key].is_string() || j[key].is_number_integer())) {
        reject("missing tweet_id/profile_id");
        continue;
      }
      id = j[key].is_string() ? j[key].get<std::string>() : std::to_string(j[key].get<std::int64_t>());
      const bool is_tox = key == "tweet_id" || (key == "id" && j.contains("score"));
      bool ok = true;
      for (const char* field : is_tox ? std::vector<const char*>{"score"}
                                      : std::vector<const char*>{"overall", "spammer"}) {
        if (!j.contains(field) || !j[field].is_number()) {
          ok = false;
          break;
        }
        values.push_back(j[field].get<double>());
      }
      if (!ok) {
        reject("missing numeric score field");
        continue;
      }
    } else {
      auto cols = split_csv(t);
      if (cols.size() != 2 && cols.size() != 3) {
        reject("expected 2 or 3 columns, got " + std::to_string(cols.size()));
        continue;
      }
      bool ok = true;
      for (std::size_t i = 1; i < cols.size(); ++i) {
        auto v = parse_real(cols[i]);
        if (!v) {
          ok = false;
          break;
        }
        values.push_back(*v);
      }
      if (!ok) {
        // A leading header row like "tweet_id,score" is not an error.
        if (is_first) continue;
        reject("non-numeric score");
        continue;
      }
      id = cols[0];
      if (id.empty()) {
        reject("empty id");
        continue;
      }
    }
    if (!std::all_of(values.begin(), values.end(), in_unit_interval)) {
      reject("score outside [0,1]");
      continue;
    }
    if (values.size() == 1) out.cache.toxicity[id] = ToxicityEntry{values[0], "file", 0};
    else out.cache.bots[id] = BotScores{values[0], values[1], "file", 0};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Backends

MockToxicityClient::MockToxicityClient(double constant)
    : fn_([constant](const Tweet&) { return FetchResult{FetchStatus::ok, constant, {}}; }) {}

MockToxicityClient::MockToxicityClient(std::function<FetchResult(const Tweet&)> fn) : fn_(std::move(fn)) {}

FetchResult MockToxicityClient::score(const Tweet& tweet) {
  ++calls_;
  return fn_(tweet);
}

MockBotClient::MockBotClient(double overall, double spammer) : overall_(overall), spammer_(spammer) {}

BotFetchResult MockBotClient::score(const std::string&) {
  ++calls_;
  return {FetchStatus::ok, overall_, spammer_, {}};
}

FileToxicityClient::FileToxicityClient(const std::string& path) {
  auto loaded = load_precomputed_scores(path);
  table_ = std::move(loaded.cache);
}

FetchResult FileToxicityClient::score(const Tweet& tweet) {
  auto v = table_.toxicity_of(tweet.tweet_id);
  if (!v) return {FetchStatus::unavailable, 0.0, "no score for " + tweet.tweet_id};
  return {FetchStatus::ok, *v, {}};
}

FileBotClient::FileBotClient(const std::string& path) {
  auto loaded = load_precomputed_scores(path);
  table_ = std::move(loaded.cache);
}

BotFetchResult FileBotClient::score(const std::string& profile_id) {
  auto it = table_.bots.find(profile_id);
  if (it == table_.bots.end()) return {FetchStatus::unavailable, 0, 0, "no bot score for " + profile_id};
  return {FetchStatus::ok, it->second.overall, it->second.spammer, {}};
}

namespace {

struct ParsedUrl {
  std::string host_port;  // scheme://host:port
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ScoreError("scoring URL needs a scheme: " + url);
  if (url.compare(0, scheme_end, "http") != 0) throw ScoreError("only http:// scoring URLs are supported: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

struct HttpOutcome {
  FetchStatus status;
  json body;
  std::string message;
};

HttpOutcome post_json(const std::string& url, const std::string& token, const json& payload) {
  const auto parts = split_url(url);
  httplib::Client cli(parts.host_port);
  cli.set_connection_timeout(5);
  cli.set_read_timeout(30);
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
  auto res = cli.Post(parts.path, headers, payload.dump(), "application/json");
  if (!res) return {FetchStatus::transient_error, {}, "connection failed: " + httplib::to_string(res.error())};
  if (res->status == 429) return {FetchStatus::quota_exceeded, {}, "quota exceeded"};
  if (res->status >= 500) return {FetchStatus::transient_error, {}, "server error " + std::to_string(res->status)};
  if (res->status != 200) return {FetchStatus::unavailable, {}, "HTTP " + std::to_string(res->status)};
  json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded()) return {FetchStatus::transient_error, {}, "unparseable response body"};
  return {FetchStatus::ok, std::move(body), {}};
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

}  // namespace

HttpToxicityClient::HttpToxicityClient(std::string url, std::string token)
    : url_(std::move(url)), token_(std::move(token)) {
  split_url(url_);
}

std::unique_ptr<HttpToxicityClient> HttpToxicityClient::from_environment() {
  auto url = env_or_empty("MISSION_TOXICITY_URL");
  if (url.empty()) throw ScoreError("MISSION_TOXICITY_URL is not set");
  return std::make_unique<HttpToxicityClient>(url, env_or_empty("MISSION_TOXICITY_TOKEN"));
}

FetchResult HttpToxicityClient::score(const Tweet& tweet) {
  auto r = post_json(url_, token_, json{{"text", tweet.text_raw}});
  if (r.status != FetchStatus::ok) return {r.status, 0.0, r.message};
  const json* v = &r.body;
  if (r.body.is_object()) {
    auto it = r.body.find("score");
    if (it == r.body.end()) return {FetchStatus::transient_error, 0.0, "response lacks 'score'"};
    v = &*it;
  }
  if (!v->is_number() || !in_unit_interval(v->get<double>()))
    return {FetchStatus::transient_error, 0.0, "response score is not a real in [0,1]"};
  return {FetchStatus::ok, v->get<double>(), {}};
}

HttpBotClient::HttpBotClient(std::string url, std::string token) : url_(std::move(url)), token_(std::move(token)) {
  split_url(url_);
}

std::unique_ptr<HttpBotClient> HttpBotClient::from_environment() {
  auto url = env_or_empty("MISSION_BOT_URL");
  if (url.empty()) throw ScoreError("MISSION_BOT_URL is not set");
  return std::make_unique<HttpBotClient>(url, env_or_empty("MISSION_BOT_TOKEN"));
}

BotFetchResult HttpBotClient::score(const std::string& profile_id) {
  auto r = post_json(url_, token_, json{{"profile_id", profile_id}});
  if (r.status != FetchStatus::ok) return {r.status, 0, 0, r.message};
  const auto& b = r.body;
  if (!b.is_object() || !b.contains("overall") || !b.contains("spammer") || !b["overall"].is_number() ||
      !b["spammer"].is_number())
    return {FetchStatus::transient_error, 0, 0, "response lacks overall/spammer"};
  const double o = b["overall"].get<double>(), s = b["spammer"].get<double>();
  if (!in_unit_interval(o) || !in_unit_interval(s)) return {FetchStatus::transient_error, 0, 0, "score out of range"};
  return {FetchStatus::ok, o, s, {}};
}

// ---------------------------------------------------------------------------
// Scoring loop

namespace {

constexpr int kMaxConsecutiveFailures = 25;

class Pacer {
 public:
  explicit Pacer(const ScoringOptions& opt) : opt_(opt) {}

  void before_request() {
    if (opt_.rate_limit <= 0.0) return;
    const auto interval = std::chrono::duration<double>(1.0 / opt_.rate_limit);
    const auto now = std::chrono::steady_clock::now();
    if (started_) {
      const auto elapsed = now - last_;
      if (elapsed < interval)
        sleep(std::chrono::duration_cast<std::chrono::milliseconds>(interval - elapsed));
    }
    started_ = true;
    last_ = std::chrono::steady_clock::now();
  }

  void backoff(int attempt) {
    auto delay = opt_.base_backoff * (1LL << std::min(attempt, 20));
    sleep(std::min<std::chrono::milliseconds>(delay, opt_.max_backoff));
  }

  std::int64_t now_epoch() const {
    if (opt_.now) return opt_.now();
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

 private:
  void sleep(std::chrono::milliseconds d) {
    if (d.count() <= 0) return;
    if (opt_.sleep) opt_.sleep(d);
    else std::this_thread::sleep_for(d);
  }

  const ScoringOptions& opt_;
  bool started_ = false;
  std::chrono::steady_clock::time_point last_{};
};

// Shared retry loop for both score kinds. `fetch` performs one request,
// stores a success into the cache and returns the request status.
template <class Fetch>
ScoringReport run_scoring(const std::vector<std::string>& ids, const std::set<std::string>& already,
                          std::set<std::string>& missing, const ScoringOptions& options, Fetch fetch) {
  ScoringReport report;
  report.unique_ids = ids.size();
  Pacer pacer(options);
  int consecutive_failures = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& id = ids[i];
    if (already.count(id)) {
      ++report.cached;
      continue;
    }
    if (report.quota_exhausted) {
      ++report.missing;
      report.missing_ids.push_back(id);
      missing.insert(id);
      continue;
    }
    bool done = false;
    for (int attempt = 0; attempt <= options.max_retries && !done; ++attempt) {
      if (attempt > 0) pacer.backoff(attempt - 1);
      pacer.before_request();
      ++report.backend_calls;
      const FetchStatus status = fetch(id, pacer.now_epoch());
      if (status == FetchStatus::ok) {
        done = true;
        ++report.fetched;
        missing.erase(id);
        consecutive_failures = 0;
      } else if (status == FetchStatus::quota_exceeded) {
        report.quota_exhausted = true;
        break;
      } else if (status == FetchStatus::unavailable) {
        break;
      }
    }
    if (!done) {
      ++report.missing;
      report.missing_ids.push_back(id);
      missing.insert(id);
      if (!report.quota_exhausted && ++consecutive_failures >= kMaxConsecutiveFailures)
        throw ScoreError("scoring backend unavailable: " + std::to_string(consecutive_failures) +
                         " consecutive ids failed (partial cache kept)");
    }
  }
  return report;
}

}  // namespace

ScoringReport score_toxicity(const Corpus& corpus, ToxicityClient& client, ScoreCache& cache,
                             const ScoringOptions& options) {
  std::vector<const Tweet*> tweets;
  for (const auto& [_, tl] : corpus.profiles)
    for (const auto& t : tl.tweets) tweets.push_back(&t);
  std::vector<std::string> ids;
  std::map<std::string, const Tweet*> by_id;
  for (const auto* t : tweets)
    if (by_id.emplace(t->tweet_id, t).second) ids.push_back(t->tweet_id);

  std::set<std::string> already;
  for (const auto& id : ids)
    if (cache.toxicity.count(id)) already.insert(id);

  const std::string source = client.source_tag();
  return run_scoring(
      ids, already, cache.missing_toxicity, options,
      [&](const std::string& id, std::int64_t now) {
        const auto r = client.score(*by_id.at(id));
        if (r.status == FetchStatus::ok) {
          if (!in_unit_interval(r.score)) return FetchStatus::transient_error;
          cache.toxicity[id] = ToxicityEntry{r.score, source, now};
        }
        return r.status;
      });
}

ScoringReport score_bots(const Corpus& corpus, BotClient& client, ScoreCache& cache, const ScoringOptions& options) {
  std::vector<std::string> ids;
  for (const auto& [pid, _] : corpus.profiles) ids.push_back(pid);
  std::set<std::string> already;
  for (const auto& id : ids)
    if (cache.bots.count(id)) already.insert(id);
  const std::string source = client.source_tag();
  return run_scoring(
      ids, already, cache.missing_bots, options,
      [&](const std::string& id, std::int64_t now) {
        const auto r = client.score(id);
        if (r.status == FetchStatus::ok) {
          if (!in_unit_interval(r.overall) || !in_unit_interval(r.spammer)) return FetchStatus::transient_error;
          cache.bots[id] = BotScores{r.overall, r.spammer, source, now};
        }
        return r.status;
      });
}

BotSummary bot_score_summary(const std::vector<std::string>& group, const ScoreCache& cache) {
  if (group.empty()) throw ScoreError("bot_score_summary: empty group");
  std::vector<double> overall, spammer;
  BotSummary out;
  for (const auto& pid : group) {
    auto it = cache.bots.find(pid);
    if (it == cache.bots.end()) {
      ++out.missing;
      continue;
    }
    overall.push_back(it->second.overall);
    spammer.push_back(it->second.spammer);
  }
  out.present = overall.size();
  if (!overall.empty()) {
    out.overall = MeanStd{mean(overall), population_stddev(overall)};
    out.spammer = MeanStd{mean(spammer), population_stddev(spammer)};
  }
  return out;
}

}  // namespace mission
