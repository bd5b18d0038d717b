#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mission/corpus.hpp"
#include "mission/util.hpp"

namespace mission {

struct ToxicityEntry {
  double score = 0.0;
  std::string source;
  std::int64_t fetched_at = 0;  // epoch seconds, 0 if unknown

  bool operator==(const ToxicityEntry&) const = default;
};

struct BotScores {
  double overall = 0.0;
  double spammer = 0.0;
  std::string source;
  std::int64_t fetched_at = 0;

  bool operator==(const BotScores&) const = default;
};

/// Persistent store of per-tweet toxicity and per-profile bot scores.
/// Serialized as JSONL with a schema header line; ids are written in sorted
/// order so load followed by save is byte-stable.
struct ScoreCache {
  std::map<std::string, ToxicityEntry> toxicity;
  std::map<std::string, BotScores> bots;
  std::set<std::string> missing_toxicity;
  std::set<std::string> missing_bots;

  std::optional<double> toxicity_of(const std::string& tweet_id) const;
  bool operator==(const ScoreCache&) const = default;
};

class ScoreError : public Error {
 public:
  explicit ScoreError(const std::string& what) : Error("score", what) {}
};

void save_score_cache(const ScoreCache& cache, const std::string& path);
ScoreCache load_score_cache(const std::string& path);
std::string serialize_score_cache(const ScoreCache& cache);
ScoreCache parse_score_cache(const std::string& text);

struct RejectedRow {
  std::size_t row = 0;  // 1-based line number
  std::string reason;
};

struct PrecomputedLoad {
  ScoreCache cache;
  std::vector<RejectedRow> rejected;
};

/// Load "id,score" (toxicity) or "id,overall,spammer" (bot) CSV rows, JSONL
/// rows with the same fields, or a file written by save_score_cache.
/// Out-of-range and malformed rows are reported, not loaded.
PrecomputedLoad load_precomputed_scores(const std::string& path);

// ---------------------------------------------------------------------------
// Scoring backends

enum class FetchStatus { ok, transient_error, quota_exceeded, unavailable };

struct FetchResult {
  FetchStatus status = FetchStatus::ok;
  double score = 0.0;
  std::string message;
};

class ToxicityClient {
 public:
  virtual ~ToxicityClient() = default;
  virtual FetchResult score(const Tweet& tweet) = 0;
  virtual std::string source_tag() const = 0;
};

struct BotFetchResult {
  FetchStatus status = FetchStatus::ok;
  double overall = 0.0;
  double spammer = 0.0;
  std::string message;
};

class BotClient {
 public:
  virtual ~BotClient() = default;
  virtual BotFetchResult score(const std::string& profile_id) = 0;
  virtual std::string source_tag() const = 0;
};

/// Returns a fixed score or delegates to a callback; counts calls.
class MockToxicityClient : public ToxicityClient {
 public:
  explicit MockToxicityClient(double constant);
  explicit MockToxicityClient(std::function<FetchResult(const Tweet&)> fn);
  FetchResult score(const Tweet& tweet) override;
  std::string source_tag() const override { return "mock"; }
  std::size_t calls() const { return calls_; }

 private:
  std::function<FetchResult(const Tweet&)> fn_;
  std::size_t calls_ = 0;
};

class MockBotClient : public BotClient {
 public:
  MockBotClient(double overall, double spammer);
  BotFetchResult score(const std::string& profile_id) override;
  std::string source_tag() const override { return "mock"; }
  std::size_t calls() const { return calls_; }

 private:
  double overall_, spammer_;
  std::size_t calls_ = 0;
};

/// Serves scores from a precomputed file; unknown ids are `unavailable`.
class FileToxicityClient : public ToxicityClient {
 public:
  explicit FileToxicityClient(const std::string& path);
  FetchResult score(const Tweet& tweet) override;
  std::string source_tag() const override { return "file"; }

 private:
  ScoreCache table_;
};

class FileBotClient : public BotClient {
 public:
  explicit FileBotClient(const std::string& path);
  BotFetchResult score(const std::string& profile_id) override;
  std::string source_tag() const override { return "file"; }

 private:
  ScoreCache table_;
};

/// POSTs one text per request to `url` (http://host:port/path) and reads a
/// JSON body {"score": x} or a bare number. 429 maps to quota_exceeded,
/// 5xx and connection errors to transient_error.
class HttpToxicityClient : public ToxicityClient {
 public:
  HttpToxicityClient(std::string url, std::string token);
  /// Reads MISSION_TOXICITY_URL and MISSION_TOXICITY_TOKEN.
  static std::unique_ptr<HttpToxicityClient> from_environment();
  FetchResult score(const Tweet& tweet) override;
  std::string source_tag() const override { return "http"; }

 private:
  std::string url_, token_;
};

/// POSTs {"profile_id": ...} and reads {"overall": x, "spammer": y}.
class HttpBotClient : public BotClient {
 public:
  HttpBotClient(std::string url, std::string token);
  /// Reads MISSION_BOT_URL and MISSION_BOT_TOKEN.
  static std::unique_ptr<HttpBotClient> from_environment();
  BotFetchResult score(const std::string& profile_id) override;
  std::string source_tag() const override { return "http"; }

 private:
  std::string url_, token_;
};

struct ScoringOptions {
  double rate_limit = 0.0;  // requests per second, <= 0 for unlimited
  int max_retries = 3;
  std::chrono::milliseconds base_backoff{200};
  std::chrono::milliseconds max_backoff{10'000};
  /// Injected for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
  /// Timestamp written into fetched entries; defaults to wall clock.
  std::function<std::int64_t()> now;
};

struct ScoringReport {
  std::size_t unique_ids = 0;
  std::size_t cached = 0;
  std::size_t fetched = 0;
  std::size_t missing = 0;
  std::size_t backend_calls = 0;
  bool quota_exhausted = false;  // stopped early; rerun to resume
  std::vector<std::string> missing_ids;
};

/// Score every tweet of the corpus, skipping ids already cached. Failed
/// ids are retried with exponential backoff, then recorded as missing.
ScoringReport score_toxicity(const Corpus& corpus, ToxicityClient& client, ScoreCache& cache,
                             const ScoringOptions& options = {});

ScoringReport score_bots(const Corpus& corpus, BotClient& client, ScoreCache& cache,
                         const ScoringOptions& options = {});

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

struct BotSummary {
  std::optional<MeanStd> overall;
  std::optional<MeanStd> spammer;
  std::size_t present = 0;
  std::size_t missing = 0;
};

/// Mean and population standard deviation of bot scores over a group.
/// Throws ScoreError on an empty group.
BotSummary bot_score_summary(const std::vector<std::string>& group, const ScoreCache& cache);

}  // namespace mission
