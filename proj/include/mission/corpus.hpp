#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mission/util.hpp"

namespace mission {

/// Profiles with fewer tweets than this are dropped at ingest.
inline constexpr std::size_t kMinTimelineTweets = 10;
/// Inclusive whitespace-token bounds for topic-model eligibility.
inline constexpr std::size_t kMinTopicTokens = 10;
inline constexpr std::size_t kMaxTopicTokens = 64;

inline constexpr std::string_view kMentionToken = "@USER";
inline constexpr std::string_view kUrlToken = "HTTPURL";

struct Tweet {
  std::string tweet_id;
  std::string profile_id;
  std::string text_raw;
  std::string text_norm;
  std::int64_t timestamp = 0;  // UTC epoch seconds
  bool is_retweet = false;
  std::vector<std::string> hashtags;  // lowercase, '#'-stripped
  std::vector<std::string> urls;
  std::int64_t mentions_count = 0;

  bool operator==(const Tweet&) const = default;
};

struct ProfileMetadata {
  bool present = false;  // false when no metadata record was ingested
  std::int64_t followers = 0;
  std::int64_t following = 0;
  std::int64_t listed = 0;
  std::int64_t statuses = 0;
  std::int64_t favourites = 0;
  bool is_protected = false;
  bool verified = false;
  bool geo_enabled = false;
  bool contributors_enabled = false;
  std::int64_t withheld_countries = 0;
  bool has_location = false;
  std::int64_t description_len = 0;
  std::int64_t created_at = 0;  // 0 = unknown
  std::optional<std::vector<std::string>> friends_ids;
  std::optional<std::vector<std::string>> retweeted_ids;

  bool operator==(const ProfileMetadata&) const = default;
};

struct ProfileTimeline {
  std::string profile_id;
  std::vector<Tweet> tweets;  // ascending timestamp, ties by tweet_id
  ProfileMetadata metadata;

  bool operator==(const ProfileTimeline&) const = default;
};

/// Per-line accounting of an ingest run.
/// malformed + blank + duplicate + dropped_short_tweets + kept == lines.
struct IngestStats {
  std::uint64_t lines = 0;
  std::uint64_t blank = 0;
  std::uint64_t malformed = 0;
  std::uint64_t duplicate = 0;
  std::uint64_t dropped_short_tweets = 0;
  std::uint64_t dropped_short_profiles = 0;
  std::uint64_t kept = 0;
  std::uint64_t metadata_lines = 0;
  std::uint64_t metadata_malformed = 0;
  std::uint64_t metadata_unmatched = 0;
  std::uint64_t metadata_inconsistent = 0;

  bool operator==(const IngestStats&) const = default;
};

struct Corpus {
  std::map<std::string, ProfileTimeline> profiles;
  IngestStats ingest_stats;
  std::vector<std::string> warnings;

  bool operator==(const Corpus&) const = default;
  std::size_t tweet_count() const;
};

/// Raised on unreadable input or, in strict mode, on the first schema
/// violation. `line()` is 1-based, 0 when not line-specific.
class IngestError : public Error {
 public:
  IngestError(const std::string& what, std::size_t line)
      : Error("ingest", what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Replace @-mentions with "@USER", URLs with "HTTPURL", known emoji with
/// ":alias:", collapse whitespace runs and trim. Idempotent.
std::string normalize_tweet(std::string_view text_raw);

/// Parse ISO-8601 ("2020-01-02T03:04:05Z", optional fraction and +hh:mm
/// offset, or a bare date) or an integer epoch string. nullopt if invalid.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

/// Parse tweets JSONL. Profiles below kMinTimelineTweets are dropped.
Corpus load_timelines(const std::string& path, bool strict);

/// Attach profile metadata JSONL (keyed by profile_id) to an ingested corpus.
void load_profile_metadata(Corpus& corpus, const std::string& path, bool strict);

/// Retweets removed, then first occurrence of each distinct text_norm kept.
std::vector<Tweet> unique_tweets(const ProfileTimeline& timeline);

/// Unique non-retweets with kMinTopicTokens <= tokens <= kMaxTopicTokens.
std::vector<Tweet> topic_model_eligible(const ProfileTimeline& timeline);

std::size_t token_count(std::string_view text_norm);

/// Versioned binary cache of an ingested corpus.
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

}  // namespace mission
