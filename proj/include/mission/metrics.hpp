#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mission/corpus.hpp"
#include "mission/scores.hpp"

namespace mission {

class MetricError : public Error {
 public:
  explicit MetricError(const std::string& what) : Error("metrics", what) {}
};

// ---------------------------------------------------------------------------
// Toxicity concentration

/// Gini index via the sorted O(n log n) form, equal to
/// sum_ij |x_i - x_j| / (2 n^2 mean). Zero for an all-zero input.
/// Throws MetricError on empty input or negative values.
double gini_index(std::span<const double> values);

struct ToxicityMetrics {
  std::optional<double> median;
  std::optional<double> gini;
  std::size_t n_scored = 0;
};

/// Uses only tweets that carry a score; both fields are null when none do.
ToxicityMetrics toxicity_metrics(const ProfileTimeline& timeline, const ScoreCache& scores);

// ---------------------------------------------------------------------------
// Readability

/// Heuristic English syllable count: vowel groups, silent trailing 'e',
/// a small exception table, minimum one per word with letters.
int count_syllables(std::string_view word);

/// Raw counts behind the per-text readability formulas.
struct TextCounts {
  std::size_t words = 0;
  std::size_t sentences = 0;  // runs of . ! ?, minimum 1
  std::size_t syllables = 0;
  std::size_t letters = 0;    // alphanumeric code points
  std::size_t easy_words = 0; // <= 2 syllables
  std::size_t hard_words = 0; // >= 3 syllables
};

TextCounts text_counts(std::string_view text);

double flesch_reading_ease(const TextCounts& c);
double flesch_kincaid_grade(const TextCounts& c);
double automated_readability_index(const TextCounts& c);
double linsear_write(const TextCounts& c);

/// Bidirectional MTLD at TTR threshold 0.72: token count divided by the
/// mean of the forward and backward factor counts (a zero factor count
/// falls back to one). Throws MetricError on empty input.
double mtld(const std::vector<std::string>& tokens, double threshold = 0.72);

/// Word tokens of a normalized text for lexical measures: lowercased,
/// leading/trailing punctuation stripped, tokens without alphanumerics dropped.
std::vector<std::string> lexical_tokens(std::string_view text);

struct LexicalMetrics {
  double flesch_ease = 0.0;
  double flesch_kincaid_grade = 0.0;
  double linsear_write = 0.0;
  double ari = 0.0;
  double lexical_diversity_mtld = 0.0;
  double chars_per_tweet = 0.0;
  double words_per_tweet = 0.0;
  std::size_t n_texts = 0;
};

/// Per-text scores averaged over the non-empty texts; nullopt if none.
std::optional<LexicalMetrics> readability_metrics(const std::vector<std::string>& texts);

// ---------------------------------------------------------------------------
// Activity

/// Finite-size normalized burstiness for a coefficient of variation r over
/// n events.
double normalized_burstiness(double r, std::size_t n_events);

struct Burstiness {
  double b = 0.0;
  double r_cv = 0.0;
  std::size_t n_events = 0;
};

/// nullopt for fewer than three events or a zero mean inter-event time.
std::optional<Burstiness> burstiness(std::span<const std::int64_t> timestamps);

/// floor(gap / 86400) for each consecutive pair, counted.
std::map<std::int64_t, std::size_t> time_delta_histogram(std::span<const std::int64_t> timestamps);

/// Median consecutive gap in (fractional) days; nullopt for < 2 timestamps.
std::optional<double> median_delta_days(std::span<const std::int64_t> timestamps);

struct ActivityMetrics {
  std::size_t n_tweets = 0;
  std::size_t n_unique = 0;
  std::size_t n_retweets = 0;
  std::optional<double> burstiness;
  double r_cv = 0.0;
  std::size_t n_events = 0;
  std::map<std::int64_t, std::size_t> delta_days_hist;
  std::optional<double> median_delta_days;
};

enum class BurstinessMode { profile, dominant_topic };

/// With BurstinessMode::dominant_topic the burstiness series is restricted
/// to tweets of the profile's most frequent dominant topic (`assignments`
/// must then be provided).
ActivityMetrics activity_metrics(const ProfileTimeline& timeline, BurstinessMode mode = BurstinessMode::profile,
                                 const std::map<std::string, std::size_t>* assignments = nullptr);

// ---------------------------------------------------------------------------
// Hashtags, URLs, profile metadata

struct HashtagMetrics {
  std::size_t total_hashtags = 0;
  std::size_t unique_hashtags = 0;
  double hashtags_per_tweet = 0.0;
  std::size_t total_urls = 0;
  std::size_t unique_urls = 0;
  double urls_per_tweet = 0.0;
};

HashtagMetrics hashtag_url_stats(const ProfileTimeline& timeline);

struct ProfileDerived {
  std::optional<double> followers_following_ratio;
  std::optional<double> account_age_days;  // to the latest tweet
  std::optional<int> creation_year;
};

ProfileDerived profile_derived(const ProfileTimeline& timeline);

// ---------------------------------------------------------------------------

struct MetricBundle {
  std::string profile_id;
  ToxicityMetrics toxicity;
  std::optional<LexicalMetrics> lexical;
  ActivityMetrics activity;
  HashtagMetrics hashtags;
  ProfileDerived derived;
};

MetricBundle compute_metrics(const ProfileTimeline& timeline, const ScoreCache& scores,
                             BurstinessMode mode = BurstinessMode::profile,
                             const std::map<std::string, std::size_t>* assignments = nullptr);

}  // namespace mission
