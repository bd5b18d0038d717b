#include "mission/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace mission {

double gini_index(std::span<const double> values) {
  if (values.empty()) throw MetricError("gini_index of an empty list");
  std::vector<double> x(values.begin(), values.end());
  double total = 0.0;
  for (double v : x) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw MetricError("gini_index requires finite non-negative values");
    total += v;
  }
  if (total == 0.0) return 0.0;
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * x[i];
  return weighted / (n * total);
}

ToxicityMetrics toxicity_metrics(const ProfileTimeline& timeline, const ScoreCache& scores) {
  std::vector<double> values;
  for (const auto& t : timeline.tweets)
    if (auto s = scores.toxicity_of(t.tweet_id)) values.push_back(*s);
  ToxicityMetrics m;
  m.n_scored = values.size();
  if (values.empty()) return m;
  m.gini = gini_index(values);
  m.median = median(std::move(values));
  return m;
}

// ---------------------------------------------------------------------------
// Readability

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; }

bool is_alnum_ascii(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Words the vowel-group rule gets wrong.
const std::unordered_map<std::string, int>& syllable_exceptions() {
  static const std::unordered_map<std::string, int> table = {
      {"the", 1},     {"people", 2},   {"business", 2}, {"every", 2},   {"being", 2},  {"create", 2},
      {"created", 3}, {"idea", 3},     {"area", 3},     {"poem", 2},    {"quiet", 2},  {"science", 2},
      {"covid", 2},   {"maybe", 2},    {"recipe", 3},   {"simile", 3},  {"video", 3},  {"radio", 3},
      {"lion", 2},    {"ruin", 2},     {"via", 2},      {"media", 3},   {"naive", 2},  {"fuel", 2},
  };
  return table;
}

bool has_alnum(std::string_view s) {
  for (unsigned char c : s)
    if (is_alnum_ascii(c) || c >= 0x80) return true;
  return false;
}

}  // namespace

int count_syllables(std::string_view word) {
  std::string w;
  for (unsigned char c : word)
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) w += static_cast<char>(c | 0x20);
  if (w.empty()) return 1;
  if (auto it = syllable_exceptions().find(w); it != syllable_exceptions().end()) return it->second;

  int count = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    // A leading 'y' is a consonant.
    const bool v = is_vowel(w[i]) && !(i == 0 && w[i] == 'y');
    if (v && !prev_vowel) ++count;
    prev_vowel = v;
  }
  const std::size_t n = w.size();
  auto consonant_at = [&](std::size_t i) { return !is_vowel(w[i]); };
  if (count > 1 && n >= 2 && w[n - 1] == 'e' && !is_vowel(w[n - 2])) {
    const bool syllabic_le = w[n - 2] == 'l' && n >= 3 && consonant_at(n - 3);
    if (!syllabic_le) --count;
  } else if (count > 1 && n >= 3 && w[n - 2] == 'e' && w[n - 1] == 'd' && w[n - 3] != 't' && w[n - 3] != 'd' &&
             consonant_at(n - 3)) {
    --count;
  } else if (count > 1 && n >= 3 && w[n - 2] == 'e' && w[n - 1] == 's' && consonant_at(n - 3)) {
    const char p = w[n - 3];
    if (p != 's' && p != 'x' && p != 'z' && p != 'c' && p != 'g' && p != 'h') --count;
  }
  return std::max(count, 1);
}

TextCounts text_counts(std::string_view text) {
  TextCounts c;
  for (const auto& tok : split_whitespace(text)) {
    if (!has_alnum(tok)) continue;
    ++c.words;
    const int syl = count_syllables(tok);
    c.syllables += static_cast<std::size_t>(syl);
    if (syl >= 3) ++c.hard_words;
    else ++c.easy_words;
  }
  bool in_run = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto ch = static_cast<unsigned char>(text[i]);
    const bool terminal = ch == '.' || ch == '!' || ch == '?';
    if (terminal && !in_run) ++c.sentences;
    in_run = terminal;
    if (is_alnum_ascii(ch) || (ch >= 0x80 && (ch & 0xC0) != 0x80)) ++c.letters;
  }
  c.sentences = std::max<std::size_t>(c.sentences, 1);
  return c;
}

double flesch_reading_ease(const TextCounts& c) {
  const double w = static_cast<double>(c.words), s = static_cast<double>(c.sentences);
  return 206.835 - 1.015 * (w / s) - 84.6 * (static_cast<double>(c.syllables) / w);
}

double flesch_kincaid_grade(const TextCounts& c) {
  const double w = static_cast<double>(c.words), s = static_cast<double>(c.sentences);
  return 0.39 * (w / s) + 11.8 * (static_cast<double>(c.syllables) / w) - 15.59;
}

double automated_readability_index(const TextCounts& c) {
  const double w = static_cast<double>(c.words), s = static_cast<double>(c.sentences);
  return 4.71 * (static_cast<double>(c.letters) / w) + 0.5 * (w / s) - 21.43;
}

double linsear_write(const TextCounts& c) {
  const double r = (static_cast<double>(c.easy_words) + 3.0 * static_cast<double>(c.hard_words)) /
                   static_cast<double>(c.sentences);
  return r > 20.0 ? r / 2.0 : r / 2.0 - 1.0;
}

namespace {

double mtld_factors(const std::vector<std::string>& tokens, bool reverse, double threshold) {
  std::unordered_set<std::string> types;
  std::size_t count = 0;
  double factors = 0.0;
  double ttr = 1.0;
  const std::size_t n = tokens.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& tok = tokens[reverse ? n - 1 - k : k];
    ++count;
    types.insert(tok);
    ttr = static_cast<double>(types.size()) / static_cast<double>(count);
    if (ttr <= threshold) {
      factors += 1.0;
      types.clear();
      count = 0;
      ttr = 1.0;
    }
  }
  if (count > 0) factors += (1.0 - ttr) / (1.0 - threshold);
  return factors;
}

}  // namespace

double mtld(const std::vector<std::string>& tokens, double threshold) {
  if (tokens.empty()) throw MetricError("mtld of an empty token list");
  const double f = 0.5 * (mtld_factors(tokens, false, threshold) + mtld_factors(tokens, true, threshold));
  return static_cast<double>(tokens.size()) / (f > 0.0 ? f : 1.0);
}

std::vector<std::string> lexical_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& tok : split_whitespace(text)) {
    std::size_t b = 0, e = tok.size();
    while (b < e && !is_alnum_ascii(static_cast<unsigned char>(tok[b])) && static_cast<unsigned char>(tok[b]) < 0x80) ++b;
    while (e > b && !is_alnum_ascii(static_cast<unsigned char>(tok[e - 1])) &&
           static_cast<unsigned char>(tok[e - 1]) < 0x80)
      --e;
    if (e > b) out.push_back(to_lower_ascii(std::string_view(tok).substr(b, e - b)));
  }
  return out;
}

std::optional<LexicalMetrics> readability_metrics(const std::vector<std::string>& texts) {
  LexicalMetrics m;
  for (const auto& text : texts) {
    const auto c = text_counts(text);
    if (c.words == 0) continue;
    ++m.n_texts;
    m.flesch_ease += flesch_reading_ease(c);
    m.flesch_kincaid_grade += flesch_kincaid_grade(c);
    m.ari += automated_readability_index(c);
    m.linsear_write += linsear_write(c);
    m.lexical_diversity_mtld += mtld(lexical_tokens(text));
    m.chars_per_tweet += static_cast<double>(utf8_length(text));
    m.words_per_tweet += static_cast<double>(split_whitespace(text).size());
  }
  if (m.n_texts == 0) return std::nullopt;
  const auto n = static_cast<double>(m.n_texts);
  for (double* v : {&m.flesch_ease, &m.flesch_kincaid_grade, &m.ari, &m.linsear_write, &m.lexical_diversity_mtld,
                    &m.chars_per_tweet, &m.words_per_tweet})
    *v /= n;
  return m;
}

// ---------------------------------------------------------------------------
// Activity

double normalized_burstiness(double r, std::size_t n_events) {
  const double a = std::sqrt(static_cast<double>(n_events) + 1.0);
  const double b = std::sqrt(static_cast<double>(n_events) - 1.0);
  return (a * r - b) / ((a - 2.0) * r + b);
}

std::optional<Burstiness> burstiness(std::span<const std::int64_t> timestamps) {
  if (timestamps.size() < 3) return std::nullopt;
  std::vector<double> gaps;
  gaps.reserve(timestamps.size() - 1);
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    gaps.push_back(static_cast<double>(timestamps[i] - timestamps[i - 1]));
  const double mu = mean(gaps);
  if (!(mu > 0.0)) return std::nullopt;
  const double r = population_stddev(gaps) / mu;
  const double b = std::clamp(normalized_burstiness(r, timestamps.size()), -1.0, 1.0);
  return Burstiness{b, r, timestamps.size()};
}

std::map<std::int64_t, std::size_t> time_delta_histogram(std::span<const std::int64_t> timestamps) {
  std::map<std::int64_t, std::size_t> hist;
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    const std::int64_t gap = timestamps[i] - timestamps[i - 1];
    // floor division for (unexpected) negative gaps as well
    std::int64_t days = gap / 86400;
    if (gap % 86400 != 0 && gap < 0) --days;
    ++hist[days];
  }
  return hist;
}

std::optional<double> median_delta_days(std::span<const std::int64_t> timestamps) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    gaps.push_back(static_cast<double>(timestamps[i] - timestamps[i - 1]) / 86400.0);
  return median(std::move(gaps));
}

ActivityMetrics activity_metrics(const ProfileTimeline& timeline, BurstinessMode mode,
                                 const std::map<std::string, std::size_t>* assignments) {
  ActivityMetrics a;
  a.n_tweets = timeline.tweets.size();
  a.n_unique = unique_tweets(timeline).size();
  std::vector<std::int64_t> ts;
  ts.reserve(timeline.tweets.size());
  for (const auto& t : timeline.tweets) {
    if (t.is_retweet) ++a.n_retweets;
    ts.push_back(t.timestamp);
  }
  a.delta_days_hist = time_delta_histogram(ts);
  a.median_delta_days = median_delta_days(ts);

  std::vector<std::int64_t> series = ts;
  if (mode == BurstinessMode::dominant_topic) {
    if (!assignments) throw MetricError("dominant-topic burstiness needs topic assignments");
    std::map<std::size_t, std::size_t> per_topic;
    for (const auto& t : timeline.tweets)
      if (auto it = assignments->find(t.tweet_id); it != assignments->end()) ++per_topic[it->second];
    series.clear();
    if (!per_topic.empty()) {
      const auto top = std::max_element(per_topic.begin(), per_topic.end(), [](const auto& x, const auto& y) {
                         return x.second < y.second;
                       })->first;
      for (const auto& t : timeline.tweets)
        if (auto it = assignments->find(t.tweet_id); it != assignments->end() && it->second == top)
          series.push_back(t.timestamp);
    }
  }
  if (auto b = burstiness(series)) {
    a.burstiness = b->b;
    a.r_cv = b->r_cv;
    a.n_events = b->n_events;
  } else {
    a.n_events = series.size();
  }
  return a;
}

// ---------------------------------------------------------------------------

HashtagMetrics hashtag_url_stats(const ProfileTimeline& timeline) {
  HashtagMetrics h;
  std::set<std::string> tags, urls;
  for (const auto& t : timeline.tweets) {
    h.total_hashtags += t.hashtags.size();
    for (const auto& tag : t.hashtags) tags.insert(to_lower_ascii(tag));
    h.total_urls += t.urls.size();
    for (const auto& u : t.urls) urls.insert(to_lower_ascii(u));
  }
  h.unique_hashtags = tags.size();
  h.unique_urls = urls.size();
  if (!timeline.tweets.empty()) {
    const auto n = static_cast<double>(timeline.tweets.size());
    h.hashtags_per_tweet = static_cast<double>(h.total_hashtags) / n;
    h.urls_per_tweet = static_cast<double>(h.total_urls) / n;
  }
  return h;
}

ProfileDerived profile_derived(const ProfileTimeline& timeline) {
  ProfileDerived d;
  const auto& m = timeline.metadata;
  if (!m.present) return d;
  if (m.following > 0) d.followers_following_ratio = static_cast<double>(m.followers) / static_cast<double>(m.following);
  if (m.created_at > 0) {
    using namespace std::chrono;
    const sys_days day{days{m.created_at / 86400}};
    d.creation_year = static_cast<int>(year_month_day{day}.year());
    if (!timeline.tweets.empty())
      d.account_age_days = static_cast<double>(timeline.tweets.back().timestamp - m.created_at) / 86400.0;
  }
  return d;
}

MetricBundle compute_metrics(const ProfileTimeline& timeline, const ScoreCache& scores, BurstinessMode mode,
                             const std::map<std::string, std::size_t>* assignments) {
  MetricBundle b;
  b.profile_id = timeline.profile_id;
  b.toxicity = toxicity_metrics(timeline, scores);
  std::vector<std::string> texts;
  texts.reserve(timeline.tweets.size());
  for (const auto& t : timeline.tweets) texts.push_back(t.text_norm);
  b.lexical = readability_metrics(texts);
  b.activity = activity_metrics(timeline, mode, assignments);
  b.hashtags = hashtag_url_stats(timeline);
  b.derived = profile_derived(timeline);
  return b;
}

}  // namespace mission
