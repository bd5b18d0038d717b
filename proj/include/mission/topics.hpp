#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mission/corpus.hpp"
#include "mission/scores.hpp"
#include "mission/util.hpp"

namespace mission {

inline constexpr std::size_t kDefaultTopicCount = 200;
inline constexpr double kTpvSumTolerance = 1e-3;

/// The eight thematic categories, in feature-catalog order.
enum class Category : std::uint8_t {
  everyday = 0,
  no_topic,
  news_blogs,
  politics,
  entertainment,
  sports,
  profanity,
  health_covid,
};
inline constexpr std::size_t kCategoryCount = 8;

std::string_view category_name(Category c);
std::optional<Category> category_from_name(std::string_view name);
const std::array<Category, kCategoryCount>& all_categories();

using TopicVector = std::vector<double>;

/// tweet_id -> per-tweet topic distribution (non-negative, sums to 1).
using TpvMap = std::map<std::string, TopicVector>;

class TopicError : public Error {
 public:
  TopicError(const std::string& what, std::size_t row = 0) : Error("topics", what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Topic index -> category map, loaded from `topic_index<TAB>category` lines.
class TopicCatalog {
 public:
  TopicCatalog() = default;
  explicit TopicCatalog(std::vector<Category> category_of);

  /// Cyclic demo assignment: topic i -> category i mod 8.
  static TopicCatalog cyclic(std::size_t k);
  static TopicCatalog load(const std::string& path);
  static TopicCatalog parse(std::string_view text);

  std::string serialize() const;
  void save(const std::string& path) const;

  std::size_t size() const { return category_of_.size(); }
  Category category_of(std::size_t topic) const { return category_of_.at(topic); }
  const std::vector<Category>& categories() const { return category_of_; }

 private:
  std::vector<Category> category_of_;
};

/// Load TPV JSONL rows {"tweet_id", "probs":[K reals]}. Rows whose sum is
/// within kTpvSumTolerance of 1 are renormalized; anything else throws
/// TopicError carrying the 1-based row number.
TpvMap load_tpvs(const std::string& path, std::size_t k);
TpvMap parse_tpvs(std::string_view text, std::size_t k);
void save_tpvs(const TpvMap& tpvs, const std::string& path);
std::string serialize_tpvs(const TpvMap& tpvs);

/// Argmax; ties go to the lowest index.
std::size_t dominant_topic(const TopicVector& tpv);

/// tweet_id -> dominant topic.
std::map<std::string, std::size_t> assign_dominant_topics(const TpvMap& tpvs);

/// Median toxicity of scored tweets assigned to `topic`; nullopt when none.
std::optional<double> topic_median_toxicity(std::size_t topic, const std::map<std::string, std::size_t>& assignments,
                                            const ScoreCache& toxicity);

struct TopicAggregate {
  std::size_t topic = 0;
  std::size_t tweet_count = 0;
  std::optional<double> median_toxicity;
};

std::vector<TopicAggregate> topic_aggregates(std::size_t k, const std::map<std::string, std::size_t>& assignments,
                                             const ScoreCache& toxicity);

/// Deterministic stand-in for an external topic model: each token hashes
/// (with the seed) into one of K buckets and the bucket counts are
/// normalized. Only topic-model-eligible tweets are covered unless
/// `eligible_only` is false.
TpvMap baseline_topic_assigner(const Corpus& corpus, std::size_t k, std::uint64_t seed, bool eligible_only = true);

}  // namespace mission
