#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mission/corpus.hpp"
#include "mission/topics.hpp"

namespace mission {

class DetectError : public Error {
 public:
  explicit DetectError(const std::string& what) : Error("detect", what) {}
};

inline constexpr double kGlobalAverageEpsilon = 1e-12;

enum class NtpvNormalization {
  per_profile,  // sum of all tweet TPVs / number of profiles
  per_tweet,    // sum of all tweet TPVs / number of tweets
};

struct GlobalAverage {
  std::vector<double> values;
  std::size_t zero_entries_replaced = 0;
};

/// Elementwise sum of every TPV divided by `denominator` (profile count, or
/// tweet count for the per-tweet variant). Zero entries become
/// kGlobalAverageEpsilon and are counted.
GlobalAverage global_topic_average(const TpvMap& tpvs, std::size_t denominator);

/// Profile mean TPV divided elementwise by the global average.
std::vector<double> ntpv(const std::vector<const TopicVector*>& profile_tpvs, const std::vector<double>& global_avg);

struct TopicLabel {
  std::string profile_id;
  std::size_t topic = 0;
  Category category = Category::no_topic;
  std::optional<double> median_toxicity;
};

/// TPVs of each profile's tweets that appear in `tpvs`, keyed by profile.
std::map<std::string, std::vector<const TopicVector*>> profile_tpvs(const Corpus& corpus, const TpvMap& tpvs);

/// argmax of each profile's nTPV (ties to the lowest index), decorated with
/// the topic's category and median toxicity.
std::vector<TopicLabel> topic_labels(const std::map<std::string, std::vector<const TopicVector*>>& per_profile,
                                     const std::vector<double>& global_avg, const TopicCatalog& catalog,
                                     const std::vector<TopicAggregate>& aggregates);

/// Toxicity gate: either a percentile of all non-null topic medians or an
/// absolute value.
struct ToxicityGate {
  enum class Kind { percentile, absolute } kind = Kind::percentile;
  double value = 75.0;

  static ToxicityGate parse(const std::string& spec);  // "p75" or "0.14"
  std::string to_string() const;
  double threshold(const std::vector<TopicAggregate>& aggregates) const;
};

struct OverlapEvidence {
  std::optional<double> friend_overlap;        // fraction of member pairs that are friends
  std::optional<double> shared_retweet_ratio;  // fraction of members sharing a retweet id
};

struct PairStatistics {
  std::string a, b;
  bool friends = false;
  std::size_t shared_friends = 0;
};

OverlapEvidence overlap_evidence(const std::vector<std::string>& members, const Corpus& corpus);
std::vector<PairStatistics> pair_statistics(const std::vector<std::string>& members, const Corpus& corpus);

struct TopGaps {
  double gap12 = 0.0;
  double gap23 = 0.0;
};

/// Differences between the three largest entries; nullopt when fewer than
/// three entries are non-zero.
std::optional<TopGaps> top3_gap(const std::vector<double>& values);

struct Cluster {
  std::size_t id = 0;
  std::size_t topic = 0;
  std::vector<std::string> members;  // sorted
  std::optional<double> topic_median_toxicity;
  bool on_mission = false;
  OverlapEvidence overlap;
};

struct MissionEvidence {
  std::size_t cluster_size = 0;
  std::optional<double> topic_median_tox;
  std::optional<double> friend_overlap;
  std::optional<double> shared_retweet_ratio;
  std::optional<TopGaps> top3_gaps;
};

struct MissionDesignation {
  std::string profile_id;
  bool on_mission = false;
  std::optional<std::size_t> cluster_id;  // set for clusters of size >= min_cluster
  std::size_t topic_label = 0;
  MissionEvidence evidence;
};

struct DetectionConfig {
  std::size_t min_cluster = 3;
  ToxicityGate gate;
};

struct DetectionResult {
  double threshold = 0.0;
  std::vector<Cluster> clusters;  // every shared label, largest first
  std::vector<MissionDesignation> designations;  // sorted by profile id
  std::size_t on_mission_count() const;
};

/// Profiles sharing a topic label form a cluster; a cluster is on-mission
/// when its size reaches `min_cluster` and its label's median toxicity
/// reaches the gate threshold. `corpus` and `topic_shares` supply optional
/// overlap and top-3 evidence.
DetectionResult detect_clusters(const std::vector<TopicLabel>& group_labels,
                                const std::vector<TopicAggregate>& aggregates, const DetectionConfig& config,
                                const Corpus* corpus = nullptr,
                                const std::map<std::string, std::vector<double>>* topic_shares = nullptr);

/// Per-profile share of TPV-covered tweets per dominant topic (length K).
std::map<std::string, std::vector<double>> topic_shares(const Corpus& corpus,
                                                        const std::map<std::string, std::size_t>& assignments,
                                                        std::size_t k);

// ---------------------------------------------------------------------------

struct AgreementReport {
  double kappa = 0.0;
  std::size_t n_items = 0;
  std::size_t n_raters = 0;
  std::size_t n_categories = 0;
};

/// Fleiss' kappa over an items x raters matrix of category labels. Every
/// item needs the same number (>= 2) of ratings. When expected agreement is
/// 1 (a single category used throughout) kappa is reported as 1.
AgreementReport fleiss_kappa(const std::vector<std::vector<std::string>>& ratings);

/// Read ratings CSV: one item per line, one rater per column. A first line
/// starting with "item" or "rater" is a header; after an "item" header the
/// first column holds item ids and is dropped.
std::vector<std::vector<std::string>> load_ratings_csv(const std::string& path);

}  // namespace mission
