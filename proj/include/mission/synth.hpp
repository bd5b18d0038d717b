#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mission/corpus.hpp"
#include "mission/scores.hpp"
#include "mission/topics.hpp"

namespace mission {

class SynthError : public Error {
 public:
  explicit SynthError(const std::string& what) : Error("synth", what) {}
};

enum class BurstPattern { periodic, poisson, bursty };

std::string burst_pattern_name(BurstPattern p);
std::optional<BurstPattern> burst_pattern_from_name(const std::string& name);

/// A bounded score distribution given by mean and standard deviation;
/// realized as a Beta distribution.
struct ScoreDist {
  double mean = 0.1;
  double spread = 0.05;
};

struct ArchetypeSpec {
  std::string name;
  bool on_mission = false;
  std::size_t n_profiles = 1;
  /// Probability that a tweet is about the archetype's mission topic; the
  /// rest pick a category uniformly, then a topic within it.
  double topic_skew = 0.0;
  std::size_t mission_topic = 3;
  ScoreDist mission_toxicity{0.6, 0.15};
  ScoreDist background_toxicity{0.1, 0.05};
  BurstPattern burst_pattern = BurstPattern::poisson;
  std::size_t tweets_min = 80;
  std::size_t tweets_max = 200;
  double mean_gap_hours = 12.0;
  double hashtag_rate = 0.2;       // expected hashtags per tweet
  double url_rate = 0.2;           // probability of a link per tweet
  double retweet_rate = 0.15;      // share of the timeline that are retweets
  double retweet_share_rate = 0.1; // retweets drawn from the archetype's shared pool
  double friend_density = 0.02;    // within-archetype follow probability per pair
  double account_age_years_min = 3.0;
  double account_age_years_max = 10.0;
  double followers_median = 800.0;
  double following_median = 400.0;
  double verified_rate = 0.05;
  ScoreDist bot_overall{0.15, 0.08};
  ScoreDist bot_spammer{0.1, 0.05};

  /// Throws SynthError when a rate or range is out of bounds.
  void validate() const;
};

struct SynthSpec {
  std::size_t k = 20;
  std::vector<ArchetypeSpec> archetypes;
};

/// 100 on-mission and 100 genuine profiles over K = 20 topics.
SynthSpec default_synth_spec(std::size_t on_mission = 100, std::size_t genuine = 100);

SynthSpec parse_synth_spec(const std::string& json_text);
SynthSpec load_synth_spec(const std::string& path);
std::string serialize_synth_spec(const SynthSpec& spec);

struct SynthLabel {
  std::string profile_id;
  std::string archetype;
  bool on_mission = false;
};

struct SynthBundle {
  std::size_t k = 0;
  std::string tweets_jsonl;
  std::string profiles_jsonl;
  TpvMap tpvs;
  ScoreCache scores;  // toxicity for every tweet, bot scores for every profile
  TopicCatalog catalog;
  std::vector<SynthLabel> labels;  // sorted by profile id

  std::string labels_csv() const;
  /// tweets.jsonl, profiles.jsonl, tpv.jsonl, toxicity_cache.jsonl,
  /// bot_cache.jsonl, catalog.tsv, labels.csv; creates `dir` if needed.
  void write(const std::string& dir) const;
};

SynthBundle generate(const SynthSpec& spec, std::uint64_t seed);

/// Read labels.csv ("profile_id,label" with on_mission / not_on_mission).
std::map<std::string, int> load_labels_csv(const std::string& path);

}  // namespace mission
