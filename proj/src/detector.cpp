#include "mission/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_map>

namespace mission {

GlobalAverage global_topic_average(const TpvMap& tpvs, std::size_t denominator) {
  if (tpvs.empty()) throw DetectError("global_topic_average: no TPVs");
  if (denominator == 0) throw DetectError("global_topic_average: zero denominator");
  const std::size_t k = tpvs.begin()->second.size();
  GlobalAverage g;
  g.values.assign(k, 0.0);
  for (const auto& [id, v] : tpvs) {
    if (v.size() != k) throw DetectError("TPV " + id + " has inconsistent dimension");
    for (std::size_t i = 0; i < k; ++i) g.values[i] += v[i];
  }
  for (auto& x : g.values) {
    x /= static_cast<double>(denominator);
    if (x <= 0.0) {
      x = kGlobalAverageEpsilon;
      ++g.zero_entries_replaced;
    }
  }
  return g;
}

std::vector<double> ntpv(const std::vector<const TopicVector*>& profile_tpvs, const std::vector<double>& global_avg) {
  if (profile_tpvs.empty()) throw DetectError("ntpv: profile has no TPVs");
  const std::size_t k = global_avg.size();
  std::vector<double> out(k, 0.0);
  for (const auto* v : profile_tpvs) {
    if (v->size() != k) throw DetectError("ntpv: dimension mismatch");
    for (std::size_t i = 0; i < k; ++i) out[i] += (*v)[i];
  }
  const auto n = static_cast<double>(profile_tpvs.size());
  for (std::size_t i = 0; i < k; ++i) out[i] = (out[i] / n) / global_avg[i];
  return out;
}

std::map<std::string, std::vector<const TopicVector*>> profile_tpvs(const Corpus& corpus, const TpvMap& tpvs) {
  std::map<std::string, std::vector<const TopicVector*>> out;
  for (const auto& [pid, tl] : corpus.profiles) {
    std::vector<const TopicVector*> v;
    for (const auto& t : tl.tweets)
      if (auto it = tpvs.find(t.tweet_id); it != tpvs.end()) v.push_back(&it->second);
    if (!v.empty()) out.emplace(pid, std::move(v));
  }
  return out;
}

std::vector<TopicLabel> topic_labels(const std::map<std::string, std::vector<const TopicVector*>>& per_profile,
                                     const std::vector<double>& global_avg, const TopicCatalog& catalog,
                                     const std::vector<TopicAggregate>& aggregates) {
  std::vector<TopicLabel> out;
  out.reserve(per_profile.size());
  for (const auto& [pid, tpvs] : per_profile) {
    const auto n = ntpv(tpvs, global_avg);
    TopicLabel l;
    l.profile_id = pid;
    l.topic = dominant_topic(n);
    if (l.topic < catalog.size()) l.category = catalog.category_of(l.topic);
    if (l.topic < aggregates.size()) l.median_toxicity = aggregates[l.topic].median_toxicity;
    out.push_back(std::move(l));
  }
  return out;
}

// ---------------------------------------------------------------------------

ToxicityGate ToxicityGate::parse(const std::string& spec) {
  ToxicityGate g;
  const auto s = trim(spec);
  try {
    std::size_t used = 0;
    if (!s.empty() && (s[0] == 'p' || s[0] == 'P')) {
      g.kind = Kind::percentile;
      g.value = std::stod(s.substr(1), &used);
      if (used != s.size() - 1 || g.value < 0.0 || g.value > 100.0) throw std::invalid_argument(s);
    } else {
      g.kind = Kind::absolute;
      g.value = std::stod(s, &used);
      if (used != s.size() || g.value < 0.0 || g.value > 1.0) throw std::invalid_argument(s);
    }
  } catch (const std::exception&) {
    throw DetectError("toxicity gate must be pNN (percentile) or a value in [0,1]: '" + spec + "'");
  }
  return g;
}

std::string ToxicityGate::to_string() const {
  const std::string v = value == std::floor(value) && std::abs(value) < 1e15
                            ? std::to_string(static_cast<long long>(value))
                            : format_double(value);
  return kind == Kind::percentile ? "p" + v : v;
}

double ToxicityGate::threshold(const std::vector<TopicAggregate>& aggregates) const {
  if (kind == Kind::absolute) return value;
  std::vector<double> medians;
  for (const auto& a : aggregates)
    if (a.median_toxicity) medians.push_back(*a.median_toxicity);
  if (medians.empty()) return std::numeric_limits<double>::infinity();
  return *quantile(std::move(medians), value / 100.0);
}

// ---------------------------------------------------------------------------

namespace {

const ProfileMetadata* metadata_of(const Corpus& corpus, const std::string& pid) {
  auto it = corpus.profiles.find(pid);
  return it == corpus.profiles.end() ? nullptr : &it->second.metadata;
}

bool lists(const ProfileMetadata* m, const std::string& other) {
  if (!m || !m->friends_ids) return false;
  return std::find(m->friends_ids->begin(), m->friends_ids->end(), other) != m->friends_ids->end();
}

}  // namespace

std::vector<PairStatistics> pair_statistics(const std::vector<std::string>& members, const Corpus& corpus) {
  std::vector<PairStatistics> out;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const auto* a = metadata_of(corpus, members[i]);
      const auto* b = metadata_of(corpus, members[j]);
      PairStatistics p{members[i], members[j], lists(a, members[j]) || lists(b, members[i]), 0};
      if (a && b && a->friends_ids && b->friends_ids) {
        std::set<std::string> fa(a->friends_ids->begin(), a->friends_ids->end());
        std::set<std::string> fb(b->friends_ids->begin(), b->friends_ids->end());
        std::vector<std::string> common;
        std::set_intersection(fa.begin(), fa.end(), fb.begin(), fb.end(), std::back_inserter(common));
        p.shared_friends = common.size();
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

OverlapEvidence overlap_evidence(const std::vector<std::string>& members, const Corpus& corpus) {
  OverlapEvidence e;
  bool any_friends = false, any_retweets = false;
  for (const auto& m : members) {
    const auto* md = metadata_of(corpus, m);
    if (md && md->friends_ids) any_friends = true;
    if (md && md->retweeted_ids) any_retweets = true;
  }
  if (any_friends && members.size() >= 2) {
    std::size_t pairs = 0, linked = 0;
    for (const auto& p : pair_statistics(members, corpus)) {
      ++pairs;
      if (p.friends) ++linked;
    }
    e.friend_overlap = static_cast<double>(linked) / static_cast<double>(pairs);
  }
  if (any_retweets && !members.empty()) {
    // retweet id -> number of distinct members retweeting it
    std::unordered_map<std::string, std::size_t> holders;
    for (const auto& m : members) {
      const auto* md = metadata_of(corpus, m);
      if (!md || !md->retweeted_ids) continue;
      std::set<std::string> mine(md->retweeted_ids->begin(), md->retweeted_ids->end());
      for (const auto& id : mine) ++holders[id];
    }
    std::size_t sharing = 0;
    for (const auto& m : members) {
      const auto* md = metadata_of(corpus, m);
      if (!md || !md->retweeted_ids) continue;
      const bool shares = std::any_of(md->retweeted_ids->begin(), md->retweeted_ids->end(),
                                      [&](const std::string& id) { return holders[id] >= 2; });
      if (shares) ++sharing;
    }
    e.shared_retweet_ratio = static_cast<double>(sharing) / static_cast<double>(members.size());
  }
  return e;
}

std::optional<TopGaps> top3_gap(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values)
    if (x > 0.0) v.push_back(x);
  if (v.size() < 3) return std::nullopt;
  std::partial_sort(v.begin(), v.begin() + 3, v.end(), std::greater<>());
  return TopGaps{v[0] - v[1], v[1] - v[2]};
}

std::map<std::string, std::vector<double>> topic_shares(const Corpus& corpus,
                                                        const std::map<std::string, std::size_t>& assignments,
                                                        std::size_t k) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [pid, tl] : corpus.profiles) {
    std::vector<double> counts(k, 0.0);
    std::size_t n = 0;
    for (const auto& t : tl.tweets) {
      auto it = assignments.find(t.tweet_id);
      if (it == assignments.end() || it->second >= k) continue;
      counts[it->second] += 1.0;
      ++n;
    }
    if (n == 0) continue;
    for (auto& c : counts) c /= static_cast<double>(n);
    out.emplace(pid, std::move(counts));
  }
  return out;
}

std::size_t DetectionResult::on_mission_count() const {
  return static_cast<std::size_t>(
      std::count_if(designations.begin(), designations.end(), [](const auto& d) { return d.on_mission; }));
}

DetectionResult detect_clusters(const std::vector<TopicLabel>& group_labels,
                                const std::vector<TopicAggregate>& aggregates, const DetectionConfig& config,
                                const Corpus* corpus, const std::map<std::string, std::vector<double>>* shares) {
  if (group_labels.empty()) throw DetectError("detect_clusters: empty group");
  DetectionResult result;
  result.threshold = config.gate.threshold(aggregates);

  std::map<std::size_t, std::vector<std::string>> by_topic;
  for (const auto& l : group_labels) by_topic[l.topic].push_back(l.profile_id);

  for (auto& [topic, members] : by_topic) {
    std::sort(members.begin(), members.end());
    Cluster c;
    c.topic = topic;
    c.members = members;
    if (topic < aggregates.size()) c.topic_median_toxicity = aggregates[topic].median_toxicity;
    c.on_mission = members.size() >= config.min_cluster && c.topic_median_toxicity &&
                   *c.topic_median_toxicity >= result.threshold;
    if (corpus) c.overlap = overlap_evidence(members, *corpus);
    result.clusters.push_back(std::move(c));
  }
  std::stable_sort(result.clusters.begin(), result.clusters.end(), [](const Cluster& a, const Cluster& b) {
    return a.members.size() != b.members.size() ? a.members.size() > b.members.size() : a.topic < b.topic;
  });
  for (std::size_t i = 0; i < result.clusters.size(); ++i) result.clusters[i].id = i;

  for (const auto& c : result.clusters) {
    for (const auto& pid : c.members) {
      MissionDesignation d;
      d.profile_id = pid;
      d.on_mission = c.on_mission;
      d.topic_label = c.topic;
      if (c.members.size() >= config.min_cluster) d.cluster_id = c.id;
      d.evidence.cluster_size = c.members.size();
      d.evidence.topic_median_tox = c.topic_median_toxicity;
      d.evidence.friend_overlap = c.overlap.friend_overlap;
      d.evidence.shared_retweet_ratio = c.overlap.shared_retweet_ratio;
      if (shares)
        if (auto it = shares->find(pid); it != shares->end()) d.evidence.top3_gaps = top3_gap(it->second);
      result.designations.push_back(std::move(d));
    }
  }
  std::sort(result.designations.begin(), result.designations.end(),
            [](const auto& a, const auto& b) { return a.profile_id < b.profile_id; });
  return result;
}

// ---------------------------------------------------------------------------

AgreementReport fleiss_kappa(const std::vector<std::vector<std::string>>& ratings) {
  if (ratings.empty()) throw DetectError("fleiss_kappa: no items");
  const std::size_t n = ratings.front().size();
  if (n < 2) throw DetectError("fleiss_kappa: need at least two raters per item");
  std::map<std::string, std::size_t> category_index;
  for (const auto& row : ratings) {
    if (row.size() != n) throw DetectError("fleiss_kappa: every item needs the same number of ratings");
    for (const auto& c : row) category_index.emplace(c, 0);
  }
  std::size_t idx = 0;
  for (auto& [_, i] : category_index) i = idx++;
  const std::size_t q = category_index.size();
  const auto N = static_cast<double>(ratings.size());
  const auto nd = static_cast<double>(n);

  std::vector<double> column_totals(q, 0.0);
  double p_bar = 0.0;
  for (const auto& row : ratings) {
    std::vector<double> counts(q, 0.0);
    for (const auto& c : row) counts[category_index[c]] += 1.0;
    double sq = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      sq += counts[j] * counts[j];
      column_totals[j] += counts[j];
    }
    p_bar += (sq - nd) / (nd * (nd - 1.0));
  }
  p_bar /= N;
  double p_e = 0.0;
  for (double t : column_totals) {
    const double p = t / (N * nd);
    p_e += p * p;
  }
  AgreementReport r;
  r.n_items = ratings.size();
  r.n_raters = n;
  r.n_categories = q;
  r.kappa = (1.0 - p_e) < 1e-15 ? 1.0 : (p_bar - p_e) / (1.0 - p_e);
  return r;
}

std::vector<std::vector<std::string>> load_ratings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DetectError("cannot read ratings file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  bool id_column = false;  // a header starting with "item" names the first column as item ids
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (first) {
      first = false;
      const auto lower = to_lower_ascii(t);
      id_column = lower.rfind("item", 0) == 0;
      if (id_column || lower.rfind("rater", 0) == 0) continue;
    }
    std::vector<std::string> cells;
    std::string cur;
    for (char c : t) {
      if (c == ',') {
        cells.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(trim(cur));
    if (id_column) cells.erase(cells.begin());
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace mission
