#include "mission/diversity.hpp"

#include <algorithm>
#include <cmath>

namespace mission {

namespace {
constexpr std::array<const char*, kGroupCount> kRoman = {"I", "II", "III", "IV", "V", "VI", "VII", "VIII"};
constexpr double kEntropyTolerance = 1e-9;
}  // namespace

std::string group_name(Group g) { return kRoman.at(static_cast<std::size_t>(g) - 1); }

std::optional<Group> group_from_name(std::string_view roman) {
  for (std::size_t i = 0; i < kRoman.size(); ++i)
    if (roman == kRoman[i]) return static_cast<Group>(i + 1);
  return std::nullopt;
}

const std::array<double, kGroupCount - 1>& group_boundaries() {
  static const std::array<double, kGroupCount - 1> b = [] {
    std::array<double, kGroupCount - 1> out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(static_cast<double>(i) + 1.5);
    return out;
  }();
  return b;
}

CategoryVector category_probability(const ProfileTimeline& timeline, const TopicCatalog& catalog,
                                    const std::map<std::string, std::size_t>& assignments) {
  CategoryVector counts{};
  std::size_t covered = 0;
  for (const auto& t : timeline.tweets) {
    auto it = assignments.find(t.tweet_id);
    if (it == assignments.end()) continue;
    if (it->second >= catalog.size())
      throw DiversityError("topic " + std::to_string(it->second) + " not in catalog");
    counts[static_cast<std::size_t>(catalog.category_of(it->second))] += 1.0;
    ++covered;
  }
  if (covered == 0) throw DiversityError("profile " + timeline.profile_id + " has no topic-covered tweets");
  for (auto& c : counts) c /= static_cast<double>(covered);
  return counts;
}

double shannon_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

double shannon_entropy(const CategoryVector& cpv) { return shannon_entropy(std::vector<double>(cpv.begin(), cpv.end())); }

Group assign_group(double entropy) {
  const double max_h = std::log(static_cast<double>(kGroupCount));
  if (!(entropy >= -kEntropyTolerance && entropy <= max_h + kEntropyTolerance))
    throw DiversityError("entropy " + format_double(entropy) + " outside [0, ln 8]");
  const auto& b = group_boundaries();
  // Number of boundaries <= H gives the zero-based group.
  const auto idx = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), entropy) - b.begin());
  return static_cast<Group>(idx + 1);
}

DiversityProfile diversity_profile(const ProfileTimeline& timeline, const TopicCatalog& catalog,
                                   const std::map<std::string, std::size_t>& assignments) {
  DiversityProfile d;
  d.profile_id = timeline.profile_id;
  d.cpv = category_probability(timeline, catalog, assignments);
  d.entropy = shannon_entropy(d.cpv);
  d.group = assign_group(d.entropy);
  for (const auto& t : timeline.tweets) d.covered_tweets += assignments.count(t.tweet_id);
  return d;
}

std::size_t GroupPartition::total() const {
  std::size_t n = 0;
  for (const auto& [_, m] : members) n += m.size();
  return n;
}

std::string GroupPartition::cdf_csv() const {
  std::string out = "group,H\n";
  for (const auto& [g, hs] : entropies)
    for (double h : hs) out += group_name(g) + "," + format_double(h) + "\n";
  return out;
}

GroupPartition group_partition(const std::vector<DiversityProfile>& profiles) {
  GroupPartition p;
  for (const auto& d : profiles) {
    p.members[d.group].push_back(d.profile_id);
    p.entropies[d.group].push_back(d.entropy);
  }
  for (auto& [_, m] : p.members) std::sort(m.begin(), m.end());
  for (auto& [_, h] : p.entropies) std::sort(h.begin(), h.end());
  return p;
}

}  // namespace mission
