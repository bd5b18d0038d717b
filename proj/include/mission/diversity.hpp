#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mission/corpus.hpp"
#include "mission/topics.hpp"

namespace mission {

using CategoryVector = std::array<double, kCategoryCount>;

/// Thematic-diversity group, numbered 1..8 (I..VIII).
enum class Group : std::uint8_t { I = 1, II, III, IV, V, VI, VII, VIII };
inline constexpr std::size_t kGroupCount = 8;

std::string group_name(Group g);  // "I".."VIII"
std::optional<Group> group_from_name(std::string_view roman);

/// Lower bounds of groups II..VIII: ln(1.5), ln(2.5), ..., ln(7.5).
const std::array<double, kGroupCount - 1>& group_boundaries();

struct DiversityProfile {
  std::string profile_id;
  CategoryVector cpv{};
  double entropy = 0.0;
  Group group = Group::I;
  std::size_t covered_tweets = 0;
};

class DiversityError : public Error {
 public:
  explicit DiversityError(const std::string& what) : Error("group", what) {}
};

/// Fraction of the profile's TPV-covered tweets whose dominant topic falls
/// in each category. Throws DiversityError if no tweet is covered.
CategoryVector category_probability(const ProfileTimeline& timeline, const TopicCatalog& catalog,
                                    const std::map<std::string, std::size_t>& assignments);

/// Natural-log Shannon entropy with 0 ln 0 = 0.
double shannon_entropy(const CategoryVector& cpv);
double shannon_entropy(const std::vector<double>& p);

/// Left-closed, right-open bins at ln(m + 0.5); the top bin is closed at
/// ln 8. Throws DiversityError outside [0, ln 8 + 1e-9].
Group assign_group(double entropy);

DiversityProfile diversity_profile(const ProfileTimeline& timeline, const TopicCatalog& catalog,
                                   const std::map<std::string, std::size_t>& assignments);

struct GroupPartition {
  std::map<Group, std::vector<std::string>> members;  // profile ids, sorted
  std::map<Group, std::vector<double>> entropies;     // sorted ascending

  std::size_t total() const;
  /// CSV "group,H" sorted by group then H.
  std::string cdf_csv() const;
};

GroupPartition group_partition(const std::vector<DiversityProfile>& profiles);

}  // namespace mission
