#include "mission/topics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mission {

using nlohmann::json;

namespace {
constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "everyday", "no_topic", "news_blogs", "politics", "entertainment", "sports", "profanity", "health_covid"};
}  // namespace

std::string_view category_name(Category c) { return kCategoryNames.at(static_cast<std::size_t>(c)); }

std::optional<Category> category_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  return std::nullopt;
}

const std::array<Category, kCategoryCount>& all_categories() {
  static const std::array<Category, kCategoryCount> all = {
      Category::everyday,      Category::no_topic, Category::news_blogs, Category::politics,
      Category::entertainment, Category::sports,   Category::profanity,  Category::health_covid};
  return all;
}

// ---------------------------------------------------------------------------

TopicCatalog::TopicCatalog(std::vector<Category> category_of) : category_of_(std::move(category_of)) {}

TopicCatalog TopicCatalog::cyclic(std::size_t k) {
  std::vector<Category> cats(k);
  for (std::size_t i = 0; i < k; ++i) cats[i] = static_cast<Category>(i % kCategoryCount);
  return TopicCatalog(std::move(cats));
}

TopicCatalog TopicCatalog::parse(std::string_view text) {
  std::map<std::size_t, Category> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string::npos) throw TopicError("catalog line " + std::to_string(line_no) + ": expected TAB", line_no);
    const auto idx_str = trim(std::string_view(t).substr(0, tab));
    const auto name = trim(std::string_view(t).substr(tab + 1));
    std::size_t idx = 0;
    auto [p, ec] = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
    if (ec != std::errc() || p != idx_str.data() + idx_str.size())
      throw TopicError("catalog line " + std::to_string(line_no) + ": bad topic index", line_no);
    auto cat = category_from_name(name);
    if (!cat) throw TopicError("catalog line " + std::to_string(line_no) + ": unknown category '" + name + "'", line_no);
    if (!entries.emplace(idx, *cat).second)
      throw TopicError("catalog line " + std::to_string(line_no) + ": topic listed twice", line_no);
  }
  if (entries.empty()) throw TopicError("catalog is empty");
  const std::size_t k = entries.rbegin()->first + 1;
  if (entries.size() != k) throw TopicError("catalog does not cover every topic in [0," + std::to_string(k) + ")");
  std::vector<Category> cats;
  cats.reserve(k);
  for (auto& [_, c] : entries) cats.push_back(c);
  return TopicCatalog(std::move(cats));
}

TopicCatalog TopicCatalog::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TopicError("cannot read catalog: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string TopicCatalog::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < category_of_.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += category_name(category_of_[i]);
    out += '\n';
  }
  return out;
}

void TopicCatalog::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw TopicError("cannot write catalog: " + path);
  os << serialize();
}

// ---------------------------------------------------------------------------

TpvMap parse_tpvs(std::string_view text, std::size_t k) {
  TpvMap out;
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++row;
    if (trim(line).empty()) continue;
    auto fail = [&](const std::string& why) -> void {
      throw TopicError("TPV row " + std::to_string(row) + ": " + why, row);
    };
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("invalid JSON");
    std::string id;
    if (auto it = j.find("tweet_id"); it != j.end() && it->is_string()) id = it->get<std::string>();
    else if (it != j.end() && it->is_number_integer()) id = std::to_string(it->get<std::int64_t>());
    else fail("missing tweet_id");
    auto probs_it = j.find("probs");
    if (probs_it == j.end() || !probs_it->is_array()) fail("missing probs array");
    if (probs_it->size() != k)
      fail("expected " + std::to_string(k) + " probabilities, got " + std::to_string(probs_it->size()));
    TopicVector v;
    v.reserve(k);
    double sum = 0.0;
    for (const auto& p : *probs_it) {
      if (!p.is_number()) fail("non-numeric probability");
      const double x = p.get<double>();
      if (!std::isfinite(x)) fail("non-finite probability");
      if (x < 0.0) fail("negative probability");
      v.push_back(x);
      sum += x;
    }
    if (std::abs(sum - 1.0) > kTpvSumTolerance) fail("probabilities sum to " + format_double(sum));
    for (auto& x : v) x /= sum;
    if (!out.emplace(id, std::move(v)).second) fail("duplicate tweet_id " + id);
  }
  return out;
}

TpvMap load_tpvs(const std::string& path, std::size_t k) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TopicError("cannot read TPV file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tpvs(ss.str(), k);
}

std::string serialize_tpvs(const TpvMap& tpvs) {
  std::string out;
  for (const auto& [id, v] : tpvs) out += json{{"tweet_id", id}, {"probs", v}}.dump() + "\n";
  return out;
}

void save_tpvs(const TpvMap& tpvs, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw TopicError("cannot write TPV file: " + path);
  os << serialize_tpvs(tpvs);
}

std::size_t dominant_topic(const TopicVector& tpv) {
  if (tpv.empty()) throw TopicError("dominant_topic of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < tpv.size(); ++i)
    if (tpv[i] > tpv[best]) best = i;
  return best;
}

std::map<std::string, std::size_t> assign_dominant_topics(const TpvMap& tpvs) {
  std::map<std::string, std::size_t> out;
  for (const auto& [id, v] : tpvs) out.emplace(id, dominant_topic(v));
  return out;
}

std::optional<double> topic_median_toxicity(std::size_t topic, const std::map<std::string, std::size_t>& assignments,
                                            const ScoreCache& toxicity) {
  std::vector<double> scores;
  for (const auto& [id, t] : assignments) {
    if (t != topic) continue;
    if (auto s = toxicity.toxicity_of(id)) scores.push_back(*s);
  }
  return median(std::move(scores));
}

std::vector<TopicAggregate> topic_aggregates(std::size_t k, const std::map<std::string, std::size_t>& assignments,
                                             const ScoreCache& toxicity) {
  std::vector<TopicAggregate> out(k);
  std::vector<std::vector<double>> scores(k);
  for (std::size_t i = 0; i < k; ++i) out[i].topic = i;
  for (const auto& [id, t] : assignments) {
    if (t >= k) throw TopicError("topic index " + std::to_string(t) + " outside catalog");
    ++out[t].tweet_count;
    if (auto s = toxicity.toxicity_of(id)) scores[t].push_back(*s);
  }
  for (std::size_t i = 0; i < k; ++i) out[i].median_toxicity = median(std::move(scores[i]));
  return out;
}

TpvMap baseline_topic_assigner(const Corpus& corpus, std::size_t k, std::uint64_t seed, bool eligible_only) {
  if (k == 0) throw TopicError("K must be positive");
  TpvMap out;
  for (const auto& [_, tl] : corpus.profiles) {
    const auto tweets = eligible_only ? topic_model_eligible(tl) : tl.tweets;
    for (const auto& t : tweets) {
      const auto tokens = split_whitespace(t.text_norm);
      if (tokens.empty()) continue;
      TopicVector v(k, 0.0);
      for (const auto& tok : tokens) {
        Fnv1a h;
        h.update(seed).update(to_lower_ascii(tok));
        v[h.digest() % k] += 1.0;
      }
      for (auto& x : v) x /= static_cast<double>(tokens.size());
      out.emplace(t.tweet_id, std::move(v));
    }
  }
  return out;
}

}  // namespace mission
