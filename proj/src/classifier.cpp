#include "mission/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace mission {

using nlohmann::json;

namespace {
constexpr std::array<std::string_view, 3> kGroupNames = {"content", "auxiliary", "activity_profile"};
constexpr std::string_view kModelSchema = "mission-profiler/model";
constexpr int kModelVersion = 1;
}  // namespace

std::string_view feature_group_name(FeatureGroup g) { return kGroupNames.at(static_cast<std::size_t>(g)); }

std::optional<FeatureGroup> feature_group_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kGroupNames.size(); ++i)
    if (kGroupNames[i] == name) return static_cast<FeatureGroup>(i);
  return std::nullopt;
}

FeatureCatalog::FeatureCatalog(std::vector<std::string> names, std::vector<FeatureGroup> groups)
    : names_(std::move(names)), groups_(std::move(groups)) {
  if (names_.size() != groups_.size()) throw ClassifyError("feature catalog: names and groups differ in length");
}

const FeatureCatalog& FeatureCatalog::standard() {
  static const FeatureCatalog catalog = [] {
    std::vector<std::string> names;
    std::vector<FeatureGroup> groups;
    auto add = [&](std::string n, FeatureGroup g) {
      names.push_back(std::move(n));
      groups.push_back(g);
    };
    using G = FeatureGroup;
    for (auto c : all_categories()) add("tweets_" + std::string(category_name(c)), G::content);
    for (const char* n : {"median_toxicity", "flesch_kincaid_grade", "flesch_reading_ease", "linsear_write",
                          "automated_readability_index", "lexical_diversity_mtld", "chars_per_tweet",
                          "words_per_tweet"})
      add(n, G::content);
    for (const char* n :
         {"total_hashtags", "unique_hashtags", "hashtags_per_tweet", "total_urls", "unique_urls", "urls_per_tweet"})
      add(n, G::auxiliary);
    for (const char* n : {"n_tweets", "n_retweets", "n_unique", "normalized_burstiness", "median_delta_days",
                          "has_location", "description_len", "protected", "followers", "following", "listed",
                          "account_age_days", "favourites", "geo_enabled", "verified", "statuses",
                          "contributors_enabled", "withheld_countries"})
      add(n, G::activity_profile);
    return FeatureCatalog(std::move(names), std::move(groups));
  }();
  return catalog;
}

std::vector<std::size_t> FeatureCatalog::indices(FeatureGroup g) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < groups_.size(); ++i)
    if (groups_[i] == g) out.push_back(i);
  return out;
}

std::vector<std::size_t> FeatureCatalog::all_indices() const {
  std::vector<std::size_t> out(size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

std::optional<std::size_t> FeatureCatalog::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

std::string FeatureCatalog::hash() const {
  Fnv1a h;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    h.update(names_[i]);
    h.update(std::string_view("\t"));
    h.update(feature_group_name(groups_[i]));
    h.update(std::string_view("\n"));
  }
  return h.hex();
}

CategoryCounts category_tweet_counts(const ProfileTimeline& timeline, const TopicCatalog& catalog,
                                     const std::map<std::string, std::size_t>& assignments) {
  CategoryCounts counts{};
  for (const auto& t : timeline.tweets) {
    auto it = assignments.find(t.tweet_id);
    if (it == assignments.end() || it->second >= catalog.size()) continue;
    ++counts[static_cast<std::size_t>(catalog.category_of(it->second))];
  }
  return counts;
}

FeatureVector extract_features(const ProfileTimeline& timeline, const MetricBundle& metrics,
                               const std::optional<CategoryCounts>& category_counts) {
  if (metrics.profile_id != timeline.profile_id)
    throw ClassifyError("metrics for " + metrics.profile_id + " passed with profile " + timeline.profile_id);
  FeatureVector f;
  f.profile_id = timeline.profile_id;
  f.values.reserve(FeatureCatalog::standard().size());
  auto put = [&](std::optional<double> v) {
    f.values.push_back(v && std::isfinite(*v) ? *v : 0.0);
    f.imputed.push_back(!(v && std::isfinite(*v)));
  };
  auto num = [](auto v) { return std::optional<double>(static_cast<double>(v)); };

  for (std::size_t c = 0; c < kCategoryCount; ++c)
    put(category_counts ? num((*category_counts)[c]) : std::nullopt);
  put(metrics.toxicity.median);
  const auto& lex = metrics.lexical;
  put(lex ? num(lex->flesch_kincaid_grade) : std::nullopt);
  put(lex ? num(lex->flesch_ease) : std::nullopt);
  put(lex ? num(lex->linsear_write) : std::nullopt);
  put(lex ? num(lex->ari) : std::nullopt);
  put(lex ? num(lex->lexical_diversity_mtld) : std::nullopt);
  put(lex ? num(lex->chars_per_tweet) : std::nullopt);
  put(lex ? num(lex->words_per_tweet) : std::nullopt);

  const auto& h = metrics.hashtags;
  put(num(h.total_hashtags));
  put(num(h.unique_hashtags));
  put(num(h.hashtags_per_tweet));
  put(num(h.total_urls));
  put(num(h.unique_urls));
  put(num(h.urls_per_tweet));

  const auto& a = metrics.activity;
  put(num(a.n_tweets));
  put(num(a.n_retweets));
  put(num(a.n_unique));
  put(a.burstiness);
  put(a.median_delta_days);

  const auto& m = timeline.metadata;
  auto meta = [&](auto v) { return m.present ? num(v) : std::nullopt; };
  put(meta(m.has_location));
  put(meta(m.description_len));
  put(meta(m.is_protected));
  put(meta(m.followers));
  put(meta(m.following));
  put(meta(m.listed));
  put(metrics.derived.account_age_days);
  put(meta(m.favourites));
  put(meta(m.geo_enabled));
  put(meta(m.verified));
  put(meta(m.statuses));
  put(meta(m.contributors_enabled));
  put(meta(m.withheld_countries));
  return f;
}

// ---------------------------------------------------------------------------

MinMaxScaler MinMaxScaler::fit(const Matrix& x) {
  if (x.empty() || x.front().empty()) throw ClassifyError("cannot fit a scaler on an empty matrix");
  MinMaxScaler s;
  s.min = x.front();
  s.max = x.front();
  for (const auto& row : x) {
    if (row.size() != s.min.size()) throw ClassifyError("ragged feature matrix");
    for (std::size_t j = 0; j < row.size(); ++j) {
      s.min[j] = std::min(s.min[j], row[j]);
      s.max[j] = std::max(s.max[j], row[j]);
    }
  }
  return s;
}

std::vector<double> MinMaxScaler::transform(const std::vector<double>& row) const {
  if (row.size() != min.size()) throw ClassifyError("scaler dimension mismatch");
  std::vector<double> out(row.size(), 0.0);
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double range = max[j] - min[j];
    if (range > 0.0) out[j] = std::clamp((row[j] - min[j]) / range, 0.0, 1.0);
  }
  return out;
}

Matrix MinMaxScaler::transform(const Matrix& x) const {
  Matrix out;
  out.reserve(x.size());
  for (const auto& r : x) out.push_back(transform(r));
  return out;
}

Split split_80_20(const std::vector<int>& labels, std::uint64_t seed, bool stratified) {
  const std::size_t n = labels.size();
  if (n < 5) throw ClassifyError("need at least 5 labeled examples, got " + std::to_string(n));
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
  const std::size_t n_test = n - n_train;
  Rng rng(derive_seed(seed, "split"));
  Split s;

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  if (stratified) {
    struct Slot {
      int label;
      std::size_t take;
      double remainder;
    };
    std::vector<Slot> slots;
    std::size_t assigned = 0;
    for (const auto& [label, idx] : by_class) {
      const double ideal = static_cast<double>(idx.size()) * static_cast<double>(n_test) / static_cast<double>(n);
      auto take = std::min(static_cast<std::size_t>(std::floor(ideal)), idx.size() - 1);
      slots.push_back({label, take, ideal - static_cast<double>(take)});
      assigned += take;
    }
    std::vector<std::size_t> order(slots.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return slots[a].remainder > slots[b].remainder; });
    for (bool progress = true; assigned < n_test && progress;) {
      progress = false;
      for (auto i : order) {
        if (assigned == n_test) break;
        if (slots[i].take + 1 < by_class[slots[i].label].size()) {
          ++slots[i].take;
          ++assigned;
          progress = true;
        }
      }
    }
    for (const auto& slot : slots) {
      auto idx = by_class[slot.label];
      rng.shuffle(idx);
      s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(slot.take));
      s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(slot.take), idx.end());
    }
  } else {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx);
    s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());

  for (const auto& [label, _] : by_class) {
    const bool present = std::any_of(s.train.begin(), s.train.end(), [&](std::size_t i) { return labels[i] == label; });
    if (!present) throw ClassifyError("class " + std::to_string(label) + " absent from the training split");
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::array<std::string_view, 3> kKindNames = {"svm", "tree", "forest"};

double dot(const std::vector<double>& w, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
  return s;
}

void require_two_classes(const std::vector<int>& y) {
  const bool pos = std::find(y.begin(), y.end(), 1) != y.end();
  const bool neg = std::find(y.begin(), y.end(), 0) != y.end();
  if (!pos || !neg) throw ClassifyError("training set holds a single class");
}
}  // namespace

std::string_view model_kind_name(ModelKind k) { return kKindNames.at(static_cast<std::size_t>(k)); }

std::optional<ModelKind> model_kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<ModelKind>(i);
  if (name == "linear_svm") return ModelKind::linear_svm;
  if (name == "decision_tree") return ModelKind::decision_tree;
  if (name == "random_forest") return ModelKind::random_forest;
  return std::nullopt;
}

double LinearSvm::objective(const Matrix& x, const std::vector<int>& y, const std::vector<double>& w, double b,
                            double lambda) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double yi = y[i] == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - yi * (dot(w, x[i]) + b));
  }
  return 0.5 * lambda * (dot(w, w) + b * b) + hinge / static_cast<double>(x.size());
}

LinearSvm LinearSvm::train(const Matrix& x, const std::vector<int>& y, const SvmConfig& cfg) {
  if (x.empty() || x.size() != y.size()) throw ClassifyError("svm: empty or mismatched training data");
  if (!(cfg.c > 0.0) || cfg.epochs < 1) throw ClassifyError("svm: C must be positive and epochs >= 1");
  require_two_classes(y);
  const std::size_t n = x.size();
  const std::size_t f = x.front().size();
  const double lambda = 1.0 / (cfg.c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);

  // The bias is the weight of an implicit constant feature.
  std::vector<double> w(f + 1, 0.0), avg(f + 1, 0.0), grad(f + 1);
  const int suffix_start = cfg.epochs / 2 + 1;
  std::size_t averaged = 0;

  LinearSvm out;
  out.loss_history.push_back(objective(x, y, std::vector<double>(f, 0.0), 0.0, lambda));
  for (int t = 1; t <= cfg.epochs; ++t) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double yi = y[i] == 1 ? 1.0 : -1.0;
      double margin = w[f];
      for (std::size_t j = 0; j < f; ++j) margin += w[j] * x[i][j];
      if (yi * margin < 1.0) {
        for (std::size_t j = 0; j < f; ++j) grad[j] -= yi * x[i][j];
        grad[f] -= yi;
      }
    }
    const double eta = 1.0 / (lambda * static_cast<double>(t));
    double norm2 = 0.0;
    for (std::size_t j = 0; j <= f; ++j) {
      w[j] -= eta * (lambda * w[j] + grad[j] / static_cast<double>(n));
      norm2 += w[j] * w[j];
    }
    if (norm2 > radius * radius) {
      const double shrink = radius / std::sqrt(norm2);
      for (auto& v : w) v *= shrink;
    }
    const std::vector<double>* current = &w;
    if (t >= suffix_start) {
      ++averaged;
      for (std::size_t j = 0; j <= f; ++j) avg[j] += (w[j] - avg[j]) / static_cast<double>(averaged);
      current = &avg;
    }
    out.loss_history.push_back(
        objective(x, y, std::vector<double>(current->begin(), current->end() - 1), current->back(), lambda));
  }
  out.w.assign(avg.begin(), avg.end() - 1);
  out.b = avg.back();
  return out;
}

double LinearSvm::decision(const std::vector<double>& row) const {
  if (row.size() != w.size()) throw ClassifyError("svm: dimension mismatch");
  return dot(w, row) + b;
}

// ---------------------------------------------------------------------------

namespace {

double gini_impurity(std::size_t pos, std::size_t n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(n);
  return 2.0 * p * (1.0 - p);
}

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

// Scan `features` (ascending) for the split minimizing weighted child Gini.
void scan_features(const Matrix& x, const std::vector<int>& y, const std::vector<std::size_t>& rows,
                   const std::vector<std::size_t>& features, std::size_t min_leaf, BestSplit& best) {
  const std::size_t n = rows.size();
  std::vector<std::pair<double, int>> col(n);
  for (auto feat : features) {
    for (std::size_t i = 0; i < n; ++i) col[i] = {x[rows[i]][feat], y[rows[i]]};
    std::sort(col.begin(), col.end());
    std::size_t total_pos = 0;
    for (const auto& c : col) total_pos += static_cast<std::size_t>(c.second == 1);
    std::size_t left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_pos += static_cast<std::size_t>(col[i].second == 1);
      if (col[i].first == col[i + 1].first) continue;
      const std::size_t nl = i + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double imp = (static_cast<double>(nl) * gini_impurity(left_pos, nl) +
                          static_cast<double>(nr) * gini_impurity(total_pos - left_pos, nr)) /
                         static_cast<double>(n);
      if (best.feature < 0 || imp < best.impurity - 1e-12) {
        double thr = col[i].first + (col[i + 1].first - col[i].first) / 2.0;
        if (thr >= col[i + 1].first) thr = col[i].first;
        best = {static_cast<int>(feat), thr, imp};
      }
    }
  }
}

}  // namespace

DecisionTree DecisionTree::train(const Matrix& x, const std::vector<int>& y, const TreeConfig& cfg) {
  std::vector<std::size_t> all(x.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return train(x, y, all, cfg, nullptr);
}

DecisionTree DecisionTree::train(const Matrix& x, const std::vector<int>& y, const std::vector<std::size_t>& sample,
                                 const TreeConfig& cfg, Rng* rng) {
  if (sample.empty() || x.size() != y.size()) throw ClassifyError("tree: empty or mismatched training data");
  const std::size_t f = x.front().size();
  const std::size_t min_leaf = std::max<std::size_t>(1, cfg.min_leaf);
  const bool subsample = cfg.max_features > 0 && cfg.max_features < f;
  if (subsample && !rng) throw ClassifyError("tree: feature subsampling needs a random source");

  DecisionTree tree;
  struct Pending {
    int node;
    std::vector<std::size_t> rows;
    int depth;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, sample, 0});

  std::vector<std::size_t> all_features(f);
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});

  while (!stack.empty()) {
    Pending p = std::move(stack.back());
    stack.pop_back();
    const std::size_t n = p.rows.size();
    std::size_t pos = 0;
    for (auto r : p.rows) pos += static_cast<std::size_t>(y[r] == 1);
    {
      auto& node = tree.nodes[static_cast<std::size_t>(p.node)];
      node.n_samples = n;
      node.positive_fraction = static_cast<double>(pos) / static_cast<double>(n);
    }
    const bool pure = pos == 0 || pos == n;
    const bool depth_reached = cfg.max_depth > 0 && p.depth >= cfg.max_depth;
    if (pure || depth_reached || n < 2 * min_leaf) continue;

    BestSplit best;
    if (subsample) {
      auto order = all_features;
      rng->shuffle(order);
      std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.max_features));
      std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(cfg.max_features), order.end());
      std::sort(chosen.begin(), chosen.end());
      std::sort(rest.begin(), rest.end());
      scan_features(x, y, p.rows, chosen, min_leaf, best);
      if (best.feature < 0) scan_features(x, y, p.rows, rest, min_leaf, best);
    } else {
      scan_features(x, y, p.rows, all_features, min_leaf, best);
    }
    if (best.feature < 0) continue;

    std::vector<std::size_t> left, right;
    for (auto r : p.rows)
      (x[r][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(r);
    const int li = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[static_cast<std::size_t>(p.node)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = li;
    node.right = li + 1;
    // Right pushed first so the left subtree is expanded first.
    stack.push_back({li + 1, std::move(right), p.depth + 1});
    stack.push_back({li, std::move(left), p.depth + 1});
  }
  return tree;
}

double DecisionTree::positive_fraction(const std::vector<double>& row) const {
  if (nodes.empty()) throw ClassifyError("tree: empty model");
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    if (static_cast<std::size_t>(n.feature) >= row.size()) throw ClassifyError("tree: dimension mismatch");
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].positive_fraction;
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

RandomForest RandomForest::train(const Matrix& x, const std::vector<int>& y, const ForestConfig& cfg,
                                 std::uint64_t seed, unsigned jobs) {
  if (x.empty() || cfg.n_trees == 0) throw ClassifyError("forest: empty training data or zero trees");
  require_two_classes(y);
  const std::size_t n = x.size();
  const std::size_t f = x.front().size();
  TreeConfig tcfg = cfg.tree;
  if (tcfg.max_features == 0)
    tcfg.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(f))));

  RandomForest forest;
  forest.trees.resize(cfg.n_trees);
  parallel_for(cfg.n_trees, jobs, [&](std::size_t t) {
    Rng rng(derive_seed(seed, "tree", t));
    std::vector<std::size_t> sample(n);
    if (cfg.bootstrap) {
      for (auto& s : sample) s = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    } else {
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    }
    forest.trees[t] = DecisionTree::train(x, y, sample, tcfg, &rng);
  });
  return forest;
}

double RandomForest::positive_fraction(const std::vector<double>& row) const {
  if (trees.empty()) throw ClassifyError("forest: empty model");
  double s = 0.0;
  for (const auto& t : trees) s += t.positive_fraction(row);
  return s / static_cast<double>(trees.size());
}

// ---------------------------------------------------------------------------

double TrainedModel::decision(const std::vector<double>& full_row) const {
  std::vector<double> sub;
  sub.reserve(features.size());
  for (auto j : features) {
    if (j >= full_row.size()) throw ClassifyError("feature row shorter than the model's feature set");
    sub.push_back(full_row[j]);
  }
  const auto scaled = scaler.transform(sub);
  switch (kind) {
    case ModelKind::linear_svm:
      return svm.decision(scaled);
    case ModelKind::decision_tree:
      return tree.positive_fraction(scaled) - 0.5;
    case ModelKind::random_forest:
      return forest.positive_fraction(scaled) - 0.5;
  }
  return 0.0;
}

namespace {

json tree_to_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes)
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.positive_fraction, n.n_samples}));
  return nodes;
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree t;
  for (const auto& n : j) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.positive_fraction = n.at(4).get<double>();
    node.n_samples = n.at(5).get<std::size_t>();
    t.nodes.push_back(node);
  }
  const auto count = static_cast<int>(t.nodes.size());
  if (count == 0) throw ClassifyError("model file: empty tree");
  for (const auto& n : t.nodes)
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count))
      throw ClassifyError("model file: tree child index out of range");
  return t;
}

}  // namespace

std::string TrainedModel::to_json() const {
  json j;
  j["schema"] = kModelSchema;
  j["version"] = kModelVersion;
  j["kind"] = model_kind_name(kind);
  j["seed"] = seed;
  j["catalog_hash"] = catalog_hash;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["features"] = features;
  j["scaler"] = {{"min", scaler.min}, {"max", scaler.max}};
  switch (kind) {
    case ModelKind::linear_svm:
      j["parameters"] = {{"w", svm.w}, {"b", svm.b}};
      break;
    case ModelKind::decision_tree:
      j["parameters"] = {{"nodes", tree_to_json(tree)}};
      break;
    case ModelKind::random_forest: {
      json trees = json::array();
      for (const auto& t : forest.trees) trees.push_back(tree_to_json(t));
      j["parameters"] = {{"trees", trees}};
      break;
    }
  }
  return j.dump(1) + "\n";
}

TrainedModel TrainedModel::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    if (j.at("schema").get<std::string>() != kModelSchema) throw ClassifyError("not a model file");
    if (j.at("version").get<int>() != kModelVersion)
      throw ClassifyError("unsupported model version " + j.at("version").dump());
    TrainedModel m;
    auto kind = model_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw ClassifyError("unknown model kind " + j.at("kind").dump());
    m.kind = *kind;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.catalog_hash = j.at("catalog_hash").get<std::string>();
    m.config_hash = j.value("config_hash", std::string());
    m.features = j.at("features").get<std::vector<std::size_t>>();
    m.scaler.min = j.at("scaler").at("min").get<std::vector<double>>();
    m.scaler.max = j.at("scaler").at("max").get<std::vector<double>>();
    if (m.scaler.min.size() != m.features.size() || m.scaler.max.size() != m.features.size())
      throw ClassifyError("model file: scaler and feature list differ in length");
    const auto& p = j.at("parameters");
    switch (m.kind) {
      case ModelKind::linear_svm:
        m.svm.w = p.at("w").get<std::vector<double>>();
        m.svm.b = p.at("b").get<double>();
        if (m.svm.w.size() != m.features.size()) throw ClassifyError("model file: weight length mismatch");
        break;
      case ModelKind::decision_tree:
        m.tree = tree_from_json(p.at("nodes"));
        break;
      case ModelKind::random_forest:
        for (const auto& t : p.at("trees")) m.forest.trees.push_back(tree_from_json(t));
        if (m.forest.trees.empty()) throw ClassifyError("model file: forest without trees");
        break;
    }
    return m;
  } catch (const json::exception& e) {
    throw ClassifyError(std::string("malformed model file: ") + e.what());
  }
}

void TrainedModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ClassifyError("cannot write model file " + path);
  out << to_json();
}

TrainedModel TrainedModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ClassifyError("cannot read model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

TrainedModel train_model(ModelKind kind, const Matrix& x, const std::vector<int>& y,
                         const std::vector<std::size_t>& train_rows, const std::vector<std::size_t>& features,
                         const TrainConfig& config, std::uint64_t seed, const std::string& catalog_hash) {
  if (train_rows.empty()) throw ClassifyError("no training rows");
  if (features.empty()) throw ClassifyError("empty feature set");
  Matrix sub;
  std::vector<int> labels;
  for (auto r : train_rows) {
    if (r >= x.size()) throw ClassifyError("training row index out of range");
    std::vector<double> row;
    row.reserve(features.size());
    for (auto j : features) {
      if (j >= x[r].size()) throw ClassifyError("feature index out of range");
      row.push_back(x[r][j]);
    }
    sub.push_back(std::move(row));
    labels.push_back(y.at(r));
  }
  require_two_classes(labels);

  TrainedModel m;
  m.kind = kind;
  m.features = features;
  m.seed = seed;
  m.catalog_hash = catalog_hash;
  m.scaler = MinMaxScaler::fit(sub);
  const auto scaled = m.scaler.transform(sub);
  switch (kind) {
    case ModelKind::linear_svm:
      m.svm = LinearSvm::train(scaled, labels, config.svm);
      break;
    case ModelKind::decision_tree: {
      Rng rng(derive_seed(seed, "decision_tree"));
      std::vector<std::size_t> all(scaled.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      m.tree = DecisionTree::train(scaled, labels, all, config.tree, &rng);
      break;
    }
    case ModelKind::random_forest:
      m.forest = RandomForest::train(scaled, labels, config.forest, derive_seed(seed, "forest"), config.jobs);
      break;
  }
  return m;
}

// ---------------------------------------------------------------------------

EvalReport confusion_report(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw ClassifyError("truth and prediction lengths differ");
  EvalReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == 1, p = predicted[i] == 1;
    if (t && p) ++r.tp;
    else if (!t && !p) ++r.tn;
    else if (p) ++r.fp;
    else ++r.fn;
  }
  const std::size_t denom = 2 * r.tp + r.fp + r.fn;
  r.f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(r.tp) / static_cast<double>(denom);
  r.accuracy = r.total() == 0 ? 0.0 : static_cast<double>(r.tp + r.tn) / static_cast<double>(r.total());
  return r;
}

EvalReport evaluate(const TrainedModel& model, const Matrix& x, const std::vector<int>& y,
                    const std::vector<std::size_t>& rows) {
  std::vector<int> truth, pred;
  for (auto r : rows) {
    truth.push_back(y.at(r));
    pred.push_back(model.predict(x.at(r)));
  }
  return confusion_report(truth, pred);
}

std::vector<AblationCell> ablation(const Matrix& x, const std::vector<int>& y, const FeatureCatalog& catalog,
                                   const Split& split, const TrainConfig& config, std::uint64_t seed) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> sets;
  for (auto g : {FeatureGroup::content, FeatureGroup::auxiliary, FeatureGroup::activity_profile})
    sets.emplace_back(std::string(feature_group_name(g)), catalog.indices(g));
  sets.emplace_back("all", catalog.all_indices());

  std::vector<AblationCell> cells;
  for (const auto& [name, features] : sets) {
    for (auto kind : {ModelKind::linear_svm, ModelKind::decision_tree, ModelKind::random_forest}) {
      const auto model = train_model(kind, x, y, split.train, features, config, seed, catalog.hash());
      cells.push_back({name, kind, evaluate(model, x, y, split.test)});
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------

std::string WildReport::predictions_jsonl() const {
  std::string out;
  for (const auto& p : predictions) {
    json j = {{"profile_id", p.profile_id},
              {"group", group_name(p.group)},
              {"prediction", p.prediction == 1 ? "on_mission" : "not_on_mission"},
              {"score", p.score}};
    out += j.dump() + "\n";
  }
  return out;
}

WildReport flag_in_wild(const TrainedModel& model, const std::map<Group, std::vector<FeatureVector>>& groups,
                        std::size_t sample_size, std::uint64_t seed) {
  WildReport report;
  for (const auto& [group, profiles] : groups) {
    WildGroupRow row;
    row.group = group;
    row.total = profiles.size();
    std::vector<const FeatureVector*> ordered;
    for (const auto& f : profiles) ordered.push_back(&f);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto* a, const auto* b) { return a->profile_id < b->profile_id; });
    std::vector<std::string> flagged;
    for (const auto* f : ordered) {
      WildPrediction p{f->profile_id, group, 0, model.decision(f->values)};
      p.prediction = p.score > 0.0 ? 1 : 0;
      if (p.prediction) flagged.push_back(p.profile_id);
      report.predictions.push_back(std::move(p));
    }
    row.flagged = flagged.size();
    if (row.total > 0) row.percentage = 100.0 * static_cast<double>(row.flagged) / static_cast<double>(row.total);
    report.rows.push_back(row);

    Rng rng(derive_seed(seed, "annotate", static_cast<std::uint64_t>(group)));
    rng.shuffle(flagged);
    if (flagged.size() > sample_size) flagged.resize(sample_size);
    std::sort(flagged.begin(), flagged.end());
    report.annotation_samples[group] = std::move(flagged);
  }
  return report;
}

}  // namespace mission
