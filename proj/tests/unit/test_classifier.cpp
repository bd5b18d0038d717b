#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "mission/classifier.hpp"

using namespace mission;

namespace {

struct Data {
  Matrix x;
  std::vector<int> y;
};

Data blobs(std::uint64_t seed, std::size_t n, std::size_t dims, double sep) {
  Rng rng(seed);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    std::vector<double> row(dims);
    for (std::size_t j = 0; j < dims; ++j) row[j] = rng.normal() + (label ? sep : -sep) * (j < 2 ? 1.0 : 0.0);
    d.x.push_back(row);
    d.y.push_back(label);
  }
  return d;
}

Data xor_data(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    if (std::abs(a) < 0.1 || std::abs(b) < 0.1) continue;
    d.x.push_back({a, b, rng.uniform()});
    d.y.push_back((a > 0) != (b > 0) ? 1 : 0);
  }
  return d;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

EvalReport fit_eval(ModelKind kind, const Data& d, std::uint64_t seed, const TrainConfig& cfg = {}) {
  const auto split = split_80_20(d.y, seed);
  const auto m = train_model(kind, d.x, d.y, split.train, iota_n(d.x[0].size()), cfg, seed);
  return evaluate(m, d.x, d.y, split.test);
}

}  // namespace

TEST_CASE("feature catalog layout") {
  const auto& c = FeatureCatalog::standard();
  CHECK(c.size() == 40);
  CHECK(std::set<std::string>(c.names().begin(), c.names().end()).size() == 40);
  CHECK(c.indices(FeatureGroup::content).size() == 16);
  CHECK(c.indices(FeatureGroup::auxiliary).size() == 6);
  CHECK(c.indices(FeatureGroup::activity_profile).size() == 18);
  CHECK(c.index_of("normalized_burstiness").has_value());
  CHECK(c.hash() == FeatureCatalog::standard().hash());
  CHECK(feature_group_from_name("auxiliary") == FeatureGroup::auxiliary);
}

TEST_CASE("features impute nulls and flag them") {
  auto tl = testing::timeline("p", 12);
  ScoreCache s;
  const auto bundle = compute_metrics(tl, s);
  const auto fv = extract_features(tl, bundle, std::nullopt);
  const auto& c = FeatureCatalog::standard();
  REQUIRE(fv.values.size() == 40);
  CHECK(fv.imputed[*c.index_of("median_toxicity")]);
  CHECK(fv.values[*c.index_of("median_toxicity")] == 0.0);
  CHECK(fv.imputed[*c.index_of("followers")]);
  CHECK_FALSE(fv.imputed[*c.index_of("n_tweets")]);
  CHECK(fv.values[*c.index_of("n_tweets")] == 12.0);
  auto other = bundle;
  other.profile_id = "q";
  CHECK_THROWS_AS(extract_features(tl, other, std::nullopt), ClassifyError);
}

TEST_CASE("min-max scaler") {
  const auto s = MinMaxScaler::fit({{0, 5, 1}, {10, 5, 3}});
  const auto r = s.transform(std::vector<double>{5, 5, 4});
  CHECK(r[0] == 0.5);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 1.0);
  CHECK_THROWS_AS(MinMaxScaler::fit({}), ClassifyError);
  CHECK_THROWS_AS(MinMaxScaler::fit({{1, 2}, {1}}), ClassifyError);
}

TEST_CASE("80/20 split properties") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(5, 300));
    std::vector<int> y(n);
    const double p = rng.uniform(0.05, 0.95);
    for (auto& v : y) v = rng.bernoulli(p) ? 1 : 0;
    y[0] = 1;
    y[1] = 0;
    const auto s = split_80_20(y, static_cast<std::uint64_t>(trial));
    CHECK(s.train.size() == static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n))));
    CHECK(s.train.size() + s.test.size() == n);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.test) CHECK(all.insert(i).second);
    CHECK(all.size() == n);
    CHECK(std::is_sorted(s.train.begin(), s.train.end()));
    std::size_t pos = 0, pos_test = 0, pos_train = 0;
    for (std::size_t i = 0; i < n; ++i) pos += static_cast<std::size_t>(y[i]);
    for (auto i : s.test) pos_test += static_cast<std::size_t>(y[i]);
    for (auto i : s.train) pos_train += static_cast<std::size_t>(y[i]);
    CHECK(pos_train >= 1);
    CHECK(pos_train < s.train.size());
    const double ideal = static_cast<double>(pos) * static_cast<double>(s.test.size()) / static_cast<double>(n);
    CHECK(std::abs(static_cast<double>(pos_test) - ideal) <= 1.0);
    const auto again = split_80_20(y, static_cast<std::uint64_t>(trial));
    CHECK(again.test == s.test);
  }
  CHECK_THROWS_AS(split_80_20({1, 0, 1}, 1), ClassifyError);
}

TEST_CASE("f1 and accuracy match a confusion-matrix oracle") {
  Rng rng(100);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 60));
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng.bernoulli(0.4) ? 1 : 0;
      p[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (t[i] && p[i]) ++tp;
      else if (!t[i] && !p[i]) ++tn;
      else if (p[i]) ++fp;
      else ++fn;
    }
    const double f1 = tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
    const auto r = confusion_report(t, p);
    CHECK(r.tp == tp);
    CHECK(r.tn == tn);
    CHECK(r.fp == fp);
    CHECK(r.fn == fn);
    CHECK(r.f1 == f1);
    CHECK(r.accuracy == static_cast<double>(tp + tn) / static_cast<double>(n));
  }
  CHECK(confusion_report({0, 0}, {0, 0}).f1 == 0.0);
  CHECK_THROWS_AS(confusion_report({0}, {0, 1}), ClassifyError);
}

TEST_CASE("linear svm separates blobs and its objective decreases") {
  const auto d = blobs(7, 200, 5, 1.5);
  CHECK(fit_eval(ModelKind::linear_svm, d, 7).accuracy >= 0.95);
  const auto scaled = MinMaxScaler::fit(d.x).transform(d.x);
  const auto svm = LinearSvm::train(scaled, d.y, SvmConfig{});
  REQUIRE(svm.loss_history.size() == 1001);
  CHECK(svm.loss_history.back() <= svm.loss_history.front());
  const double lambda = 1.0 / static_cast<double>(d.x.size());
  const double final_obj = LinearSvm::objective(scaled, d.y, svm.w, svm.b, lambda);
  CHECK(final_obj < svm.loss_history.front());
  CHECK_THROWS_AS(LinearSvm::train(scaled, std::vector<int>(d.y.size(), 1), SvmConfig{}), ClassifyError);
}

TEST_CASE("predictions are invariant to positive affine feature transforms") {
  const auto d = blobs(11, 120, 4, 1.0);
  auto t = d;
  for (auto& row : t.x)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = row[j] * (2.0 + static_cast<double>(j)) + 10.0 * j;
  const auto split = split_80_20(d.y, 3);
  for (auto kind : {ModelKind::linear_svm, ModelKind::decision_tree, ModelKind::random_forest}) {
    const auto a = train_model(kind, d.x, d.y, split.train, iota_n(4), {}, 5);
    const auto b = train_model(kind, t.x, t.y, split.train, iota_n(4), {}, 5);
    for (auto i : split.test) CHECK(a.predict(d.x[i]) == b.predict(t.x[i]));
  }
}

TEST_CASE("cart grows to purity without a depth limit") {
  const auto d = xor_data(4, 300);
  TreeConfig cfg;
  cfg.max_depth = 0;
  cfg.min_leaf = 1;
  const auto tree = DecisionTree::train(d.x, d.y, cfg);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < d.x.size(); ++i) correct += (tree.positive_fraction(d.x[i]) > 0.5) == (d.y[i] == 1);
  CHECK(correct == d.x.size());
  TreeConfig shallow;
  shallow.max_depth = 1;
  CHECK(DecisionTree::train(d.x, d.y, shallow).depth() <= 1);
}

TEST_CASE("trees handle xor where a linear model cannot") {
  const auto d = xor_data(9, 600);
  const auto svm = fit_eval(ModelKind::linear_svm, d, 9);
  const auto tree = fit_eval(ModelKind::decision_tree, d, 9);
  const auto forest = fit_eval(ModelKind::random_forest, d, 9);
  CHECK(svm.accuracy < 0.8);
  CHECK(tree.accuracy >= 0.9);
  CHECK(tree.accuracy >= svm.accuracy + 0.15);
  CHECK(forest.accuracy >= tree.accuracy - 0.02);
}

TEST_CASE("forest training is independent of the thread count") {
  const auto d = blobs(2, 150, 6, 0.7);
  ForestConfig cfg;
  cfg.n_trees = 20;
  const auto a = RandomForest::train(d.x, d.y, cfg, 77, 1);
  const auto b = RandomForest::train(d.x, d.y, cfg, 77, 4);
  REQUIRE(a.trees.size() == b.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
    for (std::size_t k = 0; k < a.trees[t].nodes.size(); ++k) {
      CHECK(a.trees[t].nodes[k].feature == b.trees[t].nodes[k].feature);
      CHECK(a.trees[t].nodes[k].threshold == b.trees[t].nodes[k].threshold);
    }
  }
}

TEST_CASE("model files round-trip") {
  const auto d = blobs(5, 100, 3, 1.0);
  const auto split = split_80_20(d.y, 1);
  testing::TempDir dir("model");
  for (auto kind : {ModelKind::linear_svm, ModelKind::decision_tree, ModelKind::random_forest}) {
    auto m = train_model(kind, d.x, d.y, split.train, iota_n(3), {}, 5, "cafe");
    m.config_hash = "abc";
    m.save(dir.file("m.json"));
    const auto back = TrainedModel::load(dir.file("m.json"));
    CHECK(back.to_json() == m.to_json());
    CHECK(back.config_hash == "abc");
    for (const auto& row : d.x) CHECK(back.decision(row) == m.decision(row));
  }
  CHECK_THROWS_AS(TrainedModel::from_json("{\"schema\":\"other\"}"), ClassifyError);
  CHECK_THROWS_AS(TrainedModel::from_json("not json"), ClassifyError);
}

TEST_CASE("ablation covers four feature sets and three models") {
  const auto& cat = FeatureCatalog::standard();
  Rng rng(3);
  Matrix x;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    std::vector<double> row(cat.size());
    for (auto& v : row) v = rng.uniform();
    y.push_back(i % 2);
    row[0] += y.back();
    x.push_back(row);
  }
  const auto split = split_80_20(y, 2);
  TrainConfig cfg;
  cfg.forest.n_trees = 10;
  const auto cells = ablation(x, y, cat, split, cfg, 4);
  CHECK(cells.size() == 12);
  std::set<std::pair<std::string, int>> seen;
  for (const auto& c : cells) {
    seen.insert({c.features, static_cast<int>(c.kind)});
    CHECK(c.report.total() == split.test.size());
  }
  CHECK(seen.size() == 12);
}

TEST_CASE("wild flagging reports per group and samples flagged profiles") {
  const auto& cat = FeatureCatalog::standard();
  Rng rng(6);
  Matrix x;
  std::vector<int> y;
  for (int i = 0; i < 80; ++i) {
    std::vector<double> row(cat.size(), 0.0);
    y.push_back(i % 2);
    row[3] = y.back() + 0.1 * rng.uniform();
    x.push_back(row);
  }
  const auto split = split_80_20(y, 1);
  const auto m = train_model(ModelKind::linear_svm, x, y, split.train, cat.all_indices(), {}, 1, cat.hash());
  std::map<Group, std::vector<FeatureVector>> groups;
  groups[Group::II];
  for (int i = 0; i < 30; ++i) {
    FeatureVector fv{"g" + std::to_string(i), std::vector<double>(cat.size(), 0.0), std::vector<bool>(cat.size())};
    fv.values[3] = i < 20 ? 1.0 : 0.0;
    groups[Group::V].push_back(fv);
  }
  const auto w = flag_in_wild(m, groups, 5, 9);
  REQUIRE(w.rows.size() == 2);
  CHECK(w.rows[0].total == 0);
  CHECK_FALSE(w.rows[0].percentage.has_value());
  CHECK(w.rows[1].flagged == 20);
  CHECK(*w.rows[1].percentage == doctest::Approx(100.0 * 20 / 30));
  const auto& sample = w.annotation_samples.at(Group::V);
  CHECK(sample.size() == 5);
  for (const auto& id : sample) CHECK(std::stoi(id.substr(1)) < 20);
  CHECK(flag_in_wild(m, groups, 5, 9).annotation_samples == w.annotation_samples);
  const auto jsonl = w.predictions_jsonl();
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 30);
}
