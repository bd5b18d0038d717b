#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mission/corpus.hpp"
#include "mission/diversity.hpp"
#include "mission/metrics.hpp"
#include "mission/topics.hpp"

namespace mission {

class ClassifyError : public Error {
 public:
  explicit ClassifyError(const std::string& what) : Error("classify", what) {}
};

enum class FeatureGroup : std::uint8_t { content, auxiliary, activity_profile };

std::string_view feature_group_name(FeatureGroup g);
std::optional<FeatureGroup> feature_group_from_name(std::string_view name);

class FeatureCatalog {
 public:
  /// The full enumerated catalog (40 features).
  static const FeatureCatalog& standard();

  FeatureCatalog(std::vector<std::string> names, std::vector<FeatureGroup> groups);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<FeatureGroup>& groups() const { return groups_; }
  std::vector<std::size_t> indices(FeatureGroup g) const;
  std::vector<std::size_t> all_indices() const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Hex FNV-1a over names and groups; stored in model files.
  std::string hash() const;

 private:
  std::vector<std::string> names_;
  std::vector<FeatureGroup> groups_;
};

struct FeatureVector {
  std::string profile_id;
  std::vector<double> values;
  std::vector<bool> imputed;  // true where the source value was null
};

using CategoryCounts = std::array<std::size_t, kCategoryCount>;

/// Number of TPV-covered tweets per category of their dominant topic.
CategoryCounts category_tweet_counts(const ProfileTimeline& timeline, const TopicCatalog& catalog,
                                     const std::map<std::string, std::size_t>& assignments);

/// One row in standard catalog order. Nulls become 0 with the imputed bit
/// set; booleans map to {0, 1}. Throws ClassifyError when the metric bundle
/// belongs to another profile.
FeatureVector extract_features(const ProfileTimeline& timeline, const MetricBundle& metrics,
                               const std::optional<CategoryCounts>& category_counts);

// ---------------------------------------------------------------------------

using Matrix = std::vector<std::vector<double>>;

struct MinMaxScaler {
  std::vector<double> min;
  std::vector<double> max;

  /// Throws ClassifyError on an empty or ragged matrix.
  static MinMaxScaler fit(const Matrix& x);
  /// (x - min) / (max - min) clipped to [0, 1]; constant features give 0.
  std::vector<double> transform(const std::vector<double>& row) const;
  Matrix transform(const Matrix& x) const;
};

struct Split {
  std::vector<std::size_t> train;  // ascending indices
  std::vector<std::size_t> test;
};

/// Labels are 1 for on-mission, 0 otherwise. Train size is round(0.8 n);
/// stratified splits allocate test slots per class by largest remainder
/// while leaving every class at least one training example.
Split split_80_20(const std::vector<int>& labels, std::uint64_t seed, bool stratified = true);

// ---------------------------------------------------------------------------

enum class ModelKind { linear_svm, decision_tree, random_forest };

std::string_view model_kind_name(ModelKind k);  // "svm", "tree", "forest"
std::optional<ModelKind> model_kind_from_name(std::string_view name);

struct SvmConfig {
  double c = 1.0;
  int epochs = 1000;
};

struct TreeConfig {
  int max_depth = 8;  // <= 0 for unlimited
  std::size_t min_leaf = 2;
  std::size_t max_features = 0;  // features tried per split, 0 for all
};

struct ForestConfig {
  std::size_t n_trees = 100;
  TreeConfig tree;  // max_features 0 here means floor(sqrt(F))
  bool bootstrap = true;
};

struct TrainConfig {
  SvmConfig svm;
  TreeConfig tree;
  ForestConfig forest;
  unsigned jobs = 1;
};

struct LinearSvm {
  std::vector<double> w;
  double b = 0.0;
  std::vector<double> loss_history;  // objective at w = 0, then after every epoch

  /// Full-batch subgradient descent on the L2-regularized hinge objective
  /// with lambda = 1 / (C n) and step 1 / (lambda t); returns the suffix
  /// average of the iterates. y in {0, 1}.
  static LinearSvm train(const Matrix& x, const std::vector<int>& y, const SvmConfig& cfg);
  double decision(const std::vector<double>& row) const;
  /// Regularized hinge objective for given weights.
  static double objective(const Matrix& x, const std::vector<int>& y, const std::vector<double>& w, double b,
                          double lambda);
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;  // go left when value <= threshold
  int left = -1;
  int right = -1;
  double positive_fraction = 0.0;
  std::size_t n_samples = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  /// CART with Gini impurity over the rows listed in `sample` (duplicates
  /// allowed, as produced by bootstrapping). `rng` is needed only when
  /// cfg.max_features limits the candidate features.
  static DecisionTree train(const Matrix& x, const std::vector<int>& y, const std::vector<std::size_t>& sample,
                            const TreeConfig& cfg, Rng* rng = nullptr);
  static DecisionTree train(const Matrix& x, const std::vector<int>& y, const TreeConfig& cfg);
  double positive_fraction(const std::vector<double>& row) const;
  std::size_t depth() const;
};

struct RandomForest {
  std::vector<DecisionTree> trees;

  static RandomForest train(const Matrix& x, const std::vector<int>& y, const ForestConfig& cfg,
                            std::uint64_t seed, unsigned jobs = 1);
  double positive_fraction(const std::vector<double>& row) const;
};

struct TrainedModel {
  ModelKind kind = ModelKind::linear_svm;
  std::vector<std::size_t> features;  // catalog indices, in order
  MinMaxScaler scaler;                // over `features`
  LinearSvm svm;
  DecisionTree tree;
  RandomForest forest;
  std::uint64_t seed = 0;
  std::string catalog_hash;
  std::string config_hash;  // provenance, optional

  /// Positive means on-mission. Takes a full catalog row.
  double decision(const std::vector<double>& full_row) const;
  int predict(const std::vector<double>& full_row) const { return decision(full_row) > 0.0 ? 1 : 0; }

  std::string to_json() const;
  static TrainedModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static TrainedModel load(const std::string& path);
};

/// Fit the scaler on the rows in `train_rows` restricted to `features`, then
/// train a model of the given kind. Throws ClassifyError if the training
/// rows hold a single class.
TrainedModel train_model(ModelKind kind, const Matrix& x, const std::vector<int>& y,
                         const std::vector<std::size_t>& train_rows, const std::vector<std::size_t>& features,
                         const TrainConfig& config, std::uint64_t seed, const std::string& catalog_hash = {});

// ---------------------------------------------------------------------------

struct EvalReport {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double f1 = 0.0;  // 0 when there is no positive prediction or truth
  double accuracy = 0.0;
  std::size_t total() const { return tp + tn + fp + fn; }
};

EvalReport confusion_report(const std::vector<int>& truth, const std::vector<int>& predicted);
EvalReport evaluate(const TrainedModel& model, const Matrix& x, const std::vector<int>& y,
                    const std::vector<std::size_t>& rows);

struct AblationCell {
  std::string features;  // content | auxiliary | activity_profile | all
  ModelKind kind = ModelKind::linear_svm;
  EvalReport report;
};

/// 4 feature sets x 3 model kinds over one shared split.
std::vector<AblationCell> ablation(const Matrix& x, const std::vector<int>& y, const FeatureCatalog& catalog,
                                   const Split& split, const TrainConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct WildPrediction {
  std::string profile_id;
  Group group = Group::I;
  int prediction = 0;
  double score = 0.0;
};

struct WildGroupRow {
  Group group = Group::I;
  std::size_t total = 0;
  std::size_t flagged = 0;
  std::optional<double> percentage;  // null for an empty group
};

struct WildReport {
  std::vector<WildGroupRow> rows;
  std::vector<WildPrediction> predictions;  // by group, then profile id
  std::map<Group, std::vector<std::string>> annotation_samples;

  std::string predictions_jsonl() const;
};

/// Apply a trained model to unlabeled profiles of the requested groups and
/// draw up to `sample_size` flagged profiles per group for annotation.
WildReport flag_in_wild(const TrainedModel& model, const std::map<Group, std::vector<FeatureVector>>& groups,
                        std::size_t sample_size, std::uint64_t seed);

}  // namespace mission
