#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mission/classifier.hpp"
#include "mission/detector.hpp"
#include "mission/diversity.hpp"
#include "mission/metrics.hpp"

namespace mission {

/// Raised by run_pipeline; `stage()` names the failing stage.
class PipelineError : public Error {
 public:
  PipelineError(const std::string& stage, const std::string& what) : Error(stage, stage + ": " + what) {}
};

/// Exit code for an Error stage name: 2 config, 3 ingest, 4 score, 5 topics,
/// 6 group, 7 metrics, 8 detect, 9 classify, 10 report, 11 lock or
/// provenance, 1 anything else.
int exit_code_for_stage(const std::string& stage);

/// "VIII", "II..VII", "II,IV,VI" or "all".
std::vector<Group> parse_group_list(const std::string& spec);

struct RunConfig {
  // Inputs. Relative paths are resolved against the config file's directory.
  std::string tweets;
  std::string profiles;   // optional
  std::string tpv;        // optional; baseline assigner when empty
  std::string toxicity;   // optional precomputed toxicity scores or cache
  std::string bots;       // optional precomputed bot scores or cache
  std::string catalog;    // optional; cyclic catalog when empty
  std::string labels;     // optional; detection designations when empty

  std::string out = "out";
  std::uint64_t seed = 42;
  std::size_t k = 20;
  bool strict = false;
  unsigned jobs = 1;

  std::string scoring_backend = "file";  // file | http
  double rate_limit = 0.0;
  int max_retries = 3;

  NtpvNormalization normalization = NtpvNormalization::per_profile;
  BurstinessMode burstiness = BurstinessMode::profile;

  std::vector<Group> detect_groups{Group::VIII};
  DetectionConfig detection;

  ModelKind model = ModelKind::linear_svm;
  TrainConfig train;
  bool stratified = true;
  std::vector<Group> flag_groups{Group::II, Group::III, Group::IV, Group::V, Group::VI, Group::VII};
  std::size_t flag_sample = 100;

  /// Parse and validate; throws Error("config").
  static RunConfig from_json(const std::string& text, const std::string& base_dir = ".");
  static RunConfig load(const std::string& path);
  /// Canonical JSON of every field.
  std::string to_json() const;
  /// Hash of the canonical JSON without `out` and `jobs`, which do not
  /// change results.
  std::string hash() const;
  void validate() const;
};

/// Run config for a bundle written by SynthBundle::write, with input paths
/// relative to the bundle directory.
RunConfig synth_run_config(std::size_t k, std::uint64_t seed);

enum class Stage { ingest, score, topics, group, metrics, detect, classify, report };
std::string stage_name(Stage s);
std::optional<Stage> stage_from_name(const std::string& name);

struct RunOptions {
  Stage until = Stage::report;
  bool force = false;  // ignore a manifest written under another config
};

struct StageRecord {
  std::string stage;
  std::string key;
  bool cached = false;
};

/// Stage artifacts as JSON documents (null for stages that did not run).
struct PipelineResult {
  std::string config_hash;
  std::vector<StageRecord> log;
  nlohmann::json ingest, score, topics, group, metrics, detect, classify, report;
  std::string model_json;  // empty when no model was trained
  std::vector<std::string> warnings;
};

/// ingest -> score -> topics -> group -> metrics -> detect -> classify ->
/// report. Each stage output is cached under out/cache keyed by a content
/// hash of its inputs and configuration; a rerun with unchanged inputs
/// loads every stage from the cache. Writes report.json, model.json,
/// features.jsonl, designations.json, flagged.jsonl, plots/*.csv and
/// run_log.json under `config.out`.
PipelineResult run_pipeline(const RunConfig& config, const RunOptions& options = {});

/// One CSV per figure shape; every file starts with a "# config_hash=" line.
/// Returns the file names written.
std::vector<std::string> export_plot_data(const PipelineResult& result, const std::string& dir);

// ---------------------------------------------------------------------------
// Feature tables shared by the standalone train / evaluate / flag commands.

struct FeatureRow {
  FeatureVector features;
  std::optional<Group> group;
};

std::string features_jsonl(const std::vector<FeatureRow>& rows, const std::string& config_hash);
/// Throws Error("classify") on malformed rows or a catalog mismatch.
std::vector<FeatureRow> load_features_jsonl(const std::string& path);

/// Rows that carry a label, in row order, as (matrix, labels, profile ids).
struct LabeledSet {
  Matrix x;
  std::vector<int> y;
  std::vector<std::string> ids;
};
LabeledSet labeled_set(const std::vector<FeatureRow>& rows, const std::map<std::string, int>& labels);

nlohmann::json eval_to_json(const EvalReport& r);
nlohmann::json ablation_to_json(const std::vector<AblationCell>& cells);
nlohmann::json wild_to_json(const WildReport& w);

}  // namespace mission
