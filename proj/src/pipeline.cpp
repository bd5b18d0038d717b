#include "mission/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mission/synth.hpp"

namespace mission {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kArtifactVersion = 1;
constexpr std::array<const char*, 8> kStageNames = {"ingest",  "score",  "topics",   "group",
                                                    "metrics", "detect", "classify", "report"};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("io", "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write via a temporary name so an interrupted run never leaves a partial
// artifact under its final name.
void write_text(const fs::path& p, const std::string& content) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("io", "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("io", "failed writing " + tmp.string());
  }
  fs::rename(tmp, p);
}

json jopt(const std::optional<double>& v) { return v ? json(*v) : json(); }

std::optional<double> opt_of(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

json five_json(const std::optional<FiveNumber>& f) {
  if (!f) return json();
  return {{"min", f->min}, {"q1", f->q1}, {"median", f->median}, {"q3", f->q3}, {"max", f->max}};
}

std::string resolve(const std::string& p, const fs::path& base) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_relative()) path = base / path;
  return path.lexically_normal().string();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error("config", where + " must be an object");
  for (const auto& [k, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw Error("config", "unknown key '" + k + "' in " + where);
  }
}

std::vector<Group> groups_from(const json& j) {
  if (j.is_string()) return parse_group_list(j.get<std::string>());
  std::vector<Group> out;
  for (const auto& g : j) {
    auto parsed = parse_group_list(g.get<std::string>());
    out.insert(out.end(), parsed.begin(), parsed.end());
  }
  return out;
}

json groups_json(const std::vector<Group>& gs) {
  json a = json::array();
  for (auto g : gs) a.push_back(group_name(g));
  return a;
}

}  // namespace

int exit_code_for_stage(const std::string& stage) {
  static const std::map<std::string, int> codes = {
      {"config", 2}, {"ingest", 3},   {"score", 4},  {"topics", 5},      {"group", 6},      {"metrics", 7},
      {"detect", 8}, {"classify", 9}, {"report", 10}, {"lock", 11}, {"provenance", 11}, {"synth", 2}};
  auto it = codes.find(stage);
  return it == codes.end() ? 1 : it->second;
}

std::vector<Group> parse_group_list(const std::string& spec) {
  const auto s = trim(spec);
  auto one = [&](const std::string& name) {
    auto g = group_from_name(trim(name));
    if (!g) throw Error("config", "unknown group '" + name + "' (expected I..VIII)");
    return *g;
  };
  std::vector<Group> out;
  if (s == "all") {
    for (std::size_t i = 1; i <= kGroupCount; ++i) out.push_back(static_cast<Group>(i));
    return out;
  }
  if (auto dots = s.find(".."); dots != std::string::npos) {
    const auto lo = static_cast<int>(one(s.substr(0, dots)));
    const auto hi = static_cast<int>(one(s.substr(dots + 2)));
    if (lo > hi) throw Error("config", "empty group range '" + s + "'");
    for (int g = lo; g <= hi; ++g) out.push_back(static_cast<Group>(g));
    return out;
  }
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(one(part));
  if (out.empty()) throw Error("config", "empty group list");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------

RunConfig RunConfig::from_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("config", std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  const fs::path base(base_dir);
  try {
    check_keys(j, {"inputs", "out", "seed", "k", "strict", "jobs", "scoring", "metrics", "detect", "classify", "flag"},
               "config");
    const auto& in = j.at("inputs");
    check_keys(in, {"tweets", "profiles", "tpv", "toxicity", "bots", "catalog", "labels"}, "inputs");
    auto path = [&](const char* key) { return resolve(in.value(key, std::string()), base); };
    c.tweets = path("tweets");
    c.profiles = path("profiles");
    c.tpv = path("tpv");
    c.toxicity = path("toxicity");
    c.bots = path("bots");
    c.catalog = path("catalog");
    c.labels = path("labels");
    c.out = resolve(j.value("out", std::string("out")), base);
    c.seed = j.value("seed", c.seed);
    c.k = j.value("k", c.k);
    c.strict = j.value("strict", c.strict);
    c.jobs = j.value("jobs", c.jobs);

    if (j.contains("scoring")) {
      const auto& s = j["scoring"];
      check_keys(s, {"backend", "rate_limit", "max_retries"}, "scoring");
      c.scoring_backend = s.value("backend", c.scoring_backend);
      c.rate_limit = s.value("rate_limit", c.rate_limit);
      c.max_retries = s.value("max_retries", c.max_retries);
    }
    if (j.contains("metrics")) {
      const auto& m = j["metrics"];
      check_keys(m, {"burstiness"}, "metrics");
      const auto b = m.value("burstiness", std::string("profile"));
      if (b == "profile") c.burstiness = BurstinessMode::profile;
      else if (b == "dominant_topic") c.burstiness = BurstinessMode::dominant_topic;
      else throw Error("config", "metrics.burstiness must be profile or dominant_topic");
    }
    if (j.contains("detect")) {
      const auto& d = j["detect"];
      check_keys(d, {"groups", "min_cluster", "tox_gate", "ntpv_normalization"}, "detect");
      if (d.contains("groups")) c.detect_groups = groups_from(d["groups"]);
      c.detection.min_cluster = d.value("min_cluster", c.detection.min_cluster);
      if (d.contains("tox_gate")) {
        try {
          c.detection.gate = ToxicityGate::parse(d["tox_gate"].is_string() ? d["tox_gate"].get<std::string>()
                                                                           : d["tox_gate"].dump());
        } catch (const Error& e) {
          throw Error("config", e.what());
        }
      }
      const auto n = d.value("ntpv_normalization", std::string("per_profile"));
      if (n == "per_profile") c.normalization = NtpvNormalization::per_profile;
      else if (n == "per_tweet") c.normalization = NtpvNormalization::per_tweet;
      else throw Error("config", "detect.ntpv_normalization must be per_profile or per_tweet");
    }
    if (j.contains("classify")) {
      const auto& k = j["classify"];
      check_keys(k, {"model", "stratified", "svm", "tree", "forest"}, "classify");
      if (k.contains("model")) {
        auto m = model_kind_from_name(k["model"].get<std::string>());
        if (!m) throw Error("config", "classify.model must be svm, tree or forest");
        c.model = *m;
      }
      c.stratified = k.value("stratified", c.stratified);
      if (k.contains("svm")) {
        check_keys(k["svm"], {"c", "epochs"}, "classify.svm");
        c.train.svm.c = k["svm"].value("c", c.train.svm.c);
        c.train.svm.epochs = k["svm"].value("epochs", c.train.svm.epochs);
      }
      if (k.contains("tree")) {
        check_keys(k["tree"], {"max_depth", "min_leaf"}, "classify.tree");
        c.train.tree.max_depth = k["tree"].value("max_depth", c.train.tree.max_depth);
        c.train.tree.min_leaf = k["tree"].value("min_leaf", c.train.tree.min_leaf);
      }
      if (k.contains("forest")) {
        const auto& f = k["forest"];
        check_keys(f, {"n_trees", "max_depth", "min_leaf", "bootstrap"}, "classify.forest");
        c.train.forest.n_trees = f.value("n_trees", c.train.forest.n_trees);
        c.train.forest.tree.max_depth = f.value("max_depth", c.train.forest.tree.max_depth);
        c.train.forest.tree.min_leaf = f.value("min_leaf", c.train.forest.tree.min_leaf);
        c.train.forest.bootstrap = f.value("bootstrap", c.train.forest.bootstrap);
      }
    }
    if (j.contains("flag")) {
      const auto& f = j["flag"];
      check_keys(f, {"groups", "sample"}, "flag");
      if (f.contains("groups")) c.flag_groups = groups_from(f["groups"]);
      c.flag_sample = f.value("sample", c.flag_sample);
    }
  } catch (const json::exception& e) {
    throw Error("config", std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw Error("config", e.what());
  }
  return from_json(text, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error("config", m); };
  if (tweets.empty()) fail("inputs.tweets is required");
  if (k < 1) fail("k must be >= 1");
  if (jobs < 1) fail("jobs must be >= 1");
  if (scoring_backend != "file" && scoring_backend != "http" && scoring_backend != "mock")
    fail("scoring.backend must be file, http or mock");
  if (!(rate_limit >= 0.0)) fail("scoring.rate_limit must be >= 0");
  if (max_retries < 0) fail("scoring.max_retries must be >= 0");
  if (detect_groups.empty()) fail("detect.groups is empty");
  if (detection.min_cluster < 1) fail("detect.min_cluster must be >= 1");
  if (!(train.svm.c > 0.0) || train.svm.epochs < 1) fail("classify.svm needs c > 0 and epochs >= 1");
  if (train.tree.min_leaf < 1 || train.forest.tree.min_leaf < 1) fail("min_leaf must be >= 1");
  if (train.forest.n_trees < 1) fail("classify.forest.n_trees must be >= 1");
}

std::string RunConfig::to_json() const {
  json j = {
      {"inputs",
       {{"tweets", tweets}, {"profiles", profiles}, {"tpv", tpv}, {"toxicity", toxicity}, {"bots", bots},
        {"catalog", catalog}, {"labels", labels}}},
      {"out", out},
      {"seed", seed},
      {"k", k},
      {"strict", strict},
      {"jobs", jobs},
      {"scoring", {{"backend", scoring_backend}, {"rate_limit", rate_limit}, {"max_retries", max_retries}}},
      {"metrics", {{"burstiness", burstiness == BurstinessMode::profile ? "profile" : "dominant_topic"}}},
      {"detect",
       {{"groups", groups_json(detect_groups)},
        {"min_cluster", detection.min_cluster},
        {"tox_gate", detection.gate.to_string()},
        {"ntpv_normalization", normalization == NtpvNormalization::per_profile ? "per_profile" : "per_tweet"}}},
      {"classify",
       {{"model", model_kind_name(model)},
        {"stratified", stratified},
        {"svm", {{"c", train.svm.c}, {"epochs", train.svm.epochs}}},
        {"tree", {{"max_depth", train.tree.max_depth}, {"min_leaf", train.tree.min_leaf}}},
        {"forest",
         {{"n_trees", train.forest.n_trees},
          {"max_depth", train.forest.tree.max_depth},
          {"min_leaf", train.forest.tree.min_leaf},
          {"bootstrap", train.forest.bootstrap}}}}},
      {"flag", {{"groups", groups_json(flag_groups)}, {"sample", flag_sample}}}};
  return j.dump(2) + "\n";
}

std::string RunConfig::hash() const {
  auto j = json::parse(to_json());
  j.erase("out");
  j.erase("jobs");
  return to_hex(fnv1a(j.dump()));
}

RunConfig synth_run_config(std::size_t k, std::uint64_t seed) {
  RunConfig rc;
  rc.tweets = "tweets.jsonl";
  rc.profiles = "profiles.jsonl";
  rc.tpv = "tpv.jsonl";
  rc.toxicity = "toxicity_cache.jsonl";
  rc.bots = "bot_cache.jsonl";
  rc.catalog = "catalog.tsv";
  rc.labels = "labels.csv";
  rc.out = "out";
  rc.seed = seed;
  rc.k = k;
  // the archetypes spread over several entropy groups
  rc.detect_groups = parse_group_list("all");
  return rc;
}

std::string stage_name(Stage s) { return kStageNames.at(static_cast<std::size_t>(s)); }

std::optional<Stage> stage_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i)
    if (name == kStageNames[i]) return static_cast<Stage>(i);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Feature tables

std::string features_jsonl(const std::vector<FeatureRow>& rows, const std::string& config_hash) {
  const auto& cat = FeatureCatalog::standard();
  std::string out = json{{"schema", "mission-profiler/features"},
                         {"version", kArtifactVersion},
                         {"config_hash", config_hash},
                         {"catalog_hash", cat.hash()},
                         {"features", cat.names()}}
                        .dump() +
                    "\n";
  for (const auto& r : rows) {
    json j = {{"profile_id", r.features.profile_id},
              {"group", r.group ? json(group_name(*r.group)) : json()},
              {"values", r.features.values},
              {"imputed", r.features.imputed}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<FeatureRow> load_features_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ClassifyError("cannot read features file " + path);
  const auto& cat = FeatureCatalog::standard();
  std::vector<FeatureRow> rows;
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw ClassifyError("features line " + std::to_string(n) + ": invalid JSON");
    if (j.contains("schema")) {
      if (j.value("catalog_hash", std::string()) != cat.hash())
        throw ClassifyError("features file was written with a different feature catalog");
      header = true;
      continue;
    }
    try {
      FeatureRow r;
      r.features.profile_id = j.at("profile_id").get<std::string>();
      r.features.values = j.at("values").get<std::vector<double>>();
      r.features.imputed = j.value("imputed", std::vector<bool>(r.features.values.size(), false));
      if (r.features.values.size() != cat.size() || r.features.imputed.size() != cat.size())
        throw ClassifyError("features line " + std::to_string(n) + ": expected " + std::to_string(cat.size()) +
                            " values");
      if (j.contains("group") && !j["group"].is_null()) {
        r.group = group_from_name(j["group"].get<std::string>());
        if (!r.group) throw ClassifyError("features line " + std::to_string(n) + ": unknown group");
      }
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ClassifyError("features line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (!header) throw ClassifyError("features file lacks its header line");
  return rows;
}

LabeledSet labeled_set(const std::vector<FeatureRow>& rows, const std::map<std::string, int>& labels) {
  LabeledSet s;
  for (const auto& r : rows) {
    auto it = labels.find(r.features.profile_id);
    if (it == labels.end()) continue;
    s.x.push_back(r.features.values);
    s.y.push_back(it->second);
    s.ids.push_back(r.features.profile_id);
  }
  return s;
}

json eval_to_json(const EvalReport& r) {
  return {{"tp", r.tp}, {"tn", r.tn}, {"fp", r.fp}, {"fn", r.fn}, {"f1", r.f1}, {"accuracy", r.accuracy}};
}

json ablation_to_json(const std::vector<AblationCell>& cells) {
  json rows = json::array();
  for (const auto& c : cells) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const json& r) { return r["features"] == c.features; });
    if (it == rows.end()) {
      rows.push_back({{"features", c.features}});
      it = rows.end() - 1;
    }
    (*it)[std::string(model_kind_name(c.kind))] = eval_to_json(c.report);
  }
  return rows;
}

json wild_to_json(const WildReport& w) {
  json rows = json::array();
  std::size_t total = 0, flagged = 0, sampled = 0;
  for (const auto& r : w.rows) {
    const auto sample = w.annotation_samples.count(r.group) ? w.annotation_samples.at(r.group).size() : 0;
    rows.push_back({{"group", group_name(r.group)},
                    {"total", r.total},
                    {"flagged", r.flagged},
                    {"percentage", jopt(r.percentage)},
                    {"sample", sample}});
    total += r.total;
    flagged += r.flagged;
    sampled += sample;
  }
  std::optional<double> pct;
  if (total > 0) pct = 100.0 * static_cast<double>(flagged) / static_cast<double>(total);
  json samples = json::object();
  for (const auto& [g, ids] : w.annotation_samples) samples[group_name(g)] = ids;
  return {{"rows", rows},
          {"total", {{"total", total}, {"flagged", flagged}, {"percentage", jopt(pct)}, {"sample", sampled}}},
          {"annotation_samples", samples}};
}

// ---------------------------------------------------------------------------

namespace {

/// Exclusive per-directory lock, removed on destruction.
class RunLock {
 public:
  explicit RunLock(const fs::path& p) : path_(p) {
    const int fd = ::open(p.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw Error("lock", "another run holds " + p.string() + " (remove it if no run is active)");
    const auto pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto w = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

std::string file_hash_or(const std::string& path, const char* none) {
  return path.empty() ? std::string(none) : to_hex(hash_file(path));
}

class Runner {
 public:
  Runner(const RunConfig& cfg, PipelineResult& res) : cfg_(cfg), res_(res), out_(cfg.out), cache_(out_ / "cache") {}

  void run(Stage until);

 private:
  template <class Compute>
  json& stage(Stage s, const std::string& key, json PipelineResult::*slot, Compute compute);

  fs::path data_path(Stage s, const char* ext) const {
    return cache_ / (stage_name(s) + "-" + keys_.at(s) + ext);
  }
  std::string key_of(std::initializer_list<std::string> parts) const {
    Fnv1a h;
    h.update(std::to_string(kArtifactVersion));
    for (const auto& p : parts) {
      h.update(p);
      h.update(std::string_view("\x1f"));
    }
    return h.hex();
  }

  const Corpus& corpus() {
    if (!corpus_) corpus_ = load_corpus(data_path(Stage::ingest, ".bin").string());
    return *corpus_;
  }
  const ScoreCache& scores() {
    if (!scores_) scores_ = load_score_cache(data_path(Stage::score, ".jsonl").string());
    return *scores_;
  }
  const TpvMap& tpvs() {
    if (!tpvs_) tpvs_ = load_tpvs(data_path(Stage::topics, ".jsonl").string(), cfg_.k);
    return *tpvs_;
  }
  const TopicCatalog& catalog() {
    if (!catalog_) {
      catalog_ = cfg_.catalog.empty() ? TopicCatalog::cyclic(cfg_.k) : TopicCatalog::load(cfg_.catalog);
      if (catalog_->size() != cfg_.k)
        throw TopicError("catalog covers " + std::to_string(catalog_->size()) + " topics but k = " +
                         std::to_string(cfg_.k));
    }
    return *catalog_;
  }
  const std::map<std::string, std::size_t>& assignments() {
    if (!assignments_) assignments_ = assign_dominant_topics(tpvs());
    return *assignments_;
  }
  std::map<std::string, std::pair<Group, double>> group_of() const {
    std::map<std::string, std::pair<Group, double>> out;
    for (const auto& p : res_.group.at("profiles"))
      out[p.at("profile_id").get<std::string>()] = {*group_from_name(p.at("group").get<std::string>()),
                                                    p.at("entropy").get<double>()};
    return out;
  }

  json compute_ingest();
  json compute_score();
  json compute_topics();
  json compute_group();
  json compute_metrics();
  json compute_detect();
  json compute_classify();
  json compute_report();

  void write_output(const std::string& name, const std::string& content) { write_text(out_ / name, content); }

  const RunConfig& cfg_;
  PipelineResult& res_;
  fs::path out_, cache_;
  std::map<Stage, std::string> keys_;
  std::optional<Corpus> corpus_;
  std::optional<ScoreCache> scores_;
  std::optional<TpvMap> tpvs_;
  std::optional<TopicCatalog> catalog_;
  std::optional<std::map<std::string, std::size_t>> assignments_;
};

template <class Compute>
json& Runner::stage(Stage s, const std::string& key, json PipelineResult::*slot, Compute compute) {
  keys_[s] = key;
  const auto summary = data_path(s, ".json");
  const auto name = stage_name(s);
  try {
    if (fs::exists(summary)) {
      res_.*slot = json::parse(read_text(summary));
      res_.log.push_back({name, key, true});
    } else {
      res_.*slot = compute();
      write_text(summary, (res_.*slot).dump(1) + "\n");
      res_.log.push_back({name, key, false});
    }
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    if (e.stage() == "lock" || e.stage() == "provenance") throw;
    throw PipelineError(name, e.what());
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
  if (s == Stage::report) return res_.*slot;  // carries the warnings of every stage already
  for (const auto& w : (res_.*slot).value("warnings", json::array())) {
    auto text = name + ": " + w.get<std::string>();
    if (std::find(res_.warnings.begin(), res_.warnings.end(), text) == res_.warnings.end())
      res_.warnings.push_back(std::move(text));
  }
  return res_.*slot;
}

json Runner::compute_ingest() {
  Corpus c = load_timelines(cfg_.tweets, cfg_.strict);
  if (!cfg_.profiles.empty()) load_profile_metadata(c, cfg_.profiles, cfg_.strict);
  if (c.profiles.empty())
    c.warnings.push_back("no profile kept at least " + std::to_string(kMinTimelineTweets) +
                         " tweets; later stages have nothing to analyse");
  save_corpus(c, data_path(Stage::ingest, ".bin").string());
  const auto& s = c.ingest_stats;
  json j = {{"profiles", c.profiles.size()},
            {"tweets", c.tweet_count()},
            {"stats",
             {{"lines", s.lines},
              {"blank", s.blank},
              {"malformed", s.malformed},
              {"duplicate", s.duplicate},
              {"dropped_short_tweets", s.dropped_short_tweets},
              {"dropped_short_profiles", s.dropped_short_profiles},
              {"kept", s.kept},
              {"metadata_lines", s.metadata_lines},
              {"metadata_malformed", s.metadata_malformed},
              {"metadata_unmatched", s.metadata_unmatched},
              {"metadata_inconsistent", s.metadata_inconsistent}}},
            {"warnings", c.warnings}};
  corpus_ = std::move(c);
  return j;
}

json Runner::compute_score() {
  const auto& c = corpus();
  ScoreCache cache;
  std::size_t rejected = 0;
  json warnings = json::array();
  for (const auto& path : {cfg_.toxicity, cfg_.bots}) {
    if (path.empty()) continue;
    auto loaded = load_precomputed_scores(path);
    rejected += loaded.rejected.size();
    for (auto& [id, e] : loaded.cache.toxicity) cache.toxicity.insert_or_assign(id, e);
    for (auto& [id, b] : loaded.cache.bots) cache.bots.insert_or_assign(id, b);
  }
  if (rejected > 0) warnings.push_back(std::to_string(rejected) + " score rows rejected");

  // Keep only what the corpus references.
  std::set<std::string> tweet_ids;
  for (const auto& [_, tl] : c.profiles)
    for (const auto& t : tl.tweets) tweet_ids.insert(t.tweet_id);
  std::erase_if(cache.toxicity, [&](const auto& kv) { return !tweet_ids.count(kv.first); });
  std::erase_if(cache.bots, [&](const auto& kv) { return !c.profiles.count(kv.first); });

  json fetched = json();
  if (cfg_.scoring_backend == "mock") {
    // Deterministic stand-in scores derived from the ids.
    ScoringOptions opts;
    opts.now = [] { return std::int64_t{0}; };
    MockToxicityClient tox([](const Tweet& t) {
      return FetchResult{FetchStatus::ok, static_cast<double>(fnv1a(t.tweet_id) % 1000) / 1000.0, {}};
    });
    MockBotClient bot(0.5, 0.5);
    const auto rt = score_toxicity(c, tox, cache, opts);
    const auto rb = score_bots(c, bot, cache, opts);
    fetched = {{"toxicity", {{"fetched", rt.fetched}}}, {"bots", {{"fetched", rb.fetched}}}};
  } else if (cfg_.scoring_backend == "http") {
    ScoringOptions opts;
    opts.rate_limit = cfg_.rate_limit;
    opts.max_retries = cfg_.max_retries;
    auto tox = std::getenv("MISSION_TOXICITY_URL") ? HttpToxicityClient::from_environment() : nullptr;
    auto bot = std::getenv("MISSION_BOT_URL") ? HttpBotClient::from_environment() : nullptr;
    fetched = json::object();
    if (tox) {
      auto r = score_toxicity(c, *tox, cache, opts);
      fetched["toxicity"] = {{"fetched", r.fetched}, {"missing", r.missing}, {"quota_exhausted", r.quota_exhausted}};
      if (r.quota_exhausted) warnings.push_back("toxicity backend quota exhausted; rerun to resume");
    } else {
      warnings.push_back("MISSION_TOXICITY_URL is not set; no toxicity fetched");
    }
    if (bot) {
      auto r = score_bots(c, *bot, cache, opts);
      fetched["bots"] = {{"fetched", r.fetched}, {"missing", r.missing}, {"quota_exhausted", r.quota_exhausted}};
    } else {
      warnings.push_back("MISSION_BOT_URL is not set; no bot scores fetched");
    }
  }
  for (const auto& id : tweet_ids)
    if (!cache.toxicity.count(id)) cache.missing_toxicity.insert(id);
  for (const auto& [pid, _] : c.profiles)
    if (!cache.bots.count(pid)) cache.missing_bots.insert(pid);
  if (!cache.missing_toxicity.empty())
    warnings.push_back(std::to_string(cache.missing_toxicity.size()) + " tweets have no toxicity score");
  if (!cache.missing_bots.empty())
    warnings.push_back(std::to_string(cache.missing_bots.size()) + " profiles have no bot score");

  save_score_cache(cache, data_path(Stage::score, ".jsonl").string());
  json j = {{"backend", cfg_.scoring_backend},
            {"tweets_scored", cache.toxicity.size()},
            {"tweets_missing", cache.missing_toxicity.size()},
            {"profiles_scored", cache.bots.size()},
            {"profiles_missing", cache.missing_bots.size()},
            {"rejected_rows", rejected},
            {"fetched", fetched},
            {"warnings", warnings}};
  scores_ = std::move(cache);
  return j;
}

json Runner::compute_topics() {
  const auto& c = corpus();
  catalog();
  TpvMap all = cfg_.tpv.empty() ? baseline_topic_assigner(c, cfg_.k, derive_seed(cfg_.seed, "topics"))
                                : load_tpvs(cfg_.tpv, cfg_.k);
  std::set<std::string> eligible;
  for (const auto& [_, tl] : c.profiles)
    for (const auto& t : topic_model_eligible(tl)) eligible.insert(t.tweet_id);
  TpvMap covered;
  for (auto& [id, v] : all)
    if (eligible.count(id)) covered.emplace(id, std::move(v));
  json warnings = json::array();
  const auto uncovered = eligible.size() - covered.size();
  if (uncovered > 0) warnings.push_back(std::to_string(uncovered) + " eligible tweets have no topic vector");
  if (covered.empty() && !c.profiles.empty()) warnings.push_back("no tweet is covered by a topic vector");
  save_tpvs(covered, data_path(Stage::topics, ".jsonl").string());
  json j = {{"source", cfg_.tpv.empty() ? "baseline" : "file"},
            {"k", cfg_.k},
            {"rows", all.size()},
            {"eligible_tweets", eligible.size()},
            {"covered_tweets", covered.size()},
            {"warnings", warnings}};
  tpvs_ = std::move(covered);
  return j;
}

json Runner::compute_group() {
  const auto& c = corpus();
  const auto& assign = assignments();
  std::vector<DiversityProfile> profiles;
  json excluded = json::array();
  for (const auto& [pid, tl] : c.profiles) {
    const bool covered = std::any_of(tl.tweets.begin(), tl.tweets.end(),
                                     [&](const Tweet& t) { return assign.count(t.tweet_id) > 0; });
    if (!covered) {
      excluded.push_back(pid);
      continue;
    }
    profiles.push_back(diversity_profile(tl, catalog(), assign));
  }
  json rows = json::array();
  for (const auto& d : profiles)
    rows.push_back({{"profile_id", d.profile_id},
                    {"group", group_name(d.group)},
                    {"entropy", d.entropy},
                    {"cpv", d.cpv},
                    {"covered_tweets", d.covered_tweets}});
  json counts = json::object();
  const auto part = group_partition(profiles);
  for (std::size_t g = 1; g <= kGroupCount; ++g) {
    auto it = part.members.find(static_cast<Group>(g));
    counts[group_name(static_cast<Group>(g))] = it == part.members.end() ? 0 : it->second.size();
  }
  json warnings = json::array();
  if (!excluded.empty())
    warnings.push_back(std::to_string(excluded.size()) + " profiles have no topic-covered tweets and are ungrouped");
  return {{"profiles", rows}, {"counts", counts}, {"excluded", excluded}, {"warnings", warnings}};
}

json Runner::compute_metrics() {
  const auto& c = corpus();
  const auto& sc = scores();
  const auto& assign = assignments();
  const auto& cat = catalog();
  const auto groups = group_of();

  std::vector<const ProfileTimeline*> timelines;
  for (const auto& [_, tl] : c.profiles) timelines.push_back(&tl);
  std::vector<json> rows(timelines.size());
  parallel_for(timelines.size(), cfg_.jobs, [&](std::size_t i) {
    const auto& tl = *timelines[i];
    const auto bundle = mission::compute_metrics(tl, sc, cfg_.burstiness, &assign);
    const auto g = groups.find(tl.profile_id);
    std::optional<CategoryCounts> counts;
    if (g != groups.end()) counts = category_tweet_counts(tl, cat, assign);
    const auto fv = extract_features(tl, bundle, counts);
    const auto& m = tl.metadata;
    const auto& lex = bundle.lexical;
    auto meta = [&](auto v) { return m.present ? json(v) : json(); };
    json hist = json::array();
    for (const auto& [d, n] : bundle.activity.delta_days_hist) hist.push_back(json::array({d, n}));
    auto bot = sc.bots.find(tl.profile_id);
    rows[i] = {
        {"profile_id", tl.profile_id},
        {"group", g == groups.end() ? json() : json(group_name(g->second.first))},
        {"entropy", g == groups.end() ? json() : json(g->second.second)},
        {"n_tweets", bundle.activity.n_tweets},
        {"n_unique", bundle.activity.n_unique},
        {"n_retweets", bundle.activity.n_retweets},
        {"toxicity_median", jopt(bundle.toxicity.median)},
        {"toxicity_gini", jopt(bundle.toxicity.gini)},
        {"toxicity_scored", bundle.toxicity.n_scored},
        {"flesch_kincaid_grade", lex ? json(lex->flesch_kincaid_grade) : json()},
        {"flesch_reading_ease", lex ? json(lex->flesch_ease) : json()},
        {"linsear_write", lex ? json(lex->linsear_write) : json()},
        {"automated_readability_index", lex ? json(lex->ari) : json()},
        {"lexical_diversity_mtld", lex ? json(lex->lexical_diversity_mtld) : json()},
        {"chars_per_tweet", lex ? json(lex->chars_per_tweet) : json()},
        {"words_per_tweet", lex ? json(lex->words_per_tweet) : json()},
        {"burstiness", jopt(bundle.activity.burstiness)},
        {"burstiness_cv", bundle.activity.r_cv},
        {"median_delta_days", jopt(bundle.activity.median_delta_days)},
        {"delta_days_hist", hist},
        {"total_hashtags", bundle.hashtags.total_hashtags},
        {"unique_hashtags", bundle.hashtags.unique_hashtags},
        {"hashtags_per_tweet", bundle.hashtags.hashtags_per_tweet},
        {"total_urls", bundle.hashtags.total_urls},
        {"unique_urls", bundle.hashtags.unique_urls},
        {"urls_per_tweet", bundle.hashtags.urls_per_tweet},
        {"followers_following_ratio", jopt(bundle.derived.followers_following_ratio)},
        {"account_age_days", jopt(bundle.derived.account_age_days)},
        {"creation_year", bundle.derived.creation_year ? json(*bundle.derived.creation_year) : json()},
        {"followers", meta(m.followers)},
        {"following", meta(m.following)},
        {"listed", meta(m.listed)},
        {"statuses", meta(m.statuses)},
        {"favourites", meta(m.favourites)},
        {"protected", meta(m.is_protected)},
        {"verified", meta(m.verified)},
        {"has_location", meta(m.has_location)},
        {"bot_overall", bot == sc.bots.end() ? json() : json(bot->second.overall)},
        {"bot_spammer", bot == sc.bots.end() ? json() : json(bot->second.spammer)},
        {"features", fv.values},
        {"imputed", fv.imputed}};
  });
  json warnings = json::array();
  const auto no_meta = std::count_if(timelines.begin(), timelines.end(), [](auto* t) { return !t->metadata.present; });
  if (no_meta > 0) warnings.push_back(std::to_string(no_meta) + " profiles have no metadata; features imputed");
  return {{"catalog", FeatureCatalog::standard().names()},
          {"catalog_hash", FeatureCatalog::standard().hash()},
          {"profiles", rows},
          {"warnings", warnings}};
}

json Runner::compute_detect() {
  const auto& c = corpus();
  const auto& tp = tpvs();
  const auto& cat = catalog();
  const auto& assign = assignments();
  const auto aggregates = topic_aggregates(cfg_.k, assign, scores());
  json warnings = json::array();

  json agg = json::array();
  for (const auto& a : aggregates)
    agg.push_back({{"topic", a.topic},
                   {"category", category_name(cat.category_of(a.topic))},
                   {"tweets", a.tweet_count},
                   {"median_toxicity", jopt(a.median_toxicity)}});
  json base = {{"normalization", cfg_.normalization == NtpvNormalization::per_profile ? "per_profile" : "per_tweet"},
               {"gate", cfg_.detection.gate.to_string()},
               {"min_cluster", cfg_.detection.min_cluster},
               {"topic_aggregates", agg}};
  if (tp.empty()) {
    warnings.push_back("no topic vectors; detection skipped");
    base["labels"] = json::array();
    base["groups"] = json::array();
    base["warnings"] = warnings;
    return base;
  }

  const auto per_profile = profile_tpvs(c, tp);
  const std::size_t denom = cfg_.normalization == NtpvNormalization::per_profile ? per_profile.size() : tp.size();
  const auto global = global_topic_average(tp, denom);
  if (global.zero_entries_replaced > 0)
    warnings.push_back(std::to_string(global.zero_entries_replaced) + " topics carry no mass; global average floored");
  base["global_average"] = {{"denominator", denom}, {"zero_entries_replaced", global.zero_entries_replaced}};

  const auto labels = topic_labels(per_profile, global.values, cat, aggregates);
  const auto shares = topic_shares(c, assign, cfg_.k);
  const auto groups = group_of();

  json label_rows = json::array();
  for (const auto& l : labels) {
    auto g = groups.find(l.profile_id);
    std::optional<TopGaps> gaps;
    if (auto s = shares.find(l.profile_id); s != shares.end()) gaps = top3_gap(s->second);
    label_rows.push_back({{"profile_id", l.profile_id},
                          {"group", g == groups.end() ? json() : json(group_name(g->second.first))},
                          {"topic", l.topic},
                          {"category", category_name(l.category)},
                          {"median_toxicity", jopt(l.median_toxicity)},
                          {"gap12", gaps ? json(gaps->gap12) : json()},
                          {"gap23", gaps ? json(gaps->gap23) : json()}});
  }
  base["labels"] = label_rows;

  json group_rows = json::array();
  for (auto grp : cfg_.detect_groups) {
    std::vector<TopicLabel> subset;
    for (const auto& l : labels)
      if (auto g = groups.find(l.profile_id); g != groups.end() && g->second.first == grp) subset.push_back(l);
    json row = {{"group", group_name(grp)}, {"profiles", subset.size()}};
    if (subset.empty()) {
      warnings.push_back("group " + group_name(grp) + " has no profiles; nothing to detect");
      row["clusters"] = json::array();
      row["designations"] = json::array();
      row["on_mission"] = 0;
      row["not_on_mission"] = 0;
      row["threshold"] = json();
      group_rows.push_back(row);
      continue;
    }
    const auto result = detect_clusters(subset, aggregates, cfg_.detection, &c, &shares);
    row["threshold"] = std::isfinite(result.threshold) ? json(result.threshold) : json();
    json clusters = json::array();
    for (const auto& cl : result.clusters) {
      json cj = {{"id", cl.id},
                 {"topic", cl.topic},
                 {"category", category_name(cat.category_of(cl.topic))},
                 {"size", cl.members.size()},
                 {"median_toxicity", jopt(cl.topic_median_toxicity)},
                 {"on_mission", cl.on_mission},
                 {"friend_overlap", jopt(cl.overlap.friend_overlap)},
                 {"shared_retweet_ratio", jopt(cl.overlap.shared_retweet_ratio)}};
      if (cl.members.size() >= cfg_.detection.min_cluster) {
        const auto pairs = pair_statistics(cl.members, c);
        std::vector<double> shared;
        for (const auto& p : pairs) shared.push_back(static_cast<double>(p.shared_friends));
        cj["shared_friends"] = five_json(five_number_summary(shared));
      }
      clusters.push_back(std::move(cj));
    }
    json designations = json::array();
    for (const auto& d : result.designations) {
      const auto& e = d.evidence;
      designations.push_back({{"profile_id", d.profile_id},
                              {"label", d.on_mission ? "on_mission" : "not_on_mission"},
                              {"cluster_id", d.cluster_id ? json(*d.cluster_id) : json()},
                              {"topic_label", d.topic_label},
                              {"cluster_size", e.cluster_size},
                              {"topic_median_tox", jopt(e.topic_median_tox)},
                              {"friend_overlap", jopt(e.friend_overlap)},
                              {"shared_retweet_ratio", jopt(e.shared_retweet_ratio)},
                              {"gap12", e.top3_gaps ? json(e.top3_gaps->gap12) : json()},
                              {"gap23", e.top3_gaps ? json(e.top3_gaps->gap23) : json()}});
    }
    row["clusters"] = clusters;
    row["designations"] = designations;
    row["on_mission"] = result.on_mission_count();
    row["not_on_mission"] = result.designations.size() - result.on_mission_count();
    group_rows.push_back(std::move(row));
  }
  base["groups"] = group_rows;
  base["warnings"] = warnings;
  return base;
}

std::vector<FeatureRow> feature_rows(const json& metrics) {
  std::vector<FeatureRow> rows;
  for (const auto& p : metrics.at("profiles")) {
    FeatureRow r;
    r.features.profile_id = p.at("profile_id").get<std::string>();
    r.features.values = p.at("features").get<std::vector<double>>();
    r.features.imputed = p.at("imputed").get<std::vector<bool>>();
    if (!p.at("group").is_null()) r.group = group_from_name(p.at("group").get<std::string>());
    rows.push_back(std::move(r));
  }
  return rows;
}

json Runner::compute_classify() {
  const auto rows = feature_rows(res_.metrics);
  json warnings = json::array();
  std::map<std::string, int> labels;
  std::string source;
  if (!cfg_.labels.empty()) {
    labels = load_labels_csv(cfg_.labels);
    source = "file";
  } else {
    for (const auto& g : res_.detect.at("groups"))
      for (const auto& d : g.at("designations"))
        labels[d.at("profile_id").get<std::string>()] = d.at("label") == "on_mission" ? 1 : 0;
    source = "detection";
  }
  const auto ls = labeled_set(rows, labels);
  if (ls.ids.size() < labels.size())
    warnings.push_back(std::to_string(labels.size() - ls.ids.size()) + " labeled profiles are not in the corpus");
  const auto positives = static_cast<std::size_t>(std::count(ls.y.begin(), ls.y.end(), 1));
  json j = {{"labels_source", source}, {"labeled", ls.ids.size()}, {"positive", positives}};

  std::string skip;
  if (ls.ids.size() < 5) skip = "fewer than 5 labeled profiles";
  else if (positives == 0 || positives == ls.ids.size()) skip = "labels hold a single class";
  if (!skip.empty()) {
    warnings.push_back("classification skipped: " + skip);
    j["skipped"] = skip;
    j["warnings"] = warnings;
    return j;
  }

  const auto& cat = FeatureCatalog::standard();
  const auto split = split_80_20(ls.y, derive_seed(cfg_.seed, "split"), cfg_.stratified);
  auto train_cfg = cfg_.train;
  train_cfg.jobs = cfg_.jobs;
  const auto train_seed = derive_seed(cfg_.seed, "train");
  auto model = train_model(cfg_.model, ls.x, ls.y, split.train, cat.all_indices(), train_cfg, train_seed, cat.hash());
  model.config_hash = res_.config_hash;
  write_text(data_path(Stage::classify, ".model.json"), model.to_json());

  const auto eval = evaluate(model, ls.x, ls.y, split.test);
  const auto table = ablation(ls.x, ls.y, cat, split, train_cfg, train_seed);

  std::map<Group, std::vector<FeatureVector>> wild_groups;
  for (auto g : cfg_.flag_groups) wild_groups[g];
  for (const auto& r : rows)
    if (r.group && wild_groups.count(*r.group)) wild_groups[*r.group].push_back(r.features);
  const auto wild = flag_in_wild(model, wild_groups, cfg_.flag_sample, derive_seed(cfg_.seed, "flag"));
  write_text(data_path(Stage::classify, ".flagged.jsonl"), wild.predictions_jsonl());

  j["skipped"] = json();
  j["split"] = {{"train", split.train.size()}, {"test", split.test.size()}, {"stratified", cfg_.stratified}};
  j["model"] = {{"kind", model_kind_name(cfg_.model)}, {"features", cat.size()}, {"catalog_hash", cat.hash()}};
  j["evaluation"] = eval_to_json(eval);
  j["ablation"] = ablation_to_json(table);
  j["wild"] = wild_to_json(wild);
  j["warnings"] = warnings;
  return j;
}

// Mean of a numeric field over profiles of one group, skipping nulls.
std::optional<double> group_mean(const json& profiles, const std::string& group, const char* key) {
  std::vector<double> v;
  for (const auto& p : profiles)
    if (p.at("group") == group)
      if (auto x = opt_of(p, key)) v.push_back(*x);
  if (v.empty()) return std::nullopt;
  return mean(v);
}

std::vector<double> group_values(const json& profiles, const std::string& group, const char* key) {
  std::vector<double> v;
  for (const auto& p : profiles)
    if (group == "all" ? !p.at("group").is_null() : p.at("group") == group)
      if (auto x = opt_of(p, key)) v.push_back(*x);
  return v;
}

json Runner::compute_report() {
  const auto& profiles = res_.metrics.at("profiles");
  std::vector<std::string> present;
  json groups = json::array();
  std::size_t grouped = 0;
  for (const auto& [g, n] : res_.group.at("counts").items()) grouped += n.get<std::size_t>();
  for (std::size_t gi = 1; gi <= kGroupCount; ++gi) {
    const auto g = group_name(static_cast<Group>(gi));
    const auto n = res_.group.at("counts").at(g).get<std::size_t>();
    std::optional<double> share;
    if (grouped > 0) share = 100.0 * static_cast<double>(n) / static_cast<double>(grouped);
    groups.push_back({{"group", g}, {"profiles", n}, {"share", jopt(share)}});
    if (n > 0) present.push_back(g);
  }

  json toxicity = json::array(), lexical = json::array(), bots = json::array(), meta = json::array();
  auto with_all = present;
  with_all.insert(with_all.begin(), "all");
  for (const auto& g : with_all)
    toxicity.push_back({{"group", g},
                        {"median_toxicity", five_json(five_number_summary(group_values(profiles, g, "toxicity_median")))},
                        {"gini", five_json(five_number_summary(group_values(profiles, g, "toxicity_gini")))}});
  for (const auto& g : present) {
    json row = {{"group", g}};
    for (const char* k : {"flesch_kincaid_grade", "flesch_reading_ease", "linsear_write", "automated_readability_index",
                          "lexical_diversity_mtld", "chars_per_tweet", "words_per_tweet"})
      row[k] = jopt(group_mean(profiles, g, k));
    lexical.push_back(row);

    json brow = {{"group", g}};
    for (const char* k : {"bot_overall", "bot_spammer"}) {
      auto v = group_values(profiles, g, k);
      brow[k] = v.empty() ? json() : json{{"mean", mean(v)}, {"std", population_stddev(v)}};
    }
    bots.push_back(brow);

    json mrow = {{"group", g}};
    for (const char* k : {"followers", "following", "listed", "statuses", "favourites"})
      mrow[k] = jopt(group_mean(profiles, g, k));
    const auto fo = group_mean(profiles, g, "followers"), fi = group_mean(profiles, g, "following");
    mrow["following_per_follower"] = fo && fi && *fo > 0.0 ? json(*fi / *fo) : json();
    for (const char* k : {"protected", "verified", "has_location"}) {
      std::vector<double> v;
      for (const auto& p : profiles)
        if (p.at("group") == g && !p.at(k).is_null()) v.push_back(p.at(k).get<bool>() ? 100.0 : 0.0);
      mrow[std::string(k) + "_pct"] = v.empty() ? json() : json(mean(v));
    }
    meta.push_back(mrow);
  }

  json clusters = json::array();
  const auto min_cluster = res_.detect.value("min_cluster", cfg_.detection.min_cluster);
  for (const auto& g : res_.detect.at("groups")) {
    const auto total = g.at("profiles").get<std::size_t>();
    auto pct = [&](std::size_t n) {
      return total ? json(100.0 * static_cast<double>(n) / static_cast<double>(total)) : json();
    };
    json rows = json::array();
    std::size_t misc = 0;
    std::vector<double> misc_tox;
    for (const auto& c : g.at("clusters")) {
      const auto size = c.at("size").get<std::size_t>();
      if (size >= min_cluster) {
        rows.push_back({{"profiles", size},
                        {"share", pct(size)},
                        {"topic", c.at("topic")},
                        {"median_toxicity", c.at("median_toxicity")},
                        {"category", c.at("category")},
                        {"on_mission", c.at("on_mission")}});
      } else {
        misc += size;
        if (!c.at("median_toxicity").is_null()) misc_tox.push_back(c.at("median_toxicity").get<double>());
      }
    }
    json misc_row = {{"profiles", misc}, {"share", pct(misc)}};
    misc_row["median_toxicity_min"] = misc_tox.empty() ? json() : json(*std::min_element(misc_tox.begin(), misc_tox.end()));
    misc_row["median_toxicity_max"] = misc_tox.empty() ? json() : json(*std::max_element(misc_tox.begin(), misc_tox.end()));
    clusters.push_back({{"group", g.at("group")},
                        {"profiles", total},
                        {"threshold", g.at("threshold")},
                        {"rows", rows},
                        {"misc", misc_row},
                        {"on_mission", g.at("on_mission")},
                        {"not_on_mission", g.at("not_on_mission")}});
  }

  const auto& cl = res_.classify;
  json classifier = {{"labels_source", cl.at("labels_source")},
                     {"labeled", cl.at("labeled")},
                     {"skipped", cl.value("skipped", json())}};
  json wild = json();
  if (cl.value("skipped", json()).is_null()) {
    classifier["model"] = cl.at("model");
    classifier["split"] = cl.at("split");
    classifier["evaluation"] = cl.at("evaluation");
    classifier["ablation"] = cl.at("ablation");
    wild = cl.at("wild");
    wild.erase("annotation_samples");
  }

  const auto& cat = FeatureCatalog::standard();
  json cat_groups = json::object();
  for (auto fg : {FeatureGroup::content, FeatureGroup::auxiliary, FeatureGroup::activity_profile})
    cat_groups[std::string(feature_group_name(fg))] = cat.indices(fg).size();

  return {{"schema", "mission-profiler/report"},
          {"version", kArtifactVersion},
          {"config_hash", res_.config_hash},
          {"seed", cfg_.seed},
          {"k", cfg_.k},
          {"ingest", {{"profiles", res_.ingest.at("profiles")}, {"tweets", res_.ingest.at("tweets")},
                      {"stats", res_.ingest.at("stats")}}},
          {"scoring", {{"tweets_scored", res_.score.at("tweets_scored")},
                       {"tweets_missing", res_.score.at("tweets_missing")},
                       {"profiles_scored", res_.score.at("profiles_scored")},
                       {"profiles_missing", res_.score.at("profiles_missing")}}},
          {"topics", {{"source", res_.topics.at("source")}, {"covered_tweets", res_.topics.at("covered_tweets")},
                      {"eligible_tweets", res_.topics.at("eligible_tweets")}}},
          {"feature_catalog", {{"size", cat.size()}, {"groups", cat_groups}, {"hash", cat.hash()}}},
          {"groups", groups},
          {"toxicity_by_group", toxicity},
          {"lexical_by_group", lexical},
          {"bot_by_group", bots},
          {"profile_by_group", meta},
          {"clusters", clusters},
          {"classifier", classifier},
          {"wild", wild},
          {"warnings", res_.warnings}};
}

void Runner::run(Stage until) {
  fs::create_directories(cache_);
  const auto h = res_.config_hash;
  auto reached = [&](Stage s) { return static_cast<int>(s) <= static_cast<int>(until); };

  const auto k_ingest = key_of({"ingest", to_hex(hash_file(cfg_.tweets)), file_hash_or(cfg_.profiles, "-"),
                                cfg_.strict ? "strict" : "lenient"});
  stage(Stage::ingest, k_ingest, &PipelineResult::ingest, [&] { return compute_ingest(); });
  if (!reached(Stage::score)) return;

  const auto k_score = key_of({"score", k_ingest, file_hash_or(cfg_.toxicity, "-"), file_hash_or(cfg_.bots, "-"),
                               cfg_.scoring_backend});
  stage(Stage::score, k_score, &PipelineResult::score, [&] { return compute_score(); });
  if (!reached(Stage::topics)) return;

  const auto k_topics = key_of({"topics", k_ingest, cfg_.tpv.empty() ? "baseline:" + std::to_string(cfg_.seed)
                                                                     : to_hex(hash_file(cfg_.tpv)),
                                std::to_string(cfg_.k), file_hash_or(cfg_.catalog, "cyclic")});
  stage(Stage::topics, k_topics, &PipelineResult::topics, [&] { return compute_topics(); });
  if (!reached(Stage::group)) return;

  const auto k_group = key_of({"group", k_topics});
  stage(Stage::group, k_group, &PipelineResult::group, [&] { return compute_group(); });
  if (!reached(Stage::metrics)) return;

  const auto k_metrics = key_of({"metrics", k_group, k_score,
                                 cfg_.burstiness == BurstinessMode::profile ? "profile" : "dominant_topic"});
  auto& metrics = stage(Stage::metrics, k_metrics, &PipelineResult::metrics, [&] { return compute_metrics(); });
  std::vector<FeatureRow> rows = feature_rows(metrics);
  write_output("features.jsonl", features_jsonl(rows, h));
  if (!reached(Stage::detect)) return;

  const auto cfg_json = json::parse(cfg_.to_json());
  const auto k_detect = key_of({"detect", k_metrics, cfg_json.at("detect").dump()});
  auto& detect = stage(Stage::detect, k_detect, &PipelineResult::detect, [&] { return compute_detect(); });
  json designations = {{"config_hash", h}, {"groups", json::array()}};
  for (const auto& g : detect.at("groups"))
    designations["groups"].push_back({{"group", g.at("group")}, {"designations", g.at("designations")}});
  write_output("designations.json", designations.dump(1) + "\n");
  if (!reached(Stage::classify)) return;

  const auto k_classify = key_of({"classify", k_detect, file_hash_or(cfg_.labels, "-"), cfg_json.at("classify").dump(),
                                  cfg_json.at("flag").dump(), std::to_string(cfg_.seed)});
  auto& cl = stage(Stage::classify, k_classify, &PipelineResult::classify, [&] { return compute_classify(); });
  if (cl.value("skipped", json()).is_null()) {
    res_.model_json = read_text(data_path(Stage::classify, ".model.json"));
    write_output("model.json", res_.model_json);
    write_output("flagged.jsonl", json{{"config_hash", h}}.dump() + "\n" +
                                      read_text(data_path(Stage::classify, ".flagged.jsonl")));
    std::string sample = "# config_hash=" + h + "\ngroup,profile_id\n";
    for (const auto& [g, ids] : cl.at("wild").at("annotation_samples").items())
      for (const auto& id : ids) sample += g + "," + id.get<std::string>() + "\n";
    write_output("annotation_sample.csv", sample);
  }
  if (!reached(Stage::report)) return;

  const auto k_report = key_of({"report", k_classify, h});
  auto& report = stage(Stage::report, k_report, &PipelineResult::report, [&] { return compute_report(); });
  write_output("report.json", report.dump(1) + "\n");
  try {
    export_plot_data(res_, (out_ / "plots").string());
  } catch (const Error& e) {
    throw PipelineError("report", e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config, const RunOptions& options) {
  config.validate();
  PipelineResult res;
  res.config_hash = config.hash();
  const fs::path out(config.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw PipelineError("config", "cannot create output directory " + out.string() + ": " + ec.message());

  RunLock lock(out / ".lock");
  const auto manifest = out / "manifest.json";
  if (fs::exists(manifest) && !options.force) {
    json m = json::parse(read_text(manifest), nullptr, false);
    const auto previous = m.is_object() ? m.value("config_hash", std::string()) : std::string();
    if (previous != res.config_hash)
      throw Error("provenance", "output directory " + out.string() + " was produced under config " + previous +
                                    ", current config is " + res.config_hash + " (use --force or another --out)");
  }
  write_text(out / "config.json", config.to_json());

  Runner runner(config, res);
  try {
    runner.run(options.until);
  } catch (...) {
    json log = json::array();
    for (const auto& r : res.log) log.push_back({{"stage", r.stage}, {"key", r.key}, {"cached", r.cached}});
    write_text(out / "run_log.json", json{{"config_hash", res.config_hash}, {"stages", log}, {"completed", false}}.dump(1) + "\n");
    throw;
  }

  json log = json::array(), keys = json::object();
  for (const auto& r : res.log) {
    log.push_back({{"stage", r.stage}, {"key", r.key}, {"cached", r.cached}});
    keys[r.stage] = r.key;
  }
  write_text(out / "run_log.json",
             json{{"config_hash", res.config_hash}, {"stages", log}, {"completed", true}, {"warnings", res.warnings}}
                     .dump(1) +
                 "\n");
  write_text(manifest, json{{"config_hash", res.config_hash}, {"stages", keys}}.dump(1) + "\n");
  return res;
}

// ---------------------------------------------------------------------------

std::vector<std::string> export_plot_data(const PipelineResult& result, const std::string& dir) {
  if (result.group.is_null() || result.metrics.is_null() || result.detect.is_null())
    throw Error("report", "plot export needs the group, metrics and detect artifacts");
  fs::create_directories(dir);
  const std::string header = "# config_hash=" + result.config_hash + "\n";
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& body) {
    write_text(fs::path(dir) / name, header + body);
    written.push_back(name);
  };
  const auto& profiles = result.metrics.at("profiles");

  // Sorted (group, value) rows for CDF-shaped figures.
  auto cdf = [&](const char* key, const char* column) {
    std::string body = std::string("group,") + column + "\n";
    for (std::size_t gi = 1; gi <= kGroupCount; ++gi) {
      const auto g = group_name(static_cast<Group>(gi));
      auto v = group_values(profiles, g, key);
      std::sort(v.begin(), v.end());
      for (double x : v) body += g + "," + format_double(x) + "\n";
    }
    return body;
  };
  auto box = [&](const char* key) {
    std::string body = "group,min,q1,median,q3,max\n";
    std::vector<std::string> gs = {"all"};
    for (std::size_t gi = 1; gi <= kGroupCount; ++gi) gs.push_back(group_name(static_cast<Group>(gi)));
    for (const auto& g : gs) {
      auto f = five_number_summary(group_values(profiles, g, key));
      if (!f) continue;
      body += g + "," + format_double(f->min) + "," + format_double(f->q1) + "," + format_double(f->median) + "," +
              format_double(f->q3) + "," + format_double(f->max) + "\n";
    }
    return body;
  };

  emit("fig1_entropy_cdf.csv", cdf("entropy", "H"));
  emit("fig2a_toxicity_median_box.csv", box("toxicity_median"));
  emit("fig2b_toxicity_gini_box.csv", box("toxicity_gini"));
  emit("fig3a_tweets_cdf.csv", cdf("n_tweets", "tweets"));
  emit("fig3b_unique_tweets_cdf.csv", cdf("n_unique", "unique_tweets"));
  emit("fig4a_total_hashtags_cdf.csv", cdf("total_hashtags", "total_hashtags"));
  emit("fig4b_unique_hashtags_cdf.csv", cdf("unique_hashtags", "unique_hashtags"));
  emit("fig4c_hashtags_per_tweet_cdf.csv", cdf("hashtags_per_tweet", "hashtags_per_tweet"));
  emit("fig5_burstiness_cdf.csv", cdf("burstiness", "B"));
  emit("account_age_cdf.csv", cdf("account_age_days", "account_age_days"));

  std::string hist = "profile_id,group,delta_days,count\n";
  for (const auto& p : profiles)
    for (const auto& bin : p.at("delta_days_hist"))
      hist += p.at("profile_id").get<std::string>() + "," +
              (p.at("group").is_null() ? std::string() : p.at("group").get<std::string>()) + "," +
              std::to_string(bin.at(0).get<std::int64_t>()) + "," + std::to_string(bin.at(1).get<std::size_t>()) +
              "\n";
  emit("time_delta_hist.csv", hist);

  std::map<std::string, std::string> designation;
  for (const auto& g : result.detect.at("groups"))
    for (const auto& d : g.at("designations"))
      designation[d.at("profile_id").get<std::string>()] = d.at("label").get<std::string>();
  std::string gaps = "profile_id,group,designation,gap12,gap23\n";
  std::string label_tox = "profile_id,group,designation,topic,median_toxicity\n";
  for (const auto& l : result.detect.at("labels")) {
    const auto id = l.at("profile_id").get<std::string>();
    auto it = designation.find(id);
    if (it == designation.end()) continue;
    const auto group = l.at("group").is_null() ? std::string() : l.at("group").get<std::string>();
    if (!l.at("gap12").is_null())
      gaps += id + "," + group + "," + it->second + "," + format_double(l.at("gap12").get<double>()) + "," +
              format_double(l.at("gap23").get<double>()) + "\n";
    label_tox += id + "," + group + "," + it->second + "," + std::to_string(l.at("topic").get<std::size_t>()) + "," +
                 (l.at("median_toxicity").is_null() ? std::string() : format_double(l.at("median_toxicity").get<double>())) +
                 "\n";
  }
  emit("fig6_top3_gaps.csv", gaps);
  emit("fig7_label_toxicity.csv", label_tox);
  return written;
}

}  // namespace mission
