#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mission/pipeline.hpp"
#include "mission/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mission;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::string out;
  bool force = false;
};

// Flags accepted by every pipeline-stage subcommand; each overrides the
// matching config field when given.
struct Overrides {
  std::optional<std::string> tweets, profiles, tpv, catalog, toxicity, bots, labels, backend, gate, burstiness,
      normalization, groups, model, flag_groups;
  std::optional<std::size_t> k, min_cluster, sample;
  std::optional<double> rps;
  bool strict = false, baseline = false;
};

void add_stage_flags(CLI::App* sub, Overrides& o) {
  sub->add_option("--tweets", o.tweets, "tweet JSONL");
  sub->add_option("--profiles", o.profiles, "profile metadata JSONL");
  sub->add_flag("--strict", o.strict, "abort on malformed input lines");
  sub->add_option("--backend", o.backend, "scoring backend: file, http or mock");
  sub->add_option("--toxicity-cache", o.toxicity, "precomputed toxicity scores");
  sub->add_option("--bot-cache", o.bots, "precomputed bot scores");
  sub->add_option("--rps", o.rps, "request rate limit for the http backend");
  sub->add_option("--tpv", o.tpv, "topic probability vectors JSONL");
  sub->add_flag("--baseline", o.baseline, "use the built-in baseline topic assigner");
  sub->add_option("--catalog", o.catalog, "topic_index<TAB>category file");
  sub->add_option("--k", o.k, "number of topics");
  sub->add_option("--burstiness", o.burstiness, "profile or dominant_topic");
  sub->add_option("--normalization", o.normalization, "nTPV global average: per_profile or per_tweet");
  sub->add_option("--group", o.groups, "groups to designate in, e.g. VIII or II..VII or all");
  sub->add_option("--min-cluster", o.min_cluster, "smallest cluster that can be on-mission");
  sub->add_option("--tox-gate", o.gate, "toxicity gate: pNN or an absolute value");
  sub->add_option("--labels", o.labels, "ground-truth labels CSV");
  sub->add_option("--model", o.model, "svm, tree or forest");
  sub->add_option("--flag-groups", o.flag_groups, "groups to flag in the wild");
  sub->add_option("--sample", o.sample, "annotation sample size per group");
}

bool names_file(const std::string& out) { return !out.empty() && fs::path(out).has_extension(); }

RunConfig build_config(const Globals& g, const Overrides& o) {
  RunConfig c = g.config.empty() ? RunConfig{} : RunConfig::load(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.jobs) c.jobs = *g.jobs;
  if (!g.out.empty() && !names_file(g.out)) c.out = g.out;
  if (o.tweets) c.tweets = *o.tweets;
  if (o.profiles) c.profiles = *o.profiles;
  if (o.strict) c.strict = true;
  if (o.backend) c.scoring_backend = *o.backend;
  if (o.toxicity) c.toxicity = *o.toxicity;
  if (o.bots) c.bots = *o.bots;
  if (o.rps) c.rate_limit = *o.rps;
  if (o.tpv) c.tpv = *o.tpv;
  if (o.baseline) c.tpv.clear();
  if (o.catalog) c.catalog = *o.catalog;
  if (o.k) c.k = *o.k;
  if (o.burstiness) {
    if (*o.burstiness == "profile") c.burstiness = BurstinessMode::profile;
    else if (*o.burstiness == "dominant_topic") c.burstiness = BurstinessMode::dominant_topic;
    else throw Error("config", "--burstiness must be profile or dominant_topic");
  }
  if (o.normalization) {
    if (*o.normalization == "per_profile") c.normalization = NtpvNormalization::per_profile;
    else if (*o.normalization == "per_tweet") c.normalization = NtpvNormalization::per_tweet;
    else throw Error("config", "--normalization must be per_profile or per_tweet");
  }
  if (o.groups) c.detect_groups = parse_group_list(*o.groups);
  if (o.min_cluster) c.detection.min_cluster = *o.min_cluster;
  if (o.gate) {
    try {
      c.detection.gate = ToxicityGate::parse(*o.gate);
    } catch (const Error& e) {
      throw Error("config", e.what());
    }
  }
  if (o.labels) c.labels = *o.labels;
  if (o.model) {
    auto m = model_kind_from_name(*o.model);
    if (!m) throw Error("config", "--model must be svm, tree or forest");
    c.model = *m;
  }
  if (o.flag_groups) c.flag_groups = parse_group_list(*o.flag_groups);
  if (o.sample) c.flag_sample = *o.sample;
  c.validate();
  return c;
}

const json& stage_json(const PipelineResult& r, Stage s) {
  switch (s) {
    case Stage::ingest: return r.ingest;
    case Stage::score: return r.score;
    case Stage::topics: return r.topics;
    case Stage::group: return r.group;
    case Stage::metrics: return r.metrics;
    case Stage::detect: return r.detect;
    case Stage::classify: return r.classify;
    case Stage::report: return r.report;
  }
  return r.report;
}

void write_file(const std::string& path, const std::string& content) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path);
  out << content;
}

// Copy the artifact of `s` to a file named on the command line.
void export_stage(const RunConfig& c, const PipelineResult& r, Stage s, const std::string& dest) {
  std::string key;
  for (const auto& rec : r.log)
    if (rec.stage == stage_name(s)) key = rec.key;
  const auto cache = fs::path(c.out) / "cache";
  const auto base = stage_name(s) + "-" + key;
  switch (s) {
    case Stage::ingest:
      fs::copy_file(cache / (base + ".bin"), dest, fs::copy_options::overwrite_existing);
      return;
    case Stage::score:
    case Stage::topics:
      fs::copy_file(cache / (base + ".jsonl"), dest, fs::copy_options::overwrite_existing);
      return;
    case Stage::metrics: {
      std::string body = json{{"config_hash", r.config_hash}}.dump() + "\n";
      for (const auto& p : r.metrics.at("profiles")) body += p.dump() + "\n";
      write_file(dest, body);
      return;
    }
    case Stage::detect:
      fs::copy_file(fs::path(c.out) / "designations.json", dest, fs::copy_options::overwrite_existing);
      return;
    case Stage::classify:
      write_file(dest, r.model_json);
      return;
    default: {
      auto j = stage_json(r, s);
      j["config_hash"] = r.config_hash;
      write_file(dest, j.dump(1) + "\n");
    }
  }
}

int run_stage(const Globals& g, const Overrides& o, Stage until) {
  const auto cfg = build_config(g, o);
  RunOptions opts;
  opts.until = until;
  opts.force = g.force;
  const auto r = run_pipeline(cfg, opts);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  if (names_file(g.out)) export_stage(cfg, r, until, g.out);
  if (until == Stage::report) {
    std::cout << json{{"config_hash", r.config_hash}, {"out", cfg.out}, {"report", (fs::path(cfg.out) / "report.json").string()}}
                     .dump(2)
              << "\n";
  } else {
    auto summary = stage_json(r, until);
    if (until == Stage::metrics) summary = {{"profiles", summary.at("profiles").size()}};
    std::cout << summary.dump(2) << "\n";
  }
  return 0;
}

TrainConfig train_config(const Globals& g) {
  TrainConfig t = g.config.empty() ? RunConfig{}.train : RunConfig::load(g.config).train;
  if (g.jobs) t.jobs = *g.jobs;
  return t;
}

std::uint64_t seed_of(const Globals& g) {
  if (g.seed) return *g.seed;
  return g.config.empty() ? RunConfig{}.seed : RunConfig::load(g.config).seed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Profile social-media timelines and detect on-mission accounts", "mission-profiler"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "run config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "top-level seed");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output directory, or a file for single-artifact commands");
  app.add_flag("--force", g.force, "reuse an output directory written under another config");

  Overrides o;
  std::optional<Stage> stage;
  for (int s = 0; s <= static_cast<int>(Stage::report); ++s) {
    const auto st = static_cast<Stage>(s);
    if (st == Stage::classify) continue;
    auto* sub = app.add_subcommand(stage_name(st), "run the pipeline through the " + stage_name(st) + " stage");
    sub->fallthrough();
    add_stage_flags(sub, o);
    sub->callback([&stage, st] { stage = st; });
  }
  {
    auto* sub = app.add_subcommand("run", "run every stage");
    sub->fallthrough();
    add_stage_flags(sub, o);
    sub->callback([&stage] { stage = Stage::report; });
  }

  std::string ratings;
  auto* kappa = app.add_subcommand("kappa", "Fleiss' kappa over an annotation matrix");
  kappa->fallthrough();
  kappa->add_option("--ratings", ratings, "items x raters CSV")->required();

  std::string spec_path;
  std::size_t n_on = 100, n_gen = 100;
  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic bundle");
  synth->fallthrough();
  synth->add_option("--spec", spec_path, "synthetic spec JSON");
  synth->add_option("--on-mission", n_on, "on-mission profiles when no spec is given");
  synth->add_option("--genuine", n_gen, "genuine profiles when no spec is given");

  std::string features, labels, model_path, model_kind = "svm", flag_groups = "II..VII";
  std::size_t sample = 100;
  bool unstratified = false;
  auto* train = app.add_subcommand("train", "train a classifier on an 80/20 split");
  auto* evaluate = app.add_subcommand("evaluate", "score a model against labels");
  auto* ablate = app.add_subcommand("ablate", "feature-group x model ablation table");
  auto* flag = app.add_subcommand("flag", "apply a model to unlabeled groups");
  for (auto* sub : {train, evaluate, ablate, flag}) {
    sub->fallthrough();
    sub->add_option("--features", features, "features.jsonl from the metrics stage")->required();
  }
  for (auto* sub : {train, evaluate, ablate}) sub->add_option("--labels", labels, "labels CSV")->required();
  for (auto* sub : {train, ablate}) sub->add_flag("--unstratified", unstratified, "plain random split");
  train->add_option("--model", model_kind, "svm, tree or forest");
  for (auto* sub : {evaluate, flag}) sub->add_option("--model", model_path, "model JSON")->required();
  flag->add_option("--groups", flag_groups, "groups to flag");
  flag->add_option("--sample", sample, "annotation sample size per group");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (stage) return run_stage(g, o, *stage);

    if (kappa->parsed()) {
      const auto r = fleiss_kappa(load_ratings_csv(ratings));
      std::cout << json{{"kappa", r.kappa}, {"items", r.n_items}, {"raters", r.n_raters}, {"categories", r.n_categories}}
                       .dump(2)
                << "\n";
      return 0;
    }

    if (synth->parsed()) {
      const auto spec = spec_path.empty() ? default_synth_spec(n_on, n_gen) : load_synth_spec(spec_path);
      const auto seed = seed_of(g);
      const auto dir = g.out.empty() ? std::string("synth") : g.out;
      const auto bundle = generate(spec, seed);
      bundle.write(dir);
      write_file((fs::path(dir) / "pipeline.json").string(), synth_run_config(bundle.k, seed).to_json());
      std::size_t on = 0;
      for (const auto& l : bundle.labels) on += l.on_mission ? 1 : 0;
      std::cout << json{{"out", dir}, {"profiles", bundle.labels.size()}, {"on_mission", on}, {"seed", seed}}.dump(2)
                << "\n";
      return 0;
    }

    const auto rows = load_features_jsonl(features);
    const auto& cat = FeatureCatalog::standard();
    if (train->parsed() || ablate->parsed()) {
      const auto ls = labeled_set(rows, load_labels_csv(labels));
      if (ls.y.empty()) throw ClassifyError("no labeled profile appears in the features file");
      const auto seed = seed_of(g);
      const auto split = split_80_20(ls.y, derive_seed(seed, "split"), !unstratified);
      const auto cfg = train_config(g);
      if (ablate->parsed()) {
        std::cout << ablation_to_json(ablation(ls.x, ls.y, cat, split, cfg, derive_seed(seed, "train"))).dump(2)
                  << "\n";
        return 0;
      }
      auto kind = model_kind_from_name(model_kind);
      if (!kind) throw Error("config", "--model must be svm, tree or forest");
      const auto model =
          train_model(*kind, ls.x, ls.y, split.train, cat.all_indices(), cfg, derive_seed(seed, "train"), cat.hash());
      const auto dest = g.out.empty() ? std::string("model.json") : g.out;
      model.save(dest);
      std::cout << json{{"model", dest},
                        {"kind", model_kind_name(*kind)},
                        {"train", split.train.size()},
                        {"test", split.test.size()},
                        {"evaluation", eval_to_json(mission::evaluate(model, ls.x, ls.y, split.test))}}
                       .dump(2)
                << "\n";
      return 0;
    }

    const auto model = TrainedModel::load(model_path);
    if (model.catalog_hash != cat.hash()) throw ClassifyError("model was trained on a different feature catalog");
    if (evaluate->parsed()) {
      const auto ls = labeled_set(rows, load_labels_csv(labels));
      std::vector<std::size_t> all(ls.y.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      std::cout << eval_to_json(mission::evaluate(model, ls.x, ls.y, all)).dump(2) << "\n";
      return 0;
    }

    std::map<Group, std::vector<FeatureVector>> groups;
    for (auto gr : parse_group_list(flag_groups)) groups[gr];
    for (const auto& r : rows)
      if (r.group && groups.count(*r.group)) groups[*r.group].push_back(r.features);
    const auto wild = flag_in_wild(model, groups, sample, derive_seed(seed_of(g), "flag"));
    write_file(g.out.empty() ? std::string("flagged.jsonl") : g.out, wild.predictions_jsonl());
    std::cout << wild_to_json(wild).dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for_stage(e.stage());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
